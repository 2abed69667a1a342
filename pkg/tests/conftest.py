import numpy as np
import pytest

from nfloc import ArrayConfig, Scene


@pytest.fixture(scope="session")
def default_cfg():
    """Reference scenario array: 16 elements, 2.5 cm pitch, 5 m/s, 1000 ms."""
    return ArrayConfig(
        n_elements=16, spacing=0.025, speed=5.0, symbol_duration=1e-3, n_symbols=1000
    )


@pytest.fixture(scope="session")
def default_scene():
    """Reference target at (10, 0) m, 30 dBm transmit, -70 dBm noise, 6 GHz."""
    return Scene(
        target_x=10.0,
        target_y=0.0,
        reflection=1.0 + 0.0j,
        noise_power=1e-10,
        tx_power=1.0,
        wavelength=0.05,
    )


@pytest.fixture(scope="session")
def small_cfg():
    """Fast variant for oracle tests: fewer elements and symbols."""
    return ArrayConfig(
        n_elements=4, spacing=0.025, speed=50.0, symbol_duration=1e-3, n_symbols=32
    )


def fd_step(coordinate: float, wavelength: float) -> float:
    """Central-difference step for wavefront-phase quantities.

    Scales with the coordinate but is capped well below the phase scale
    wavelength/(2 pi), keeping truncation error around 1e-7 relative; the
    uncapped coordinate-proportional step would swamp the tolerance for
    targets tens of meters out.
    """
    return min(1e-5 * max(1.0, abs(coordinate)), 1e-3 * wavelength / (2.0 * np.pi))
