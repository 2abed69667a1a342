"""Trajectory geometry for a uniform linear array on a moving platform.

The platform carries an N-element ULA along the y-axis at constant speed.
All indices in this package are 0-based: symbol slots are l = 0..L-1 and
array elements are n = 0..N-1, with element n = 0 at the origin during the
first symbol. Lengths are meters, times seconds, powers watts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ArrayConfig:
    """Moving-platform ULA description.

    n_elements      number of antennas N
    spacing         inter-element spacing in m
    speed           platform speed in m/s (along +y)
    symbol_duration symbol duration in s
    n_symbols       number of symbols L in the sensing pass
    """

    n_elements: int
    spacing: float
    speed: float
    symbol_duration: float
    n_symbols: int

    def __post_init__(self):
        if self.n_elements < 1:
            raise ValueError(f"n_elements must be >= 1, got {self.n_elements}")
        if self.n_symbols < 1:
            raise ValueError(f"n_symbols must be >= 1, got {self.n_symbols}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be > 0, got {self.spacing}")
        if not self.symbol_duration > 0:
            raise ValueError(
                f"symbol_duration must be > 0, got {self.symbol_duration}"
            )
        if self.speed < 0:
            raise ValueError(f"speed must be >= 0, got {self.speed}")


@dataclass(frozen=True)
class Scene:
    """Point target plus link-budget parameters.

    target_x must be positive: the target sits off the line of motion,
    otherwise the x-coordinate is unobservable from range alone.
    """

    target_x: float
    target_y: float
    reflection: complex = 1.0 + 0.0j
    noise_power: float = 1e-10
    tx_power: float = 1.0
    wavelength: float = 0.05

    def __post_init__(self):
        if not self.target_x > 0:
            raise ValueError(
                f"target_x must be > 0 (off the array axis), got {self.target_x}"
            )
        if not self.noise_power > 0:
            raise ValueError(f"noise_power must be > 0, got {self.noise_power}")
        if not self.tx_power > 0:
            raise ValueError(f"tx_power must be > 0, got {self.tx_power}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")


@dataclass(frozen=True)
class DistanceField:
    """Per-(symbol, element) target geometry.

    distances  (L, N) element-to-target distances in m
    y_offsets  (L, N) signed axial offsets target_y - element_y in m
    """

    distances: np.ndarray
    y_offsets: np.ndarray


def antenna_position(cfg: ArrayConfig, l: int, n: int) -> float:
    """y-coordinate of element n during symbol l: l*Ts*v + n*spacing."""
    if not 0 <= l < cfg.n_symbols:
        raise IndexError(f"symbol index {l} outside [0, {cfg.n_symbols})")
    if not 0 <= n < cfg.n_elements:
        raise IndexError(f"element index {n} outside [0, {cfg.n_elements})")
    return l * cfg.symbol_duration * cfg.speed + n * cfg.spacing


def element_positions(cfg: ArrayConfig) -> np.ndarray:
    """(L, N) grid of element y-coordinates over the whole pass."""
    l = np.arange(cfg.n_symbols)[:, None] * cfg.symbol_duration * cfg.speed
    n = np.arange(cfg.n_elements)[None, :] * cfg.spacing
    return l + n


def distance_field(cfg: ArrayConfig, scene: Scene) -> DistanceField:
    """Distances and axial offsets from every element slot to the target."""
    y_offsets = scene.target_y - element_positions(cfg)
    distances = np.hypot(scene.target_x, y_offsets)
    return DistanceField(distances=distances, y_offsets=y_offsets)


def platform_size(cfg: ArrayConfig) -> float:
    """Length of the path swept by the reference element: L*Ts*v."""
    return cfg.n_symbols * cfg.symbol_duration * cfg.speed


def array_size(cfg: ArrayConfig) -> float:
    """Aperture of the physical N-element ULA, counted as N*spacing."""
    return cfg.n_elements * cfg.spacing


def rayleigh_distance(aperture: float, wavelength: float) -> float:
    """Near-field boundary 2*aperture^2 / wavelength."""
    if not wavelength > 0:
        raise ValueError(f"wavelength must be > 0, got {wavelength}")
    if aperture < 0:
        raise ValueError(f"aperture must be >= 0, got {aperture}")
    return 2.0 * aperture * aperture / wavelength


def extended_array_positions(cfg: ArrayConfig) -> np.ndarray:
    """y-coordinates of the L-element stationary ULA spanning the platform.

    Element l of the extended array sits where element 0 of the moving
    array is during symbol l, i.e. l*Ts*v.
    """
    return np.arange(cfg.n_symbols) * (cfg.symbol_duration * cfg.speed)
