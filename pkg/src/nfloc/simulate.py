"""Noisy received-signal synthesis for Monte-Carlo studies.

Each symbol observes r_l = b * a_l (a_l^T s_l) + z_l with z_l drawn
CN(0, sigma^2 I). Noise for symbol l comes from the (seed, NOISE_TAG, l)
substream, so generating symbols in parallel or out of order cannot change
the realization. Observations can be dumped to a small self-describing
binary file (JSON header line, then interleaved little-endian float64
real/imag pairs) for estimator regression tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .channel import extended_steering_bundle, steering_bundle, steering_bundle_all
from .geometry import ArrayConfig, Scene
from .streams import NOISE_TAG, symbol_stream
from .waveform import WaveformSet

_MAGIC = "nfloc-observation-v1"


@dataclass(frozen=True)
class Observation:
    """Received signal as an (L, M) array plus the seed that produced it."""

    per_symbol: np.ndarray
    seed: int

    @property
    def stacked(self) -> np.ndarray:
        """All symbols concatenated into one (L*M,) vector, row-major."""
        return self.per_symbol.reshape(-1)


def _receive_steering(cfg: ArrayConfig, scene: Scene, ws: WaveformSet) -> np.ndarray:
    """(L, M) steering rows matching the waveform architecture."""
    if ws.architecture == "moving":
        return steering_bundle_all(cfg, scene).a
    if ws.architecture == "fixed":
        a = steering_bundle(cfg, scene, 0).a
    else:
        a = extended_steering_bundle(cfg, scene).a
    return np.broadcast_to(a, (cfg.n_symbols, a.shape[0]))


def _noiseless(cfg: ArrayConfig, scene: Scene, ws: WaveformSet) -> np.ndarray:
    a = _receive_steering(cfg, scene, ws)
    if ws.symbols.shape != a.shape:
        raise ValueError(
            f"waveform shape {ws.symbols.shape} does not match steering "
            f"shape {a.shape} for architecture {ws.architecture!r}"
        )
    nu = np.sum(a * ws.symbols, axis=-1)
    return scene.reflection * nu[:, None] * a


def mean_vector(cfg: ArrayConfig, scene: Scene, ws: WaveformSet) -> np.ndarray:
    """Stacked noiseless mean of the observation, shape (L*M,)."""
    return _noiseless(cfg, scene, ws).reshape(-1)


def synthesize(
    cfg: ArrayConfig,
    scene: Scene,
    ws: WaveformSet,
    seed: int,
    noise: bool = True,
) -> Observation:
    """Draw one observation; noise=False returns the exact mean.

    The noise flag exists so oracle tests can compare against the mean
    without pushing sigma^2 to zero.
    """
    signal = _noiseless(cfg, scene, ws)
    if not noise:
        return Observation(per_symbol=signal, seed=seed)
    m = signal.shape[1]
    scale = np.sqrt(scene.noise_power / 2.0)
    z = np.empty_like(signal)
    for l in range(signal.shape[0]):
        rng = symbol_stream(seed, NOISE_TAG, l)
        g = rng.standard_normal(2 * m)
        z[l] = scale * (g[:m] + 1j * g[m:])
    return Observation(per_symbol=signal + z, seed=seed)


def save_observation(
    path, obs: Observation, cfg: ArrayConfig, scene: Scene, ws: WaveformSet
) -> None:
    """Write an observation with enough metadata to reproduce it."""
    header = {
        "format": _MAGIC,
        "seed": obs.seed,
        "shape": list(obs.per_symbol.shape),
        "architecture": ws.architecture,
        "scheme": ws.scheme,
        "cfg": {
            "n_elements": cfg.n_elements,
            "spacing": cfg.spacing,
            "speed": cfg.speed,
            "symbol_duration": cfg.symbol_duration,
            "n_symbols": cfg.n_symbols,
        },
        "scene": {
            "target_x": scene.target_x,
            "target_y": scene.target_y,
            "reflection_re": scene.reflection.real,
            "reflection_im": scene.reflection.imag,
            "noise_power": scene.noise_power,
            "tx_power": scene.tx_power,
            "wavelength": scene.wavelength,
        },
    }
    flat = obs.per_symbol.reshape(-1)
    interleaved = np.empty(2 * flat.size, dtype="<f8")
    interleaved[0::2] = flat.real
    interleaved[1::2] = flat.imag
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8"))
        fh.write(b"\n")
        fh.write(interleaved.tobytes())


def load_observation(path) -> tuple[Observation, dict]:
    """Read an observation written by save_observation."""
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    header = json.loads(header_line.decode("utf-8"))
    if header.get("format") != _MAGIC:
        raise ValueError(f"not an observation file: format {header.get('format')!r}")
    interleaved = np.frombuffer(payload, dtype="<f8")
    values = interleaved[0::2] + 1j * interleaved[1::2]
    shape = tuple(header["shape"])
    obs = Observation(per_symbol=values.reshape(shape), seed=int(header["seed"]))
    return obs, header
