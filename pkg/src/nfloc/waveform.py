"""Transmit waveforms and covariance matrices for the three architectures.

Two schemes are provided. Strongest-eigenmode (SEM) transmission points the
full power budget along the conjugate steering direction: the moving array
re-matches every symbol, the stationary arrays keep one fixed direction.
Isotropic transmission spreads power equally over elements, either as an
identity-scaled covariance (stationary arrays) or as i.i.d. circularly
symmetric Gaussian symbol vectors (moving array).

Complex Gaussian convention: real and imaginary parts are i.i.d.
N(0, P0/(2*M)) per element, giving per-element variance P0/M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import extended_steering_bundle, steering_bundle, steering_bundle_all
from .geometry import ArrayConfig, Scene
from .streams import WAVEFORM_TAG, symbol_stream

ARCHITECTURES = ("moving", "fixed", "extended")
SCHEMES = ("sem", "iso")

# above this many scalar products, sample_covariance falls back to a single
# matrix product instead of exactly-rounded per-entry accumulation
_EXACT_SUM_LIMIT = 1 << 23


@dataclass(frozen=True)
class WaveformSet:
    """Per-symbol transmit vectors.

    symbols      (L, M) complex, row l is the symbol-l transmit vector;
                 M = N for moving/fixed, M = L for the extended array
    scheme       "sem" or "iso"
    architecture "moving", "fixed", or "extended"
    wavelength   carrier wavelength in m (kept for estimator use)
    """

    symbols: np.ndarray
    scheme: str
    architecture: str
    wavelength: float


@dataclass(frozen=True)
class CovarianceSpec:
    """Hermitian PSD transmit covariance with trace <= P0.

    factor, when present, is a matrix Q with matrix = Q Q^H; rank-one
    constructions carry it so downstream consumers can skip the
    eigendecomposition.
    """

    matrix: np.ndarray
    scheme: str
    architecture: str
    factor: np.ndarray | None = None


def _check_architecture(architecture: str) -> None:
    if architecture not in ARCHITECTURES:
        raise ValueError(
            f"architecture must be one of {ARCHITECTURES}, got {architecture!r}"
        )


def sem_moving(cfg: ArrayConfig, scene: Scene) -> WaveformSet:
    """Per-symbol conjugate-matched vectors s_l = sqrt(P0) a_l* / ||a_l||."""
    a = steering_bundle_all(cfg, scene).a
    norms = np.linalg.norm(a, axis=1, keepdims=True)
    symbols = np.sqrt(scene.tx_power) * a.conj() / norms
    return WaveformSet(
        symbols=symbols,
        scheme="sem",
        architecture="moving",
        wavelength=scene.wavelength,
    )


def _rank_one_covariance(a: np.ndarray, tx_power: float) -> tuple[np.ndarray, np.ndarray]:
    q = np.sqrt(tx_power) * a.conj() / np.linalg.norm(a)
    return np.outer(q, q.conj()), q[:, None]


def sem_fixed(cfg: ArrayConfig, scene: Scene) -> CovarianceSpec:
    """Rank-one SEM covariance of the stationary N-element array."""
    a = steering_bundle(cfg, scene, 0).a
    matrix, factor = _rank_one_covariance(a, scene.tx_power)
    return CovarianceSpec(matrix=matrix, scheme="sem", architecture="fixed", factor=factor)


def sem_extended(cfg: ArrayConfig, scene: Scene) -> CovarianceSpec:
    """Rank-one SEM covariance of the L-element extended array."""
    a = extended_steering_bundle(cfg, scene).a
    matrix, factor = _rank_one_covariance(a, scene.tx_power)
    return CovarianceSpec(
        matrix=matrix, scheme="sem", architecture="extended", factor=factor
    )


def iso_fixed(cfg: ArrayConfig, scene: Scene) -> CovarianceSpec:
    """Identity covariance P0/N * I_N."""
    matrix = (scene.tx_power / cfg.n_elements) * np.eye(cfg.n_elements, dtype=complex)
    return CovarianceSpec(matrix=matrix, scheme="iso", architecture="fixed")


def iso_extended(cfg: ArrayConfig, scene: Scene) -> CovarianceSpec:
    """Identity covariance P0/L * I_L for the extended array."""
    matrix = (scene.tx_power / cfg.n_symbols) * np.eye(cfg.n_symbols, dtype=complex)
    return CovarianceSpec(matrix=matrix, scheme="iso", architecture="extended")


def iso_moving(cfg: ArrayConfig, scene: Scene, seed: int) -> WaveformSet:
    """I.i.d. CN(0, P0/N I_N) symbol vectors from per-symbol substreams."""
    n = cfg.n_elements
    scale = math.sqrt(scene.tx_power / (2.0 * n))
    symbols = np.empty((cfg.n_symbols, n), dtype=complex)
    for l in range(cfg.n_symbols):
        rng = symbol_stream(seed, WAVEFORM_TAG, l)
        z = rng.standard_normal(2 * n)
        symbols[l] = scale * (z[:n] + 1j * z[n:])
    return WaveformSet(
        symbols=symbols,
        scheme="iso",
        architecture="moving",
        wavelength=scene.wavelength,
    )


def sem_waveforms(cfg: ArrayConfig, scene: Scene, architecture: str) -> WaveformSet:
    """SEM symbol vectors for any architecture.

    Stationary architectures transmit the same conjugate-matched vector in
    every symbol, so their sample covariance equals the rank-one SEM
    covariance exactly.
    """
    _check_architecture(architecture)
    if architecture == "moving":
        return sem_moving(cfg, scene)
    if architecture == "fixed":
        a = steering_bundle(cfg, scene, 0).a
    else:
        a = extended_steering_bundle(cfg, scene).a
    q = np.sqrt(scene.tx_power) * a.conj() / np.linalg.norm(a)
    symbols = np.tile(q, (cfg.n_symbols, 1))
    return WaveformSet(
        symbols=symbols,
        scheme="sem",
        architecture=architecture,
        wavelength=scene.wavelength,
    )


def iso_waveforms(
    cfg: ArrayConfig, scene: Scene, architecture: str, seed: int
) -> WaveformSet:
    """Isotropic Gaussian symbol vectors for any architecture."""
    _check_architecture(architecture)
    if architecture == "moving":
        return iso_moving(cfg, scene, seed)
    m = cfg.n_elements if architecture == "fixed" else cfg.n_symbols
    scale = math.sqrt(scene.tx_power / (2.0 * m))
    symbols = np.empty((cfg.n_symbols, m), dtype=complex)
    for l in range(cfg.n_symbols):
        rng = symbol_stream(seed, WAVEFORM_TAG, l)
        z = rng.standard_normal(2 * m)
        symbols[l] = scale * (z[:m] + 1j * z[m:])
    return WaveformSet(
        symbols=symbols,
        scheme="iso",
        architecture=architecture,
        wavelength=scene.wavelength,
    )


def sample_covariance(ws: WaveformSet) -> CovarianceSpec:
    """R = (1/L) sum_l s_l s_l^H.

    For moderately sized sets every entry is accumulated with exactly
    rounded summation, so the result is independent of symbol order
    (reordering symbols cannot perturb even the last bit). Large sets fall
    back to a single matrix product.
    """
    s = ws.symbols
    if s.size == 0:
        raise ValueError("waveform set is empty")
    n_sym, m = s.shape
    if n_sym * m * m <= _EXACT_SUM_LIMIT:
        prods = s[:, :, None] * s[:, None, :].conj()
        matrix = np.empty((m, m), dtype=complex)
        for i in range(m):
            for j in range(m):
                column = prods[:, i, j]
                matrix[i, j] = complex(
                    math.fsum(column.real), math.fsum(column.imag)
                )
        matrix /= n_sym
    else:
        matrix = (s.T @ s.conj()) / n_sym
    return CovarianceSpec(
        matrix=matrix, scheme=ws.scheme, architecture=ws.architecture
    )
