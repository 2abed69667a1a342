"""Spherical-wavefront steering vectors and their spatial derivatives.

Each entry carries the exact free-space amplitude lambda/(4*pi*d) and the
round-trip-free phase exp(-j*2*pi*d/lambda). Derivatives with respect to
the target coordinate follow from the chain rule through the distance,

    da/dp = a * (-1/d - j*2*pi/lambda) * dd/dp,   p in {x, y},

with dd/dx = x/d and dd/dy = (y - element_y)/d. Batch helpers return
(L, N) arrays covering the whole pass so callers can cache a full sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    ArrayConfig,
    DistanceField,
    Scene,
    distance_field,
    extended_array_positions,
)


@dataclass(frozen=True)
class SteeringBundle:
    """Steering vector plus its two coordinate derivatives.

    Arrays share one shape: (N,) for a single symbol, (L, N) for a full
    sweep, (L,) for the extended stationary array.
    """

    a: np.ndarray
    da_dx: np.ndarray
    da_dy: np.ndarray


@dataclass(frozen=True)
class ResponsePair:
    """Rank-one two-way response A = a a^T and its coordinate derivatives."""

    A: np.ndarray
    dA_dx: np.ndarray
    dA_dy: np.ndarray


def steering_from_distances(distances: np.ndarray, wavelength: float) -> np.ndarray:
    """Steering entries for arbitrary distance arrays (any shape)."""
    d = np.asarray(distances, dtype=float)
    amplitude = wavelength / (4.0 * np.pi * d)
    phase = (-2.0 * np.pi / wavelength) * d
    return amplitude * np.exp(1j * phase)


def _bundle_from_geometry(
    distances: np.ndarray,
    y_offsets: np.ndarray,
    target_x: float,
    wavelength: float,
) -> SteeringBundle:
    a = steering_from_distances(distances, wavelength)
    # common factor a * (-1/d - j*2*pi/lambda) / d, times dd/dp * d
    scale = a * (-1.0 / distances - 2j * np.pi / wavelength) / distances
    return SteeringBundle(a=a, da_dx=scale * target_x, da_dy=scale * y_offsets)


def steering_bundle_all(cfg: ArrayConfig, scene: Scene) -> SteeringBundle:
    """(L, N) steering vectors and derivatives for every symbol at once."""
    field = distance_field(cfg, scene)
    return _bundle_from_geometry(
        field.distances, field.y_offsets, scene.target_x, scene.wavelength
    )


def steering_bundle(cfg: ArrayConfig, scene: Scene, l: int) -> SteeringBundle:
    """Steering vector and derivatives for one symbol, shape (N,)."""
    if not 0 <= l < cfg.n_symbols:
        raise IndexError(f"symbol index {l} outside [0, {cfg.n_symbols})")
    field = distance_field(cfg, scene)
    return _bundle_from_geometry(
        field.distances[l], field.y_offsets[l], scene.target_x, scene.wavelength
    )


def steering(cfg: ArrayConfig, scene: Scene, l: int) -> np.ndarray:
    """Steering vector of the moving array at symbol l, shape (N,)."""
    return steering_bundle(cfg, scene, l).a


def steering_derivative(
    cfg: ArrayConfig, scene: Scene, l: int, axis: str
) -> np.ndarray:
    """Derivative of the symbol-l steering vector w.r.t. target x or y."""
    bundle = steering_bundle(cfg, scene, l)
    if axis == "x":
        return bundle.da_dx
    if axis == "y":
        return bundle.da_dy
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")


def response_pair(cfg: ArrayConfig, scene: Scene, l: int) -> ResponsePair:
    """A_l = a a^T with dA/dp = da_p a^T + a da_p^T (complex-symmetric)."""
    b = steering_bundle(cfg, scene, l)
    A = np.outer(b.a, b.a)
    dA_dx = np.outer(b.da_dx, b.a) + np.outer(b.a, b.da_dx)
    dA_dy = np.outer(b.da_dy, b.a) + np.outer(b.a, b.da_dy)
    return ResponsePair(A=A, dA_dx=dA_dx, dA_dy=dA_dy)


def extended_steering_bundle(cfg: ArrayConfig, scene: Scene) -> SteeringBundle:
    """Steering and derivatives of the L-element stationary array, shape (L,)."""
    positions = extended_array_positions(cfg)
    y_offsets = scene.target_y - positions
    distances = np.hypot(scene.target_x, y_offsets)
    return _bundle_from_geometry(
        distances, y_offsets, scene.target_x, scene.wavelength
    )


def extended_steering(cfg: ArrayConfig, scene: Scene) -> np.ndarray:
    """Steering vector of the L-element stationary array, shape (L,)."""
    return extended_steering_bundle(cfg, scene).a


def extended_distance_field(cfg: ArrayConfig, scene: Scene) -> DistanceField:
    """Distances/offsets of the extended array, shapes (L,)."""
    positions = extended_array_positions(cfg)
    y_offsets = scene.target_y - positions
    distances = np.hypot(scene.target_x, y_offsets)
    return DistanceField(distances=distances, y_offsets=y_offsets)
