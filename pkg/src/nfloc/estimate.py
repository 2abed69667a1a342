"""Concentrated maximum-likelihood localization.

For a hypothesized target position the reflection coefficient has the
closed-form least-squares estimate

    b~ = sum_l s_l^H a_l* a_l^H r_l / sum_l ||a_l a_l^T s_l||^2,

and profiling out both b and the noise power leaves the concentrated
objective

    f~(x, y) = -LM (ln(pi/(LM)) + 1 + ln sum_l ||r_l - b~ a_l a_l^T s_l||^2)

whose maximizer is the ML position estimate. Since a_l a_l^T s_l =
(a_l^T s_l) a_l, the residual collapses to

    sum_l ||r_l||^2 - |num|^2 / den,
    num = sum_l (a_l^T s_l)* (a_l^H r_l),   den = sum_l |a_l^T s_l|^2 ||a_l||^2,

so a hypothesis costs two inner products per symbol. The grid search
evaluates hypotheses in vectorized chunks; stationary architectures with a
repeated transmit vector reduce further to a single inner product against
the symbol-summed observation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import steering_from_distances
from .geometry import ArrayConfig, Scene, element_positions, extended_array_positions
from .simulate import Observation, synthesize
from .streams import trial_seed
from .waveform import WaveformSet, iso_waveforms, sem_waveforms
from . import crb as crb_mod
from . import waveform as waveform_mod

RESIDUAL_FLOOR = 1e-30
REFINE_MIN_STEP = 1e-4

# cap on elements of the (hypotheses, L, N) work arrays per chunk
_CHUNK_ELEMENTS = 1 << 22


class DegenerateHypothesisError(ValueError):
    """Hypothesis produces zero transmit-steering overlap for every symbol."""


@dataclass(frozen=True)
class SearchRegion:
    """Rectangular search window; x_min must stay off the array axis."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not self.x_min > 0:
            raise ValueError(f"x_min must be > 0, got {self.x_min}")
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise ValueError("empty search region")


@dataclass(frozen=True)
class LikelihoodMap:
    """Concentrated log-likelihood sampled on a uniform grid.

    values[i, j] is the objective at (x_grid[i], y_grid[j]); argmax is the
    exact grid maximizer with ties broken toward smaller x, then smaller y.
    """

    x_grid: np.ndarray
    y_grid: np.ndarray
    values: np.ndarray
    argmax: tuple[float, float]
    b_at_argmax: complex
    resolution: float


@dataclass(frozen=True)
class EstimateResult:
    position: tuple[float, float]
    reflection: complex
    objective: float
    refined: bool


@dataclass(frozen=True)
class MonteCarloResult:
    rmse: float
    crb_rmse: float
    errors: np.ndarray
    estimates: list
    seeds: list


class _Evaluator:
    """Caches waveform/observation reductions for repeated hypothesis scoring."""

    def __init__(self, cfg: ArrayConfig, ws: WaveformSet, obs: Observation):
        if obs.per_symbol.shape != ws.symbols.shape:
            raise ValueError(
                f"observation shape {obs.per_symbol.shape} does not match "
                f"waveform shape {ws.symbols.shape}"
            )
        self.cfg = cfg
        self.arch = ws.architecture
        self.wavelength = ws.wavelength
        self.symbols = ws.symbols
        self.obs = obs.per_symbol
        self.total = self.obs.size
        self.power_sum = float(np.sum(np.abs(self.obs) ** 2))
        if self.arch == "moving":
            self.positions = element_positions(cfg)
        elif self.arch == "fixed":
            self.positions = np.arange(cfg.n_elements) * cfg.spacing
        elif self.arch == "extended":
            self.positions = extended_array_positions(cfg)
        else:
            raise ValueError(f"unknown architecture {ws.architecture!r}")
        if self.arch != "moving":
            self.constant_symbol = bool(np.all(self.symbols == self.symbols[0]))
            if self.constant_symbol:
                self.s0 = self.symbols[0]
                self.obs_sum = self.obs.sum(axis=0)
            else:
                # W = sum_l r_l s_l^H, C = sum_l s_l s_l^H
                self.w_mat = self.obs.T @ self.symbols.conj()
                self.c_mat = self.symbols.T @ self.symbols.conj()

    @staticmethod
    def _fast_steering(x_sq: np.ndarray, yoff: np.ndarray, wavelength: float):
        """Steering entries and squared magnitudes without complex exp."""
        d = np.sqrt(x_sq + yoff * yoff)
        phase = (-2.0 * np.pi / wavelength) * d
        amp = (wavelength / (4.0 * np.pi)) / d
        a = np.empty(d.shape, dtype=complex)
        np.cos(phase, out=a.real)
        np.sin(phase, out=a.imag)
        a.real *= amp
        a.imag *= amp
        return a, amp * amp

    def terms(self, xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """num and den of b~ for a batch of hypotheses (any broadcast shape)."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if self.arch == "moving":
            x_sq = (xs * xs)[..., None, None]
            yoff = ys[..., None, None] - self.positions
            a, mag2 = self._fast_steering(x_sq, yoff, self.wavelength)
            nu = np.sum(a * self.symbols, axis=-1)
            inner = np.sum(a.conj() * self.obs, axis=-1)
            anorm2 = np.sum(mag2, axis=-1)
            num = np.sum(nu.conj() * inner, axis=-1)
            den = np.sum((nu.real**2 + nu.imag**2) * anorm2, axis=-1)
            return num, den
        x_sq = (xs * xs)[..., None]
        yoff = ys[..., None] - self.positions
        a, mag2 = self._fast_steering(x_sq, yoff, self.wavelength)
        anorm2 = np.sum(mag2, axis=-1)
        n_sym = self.symbols.shape[0]
        if self.constant_symbol:
            nu = np.sum(a * self.s0, axis=-1)
            inner = np.sum(a.conj() * self.obs_sum, axis=-1)
            num = nu.conj() * inner
            den = n_sym * (nu.real**2 + nu.imag**2) * anorm2
            return num, den
        ac = a.conj()
        num = np.sum((ac @ self.w_mat) * ac, axis=-1)
        quad = np.sum((a @ self.c_mat) * ac, axis=-1).real
        den = anorm2 * quad
        return num, den

    def objective(self, xs, ys) -> np.ndarray:
        """Concentrated log-likelihood; -inf where the hypothesis is degenerate."""
        num, den = self.terms(xs, ys)
        with np.errstate(divide="ignore", invalid="ignore"):
            residual = self.power_sum - np.abs(num) ** 2 / den
        residual = np.where(den > 0.0, np.maximum(residual, RESIDUAL_FLOOR), np.nan)
        lm = float(self.total)
        with np.errstate(invalid="ignore"):
            values = -lm * (np.log(np.pi / lm) + 1.0 + np.log(residual))
        return np.where(np.isnan(values), -np.inf, values)

    def b_and_objective(self, x: float, y: float) -> tuple[complex, float]:
        num, den = self.terms(np.array([x]), np.array([y]))
        if not den[0] > 0.0:
            raise DegenerateHypothesisError(
                f"no transmit-steering overlap at hypothesis ({x}, {y})"
            )
        residual = max(self.power_sum - abs(num[0]) ** 2 / den[0], RESIDUAL_FLOOR)
        lm = float(self.total)
        value = -lm * (np.log(np.pi / lm) + 1.0 + np.log(residual))
        return complex(num[0] / den[0]), float(value)


def b_tilde(
    cfg: ArrayConfig, hypothesis: tuple[float, float], ws: WaveformSet, obs: Observation
) -> complex:
    """Least-squares reflection estimate at a hypothesized position."""
    x, y = hypothesis
    if not x > 0:
        raise DegenerateHypothesisError(f"hypothesis x must be > 0, got {x}")
    b, _ = _Evaluator(cfg, ws, obs).b_and_objective(x, y)
    return b


def concentrated_loglik(
    cfg: ArrayConfig, ws: WaveformSet, obs: Observation, hypothesis: tuple[float, float]
) -> float:
    """Concentrated log-likelihood at one hypothesis."""
    x, y = hypothesis
    if not x > 0:
        raise DegenerateHypothesisError(f"hypothesis x must be > 0, got {x}")
    _, value = _Evaluator(cfg, ws, obs).b_and_objective(x, y)
    return value


def _grid_axis(lo: float, hi: float, resolution: float) -> np.ndarray:
    count = int(np.floor((hi - lo) / resolution + 1e-9)) + 1
    return lo + resolution * np.arange(count)


def grid_search(
    cfg: ArrayConfig,
    ws: WaveformSet,
    obs: Observation,
    region: SearchRegion | tuple[float, float, float, float],
    resolution: float,
) -> LikelihoodMap:
    """Exhaustive concentrated-likelihood evaluation on a uniform 2D grid.

    Cells whose hypothesis is degenerate score -inf. Evaluation is chunked
    so memory stays bounded regardless of grid size.
    """
    if not isinstance(region, SearchRegion):
        region = SearchRegion(*region)
    if not resolution > 0:
        raise ValueError(f"resolution must be > 0, got {resolution}")
    x_grid = _grid_axis(region.x_min, region.x_max, resolution)
    y_grid = _grid_axis(region.y_min, region.y_max, resolution)
    if x_grid.size == 0 or y_grid.size == 0:
        raise ValueError("empty search grid")
    ev = _Evaluator(cfg, ws, obs)
    xx = np.repeat(x_grid, y_grid.size)
    yy = np.tile(y_grid, x_grid.size)
    per_hypothesis = ev.symbols.size if ev.arch == "moving" else ev.positions.size
    chunk = max(1, _CHUNK_ELEMENTS // max(per_hypothesis, 1))
    values = np.empty(xx.size)
    for start in range(0, xx.size, chunk):
        stop = min(start + chunk, xx.size)
        values[start:stop] = ev.objective(xx[start:stop], yy[start:stop])
    flat_idx = int(np.argmax(values))
    if not np.isfinite(values[flat_idx]):
        raise DegenerateHypothesisError("entire grid is degenerate")
    best = (float(xx[flat_idx]), float(yy[flat_idx]))
    b_best, _ = ev.b_and_objective(*best)
    return LikelihoodMap(
        x_grid=x_grid,
        y_grid=y_grid,
        values=values.reshape(x_grid.size, y_grid.size),
        argmax=best,
        b_at_argmax=b_best,
        resolution=float(resolution),
    )


def refine(
    lmap: LikelihoodMap, cfg: ArrayConfig, ws: WaveformSet, obs: Observation
) -> EstimateResult:
    """Compass pattern search from the grid argmax down to 1e-4 m steps.

    Only improving moves are accepted, so the refined objective never drops
    below the grid value; positions with x <= 0 are never proposed.
    """
    ev = _Evaluator(cfg, ws, obs)
    x, y = lmap.argmax
    _, current = ev.b_and_objective(x, y)
    step = lmap.resolution
    while step >= REFINE_MIN_STEP:
        cand = np.array(
            [(x + step, y), (x - step, y), (x, y + step), (x, y - step)]
        )
        ok = cand[:, 0] > 0
        if not np.any(ok):
            step /= 2.0
            continue
        vals = np.full(len(cand), -np.inf)
        vals[ok] = ev.objective(cand[ok, 0], cand[ok, 1])
        k = int(np.argmax(vals))
        if vals[k] > current:
            x, y = float(cand[k, 0]), float(cand[k, 1])
            current = float(vals[k])
        else:
            step /= 2.0
    b_final, objective = ev.b_and_objective(x, y)
    return EstimateResult(
        position=(x, y), reflection=b_final, objective=objective, refined=True
    )


def _default_region(scene: Scene, halfwidth: float, resolution: float) -> SearchRegion:
    x_lo = max(scene.target_x - halfwidth, min(scene.target_x / 2.0, resolution))
    return SearchRegion(
        x_min=x_lo,
        x_max=scene.target_x + halfwidth,
        y_min=scene.target_y - halfwidth,
        y_max=scene.target_y + halfwidth,
    )


def monte_carlo_rmse(
    cfg: ArrayConfig,
    scene: Scene,
    scheme: str = "sem",
    trials: int = 100,
    seed: int = 0,
    architecture: str = "moving",
    region: SearchRegion | None = None,
    resolution: float = 0.04,
    search_halfwidth: float = 0.4,
    noise: bool = True,
) -> MonteCarloResult:
    """Position RMSE over seeded noise trials, next to the CRB's sqrt.

    One waveform realization is drawn up front (relevant for the isotropic
    moving scheme) and held across trials; each trial re-draws noise from
    its own substream. The search window defaults to a box around the true
    position sized for high-SNR errors, then the pattern search refines
    below the grid resolution.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if scheme == "sem":
        ws = sem_waveforms(cfg, scene, architecture)
    elif scheme == "iso":
        ws = iso_waveforms(cfg, scene, architecture, seed)
    else:
        raise ValueError(f"scheme must be 'sem' or 'iso', got {scheme!r}")

    if architecture == "moving":
        report = crb_mod.crb_moving_closed(cfg, scene, ws)
    elif architecture == "fixed":
        spec = (
            waveform_mod.sem_fixed(cfg, scene)
            if scheme == "sem"
            else waveform_mod.iso_fixed(cfg, scene)
        )
        report = crb_mod.crb_fixed(cfg, scene, spec)
    else:
        spec = (
            waveform_mod.sem_extended(cfg, scene)
            if scheme == "sem"
            else waveform_mod.iso_extended(cfg, scene)
        )
        report = crb_mod.crb_extended(cfg, scene, spec)

    if region is None:
        region = _default_region(scene, search_halfwidth, resolution)

    errors = np.empty(trials)
    estimates = []
    seeds = []
    for t in range(trials):
        tseed = trial_seed(seed, t)
        obs = synthesize(cfg, scene, ws, tseed, noise=noise)
        lmap = grid_search(cfg, ws, obs, region, resolution)
        est = refine(lmap, cfg, ws, obs)
        errors[t] = np.hypot(
            est.position[0] - scene.target_x, est.position[1] - scene.target_y
        )
        estimates.append(est)
        seeds.append(tseed)
    rmse = float(np.sqrt(np.mean(errors**2)))
    return MonteCarloResult(
        rmse=rmse,
        crb_rmse=report.rmse_lower_bound,
        errors=errors,
        estimates=estimates,
        seeds=seeds,
    )
