"""Scenario configuration and the four reference experiments.

Configs come from a flat key=value text file plus command-line overrides;
unknown or duplicate keys are rejected with line context. Every CSV starts
with a commented preamble recording the tool version, the fully resolved
configuration, and the master seed, so re-running the same config
reproduces the file byte for byte.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields

import numpy as np

from .crb import (
    DegenerateGeometryError,
    crb_extended,
    crb_fixed,
    crb_moving_closed,
)
from .estimate import SearchRegion, grid_search, monte_carlo_rmse, refine
from .geometry import ArrayConfig, Scene, array_size, platform_size, rayleigh_distance
from .simulate import synthesize
from .streams import trial_seed
from .waveform import (
    iso_extended,
    iso_fixed,
    iso_moving,
    sem_extended,
    sem_fixed,
    sem_moving,
    sem_waveforms,
)


class ConfigError(ValueError):
    """Malformed configuration input."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


DEFAULT_SWEEP_VALUES = {
    "power": [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0],
    "symbols": [100, 200, 500, 1000, 2000, 5000],
    "antennas": [4, 8, 16, 32, 64, 128],
}

ALL_ARCHITECTURES = ("moving", "fixed", "extended")


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved scenario: array, scene, scheme selection, run controls."""

    x: float = 10.0
    y: float = 0.0
    b_re: float = 1.0
    b_im: float = 0.0
    N: int = 16
    delta: float = 0.025
    wavelength: float = 0.05
    v: float = 5.0
    L: int = 1000
    Ts: float = 1e-3
    P0_dbm: float = 30.0
    sigma2_dbm: float = -70.0
    scheme: str = "sem"
    arch: tuple[str, ...] = ALL_ARCHITECTURES
    axis: str = "power"
    values: tuple[float, ...] = ()
    seed: int = 0
    trials: int = 100
    realizations: int = 10
    region: tuple[float, float, float, float] = (5.0, 15.0, -5.0, 5.0)
    resolution: float = 0.04
    out: str = ""

    def array_config(self, n_symbols: int | None = None, n_elements: int | None = None) -> ArrayConfig:
        return ArrayConfig(
            n_elements=n_elements if n_elements is not None else self.N,
            spacing=self.delta,
            speed=self.v,
            symbol_duration=self.Ts,
            n_symbols=n_symbols if n_symbols is not None else self.L,
        )

    def scene(self, tx_power: float | None = None) -> Scene:
        return Scene(
            target_x=self.x,
            target_y=self.y,
            reflection=complex(self.b_re, self.b_im),
            noise_power=dbm_to_watts(self.sigma2_dbm),
            tx_power=tx_power if tx_power is not None else dbm_to_watts(self.P0_dbm),
            wavelength=self.wavelength,
        )


_INT_KEYS = {"N", "L", "seed", "trials", "realizations"}
_FLOAT_KEYS = {
    "x", "y", "b_re", "b_im", "delta", "wavelength", "v", "Ts",
    "P0_dbm", "sigma2_dbm", "resolution",
}
_STR_KEYS = {"scheme", "axis", "out"}
_LIST_KEYS = {"arch", "values", "region"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _LIST_KEYS


def _parse_value(key: str, raw: str, where: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key == "arch":
            return tuple(part.strip() for part in raw.split(",") if part.strip())
        if key == "values":
            return tuple(float(part) for part in raw.split(",") if part.strip())
        if key == "region":
            parts = [float(part) for part in raw.split(",") if part.strip()]
            if len(parts) != 4:
                raise ValueError("region needs x_min,x_max,y_min,y_max")
            return tuple(parts)
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {raw!r} ({exc})") from exc


def _validate(cfg: ExperimentConfig) -> ExperimentConfig:
    try:
        cfg.array_config()
        cfg.scene()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.scheme not in ("sem", "iso"):
        raise ConfigError(f"scheme must be 'sem' or 'iso', got {cfg.scheme!r}")
    for arch in cfg.arch:
        if arch not in ALL_ARCHITECTURES:
            raise ConfigError(f"unknown architecture {arch!r}")
    if cfg.axis not in DEFAULT_SWEEP_VALUES:
        raise ConfigError(
            f"axis must be one of {tuple(DEFAULT_SWEEP_VALUES)}, got {cfg.axis!r}"
        )
    if cfg.trials < 1:
        raise ConfigError(f"trials must be >= 1, got {cfg.trials}")
    if cfg.realizations < 1:
        raise ConfigError(f"realizations must be >= 1, got {cfg.realizations}")
    if not cfg.resolution > 0:
        raise ConfigError(f"resolution must be > 0, got {cfg.resolution}")
    try:
        SearchRegion(*cfg.region)
    except ValueError as exc:
        raise ConfigError(f"region: {exc}") from exc
    return cfg


def parse_config(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Build a validated config from an optional file plus overrides.

    The file holds 'key = value' lines; '#' starts a comment. Override
    values (from CLI flags) win over file values.
    """
    settings: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
        for lineno, line in enumerate(lines, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {text!r}")
            key, raw = (part.strip() for part in text.split("=", 1))
            if key not in _ALL_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in settings:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            settings[key] = _parse_value(key, raw, f"{path}:{lineno}")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _ALL_KEYS:
            raise ConfigError(f"unknown option {key!r}")
        if isinstance(value, str):
            value = _parse_value(key, value, f"option {key!r}")
        settings[key] = value
    return _validate(ExperimentConfig(**settings))


def _preamble(cfg: ExperimentConfig, extra: dict | None = None) -> list[str]:
    from . import __version__

    lines = [f"# nfloc {__version__}"]
    for field in fields(cfg):
        value = getattr(cfg, field.name)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"# {field.name} = {value}")
    for key, value in (extra or {}).items():
        lines.append(f"# {key} = {value}")
    return lines


def _write_csv(path_or_buffer, preamble: list[str], header: list[str], rows: list[list]) -> None:
    def emit(fh):
        for line in preamble:
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)

    if isinstance(path_or_buffer, io.TextIOBase):
        emit(path_or_buffer)
    else:
        with open(path_or_buffer, "w", encoding="utf-8", newline="") as fh:
            emit(fh)


def _fmt(value: float) -> str:
    return format(value, ".12g")


def _crb_report(cfg: ExperimentConfig, arch: str, scheme: str, scene: Scene,
                acfg: ArrayConfig, realization_seed: int):
    if arch == "moving":
        if scheme == "sem":
            return crb_moving_closed(acfg, scene, sem_moving(acfg, scene))
        return crb_moving_closed(
            acfg, scene, iso_moving(acfg, scene, realization_seed)
        )
    if arch == "fixed":
        spec = sem_fixed(acfg, scene) if scheme == "sem" else iso_fixed(acfg, scene)
        return crb_fixed(acfg, scene, spec)
    spec = sem_extended(acfg, scene) if scheme == "sem" else iso_extended(acfg, scene)
    return crb_extended(acfg, scene, spec)


def run_crb_sweep(cfg: ExperimentConfig, out=None) -> list[list]:
    """CRB versus power, symbol count, or antenna count.

    One row per (axis value, architecture, scheme); isotropic moving rows
    average the bound over cfg.realizations waveform draws and carry the
    spread. Degenerate points are tagged in the error column instead of
    aborting the sweep.
    """
    values = list(cfg.values) if cfg.values else DEFAULT_SWEEP_VALUES[cfg.axis]
    schemes = [cfg.scheme] if cfg.scheme else ["sem", "iso"]
    header = [
        "axis", "axis_value", "architecture", "scheme", "crb_m2", "rmse_lb_m",
        "alpha", "g_xx", "g_yy", "crb_mean_m2", "crb_std_m2", "error",
    ]
    rows = []
    for value in values:
        if cfg.axis == "power":
            acfg = cfg.array_config()
            scene = cfg.scene(tx_power=dbm_to_watts(float(value)))
        elif cfg.axis == "symbols":
            acfg = cfg.array_config(n_symbols=int(value))
            scene = cfg.scene()
        else:
            acfg = cfg.array_config(n_elements=int(value))
            scene = cfg.scene()
        for arch in cfg.arch:
            for scheme in schemes:
                row = [cfg.axis, _fmt(float(value)), arch, scheme]
                try:
                    if arch == "moving" and scheme == "iso":
                        crbs, first = [], None
                        for k in range(cfg.realizations):
                            rep = _crb_report(
                                cfg, arch, scheme, scene, acfg, trial_seed(cfg.seed, k)
                            )
                            crbs.append(rep.crb_position)
                            first = first or rep
                        mean = float(np.mean(crbs))
                        std = float(np.std(crbs))
                        row += [
                            _fmt(mean), _fmt(math.sqrt(mean)),
                            _fmt(first.gterms.alpha), _fmt(first.gterms.g_xx),
                            _fmt(first.gterms.g_yy), _fmt(mean), _fmt(std), "",
                        ]
                    else:
                        rep = _crb_report(cfg, arch, scheme, scene, acfg, cfg.seed)
                        row += [
                            _fmt(rep.crb_position), _fmt(rep.rmse_lower_bound),
                            _fmt(rep.gterms.alpha), _fmt(rep.gterms.g_xx),
                            _fmt(rep.gterms.g_yy), "", "", "",
                        ]
                except DegenerateGeometryError as exc:
                    row += ["", "", "", "", "", "", "", f"degenerate: {exc}"]
                rows.append(row)
    if out is not None:
        extra = {
            "rayleigh_fixed_m": _fmt(
                rayleigh_distance(array_size(cfg.array_config()), cfg.wavelength)
            ),
            "rayleigh_extended_m": _fmt(
                rayleigh_distance(platform_size(cfg.array_config()), cfg.wavelength)
            ),
        }
        _write_csv(out, _preamble(cfg, extra), header, rows)
    return rows


def run_likelihood_map(cfg: ExperimentConfig, architecture: str, out=None) -> dict:
    """Concentrated log-likelihood map for one architecture.

    Returns a summary dict with the grid argmax and the refined estimate;
    the CSV holds one (x, y, loglik) row per grid cell.
    """
    acfg = cfg.array_config()
    scene = cfg.scene()
    if cfg.scheme == "sem":
        ws = sem_waveforms(acfg, scene, architecture)
    else:
        from .waveform import iso_waveforms

        ws = iso_waveforms(acfg, scene, architecture, cfg.seed)
    obs = synthesize(acfg, scene, ws, cfg.seed)
    lmap = grid_search(acfg, ws, obs, SearchRegion(*cfg.region), cfg.resolution)
    est = refine(lmap, acfg, ws, obs)
    summary = {
        "architecture": architecture,
        "scheme": cfg.scheme,
        "argmax_x": lmap.argmax[0],
        "argmax_y": lmap.argmax[1],
        "refined_x": est.position[0],
        "refined_y": est.position[1],
        "objective": est.objective,
        "b_re": est.reflection.real,
        "b_im": est.reflection.imag,
    }
    if out is not None:
        extra = {"architecture": architecture}
        extra.update({k: _fmt(v) if isinstance(v, float) else v for k, v in summary.items() if k != "architecture"})
        rows = []
        for i, xv in enumerate(lmap.x_grid):
            for j, yv in enumerate(lmap.y_grid):
                rows.append([_fmt(float(xv)), _fmt(float(yv)), _fmt(float(lmap.values[i, j]))])
        _write_csv(out, _preamble(cfg, extra), ["x", "y", "loglik"], rows)
    return summary


def run_monte_carlo(cfg: ExperimentConfig, architecture: str = "moving", out=None) -> dict:
    """Monte-Carlo RMSE against the CRB for one architecture."""
    acfg = cfg.array_config()
    scene = cfg.scene()
    result = monte_carlo_rmse(
        acfg,
        scene,
        scheme=cfg.scheme,
        trials=cfg.trials,
        seed=cfg.seed,
        architecture=architecture,
    )
    header = ["trial", "seed", "x_hat", "y_hat", "err_m"]
    rows = []
    for t, (est, tseed) in enumerate(zip(result.estimates, result.seeds)):
        rows.append([
            str(t), str(tseed), _fmt(est.position[0]), _fmt(est.position[1]),
            _fmt(float(result.errors[t])),
        ])
    mean_x = float(np.mean([e.position[0] for e in result.estimates]))
    mean_y = float(np.mean([e.position[1] for e in result.estimates]))
    rows.append(["aggregate", str(cfg.seed), _fmt(mean_x), _fmt(mean_y), _fmt(result.rmse)])
    if out is not None:
        extra = {
            "architecture": architecture,
            "rmse_m": _fmt(result.rmse),
            "crb_rmse_m": _fmt(result.crb_rmse),
        }
        _write_csv(out, _preamble(cfg, extra), header, rows)
    return {
        "architecture": architecture,
        "rmse": result.rmse,
        "crb_rmse": result.crb_rmse,
        "trials": cfg.trials,
    }


def run_ratio_check(cfg: ExperimentConfig, multiples: tuple[float, ...] = (), out=None) -> dict:
    """Moving-over-extended SEM CRB ratio versus the two candidate limits.

    Places the target at the given multiples of the platform size along the
    platform's perpendicular bisector and reports which closed-form limit,
    L^2/(4 N^2) or L^2/(4 N), the numerical ratio approaches.
    """
    acfg = cfg.array_config()
    size = platform_size(acfg)
    if size <= 0:
        raise ConfigError("ratio check needs a moving platform (v > 0)")
    mults = list(multiples) if multiples else [10.0, 30.0, 100.0]
    l_sq = acfg.n_symbols**2
    cand_sq = l_sq / (4.0 * acfg.n_elements**2)
    cand_lin = l_sq / (4.0 * acfg.n_elements)
    rows = []
    final_ratio = None
    for mult in mults:
        scene = Scene(
            target_x=mult * size,
            target_y=size / 2.0,
            reflection=complex(cfg.b_re, cfg.b_im),
            noise_power=dbm_to_watts(cfg.sigma2_dbm),
            tx_power=dbm_to_watts(cfg.P0_dbm),
            wavelength=cfg.wavelength,
        )
        moving = crb_moving_closed(acfg, scene, sem_moving(acfg, scene))
        extended = crb_extended(acfg, scene, sem_extended(acfg, scene))
        ratio = moving.crb_position / extended.crb_position
        final_ratio = ratio
        rows.append([
            _fmt(mult), _fmt(scene.target_x), _fmt(moving.crb_position),
            _fmt(extended.crb_position), _fmt(ratio),
            _fmt(abs(ratio - cand_sq) / cand_sq),
            _fmt(abs(ratio - cand_lin) / cand_lin),
        ])
    dev_sq = abs(final_ratio - cand_sq) / cand_sq
    dev_lin = abs(final_ratio - cand_lin) / cand_lin
    if dev_sq <= dev_lin:
        matched = "L^2/(4N^2)"
        deviation = dev_sq
    else:
        matched = "L^2/(4N)"
        deviation = dev_lin
    summary = {
        "ratio": final_ratio,
        "candidate_sq": cand_sq,
        "candidate_lin": cand_lin,
        "matched": matched,
        "deviation": deviation,
    }
    if out is not None:
        extra = {
            "candidate_L2_over_4N2": _fmt(cand_sq),
            "candidate_L2_over_4N": _fmt(cand_lin),
            "matched_expression": matched,
            "matched_deviation": _fmt(deviation),
        }
        header = [
            "multiple", "x_m", "crb_moving_m2", "crb_extended_m2", "ratio",
            "dev_L2_over_4N2", "dev_L2_over_4N",
        ]
        _write_csv(out, _preamble(cfg, extra), header, rows)
    return summary
