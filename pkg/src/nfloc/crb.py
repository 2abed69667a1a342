"""Fisher information and position CRBs for the three array architectures.

The unknown parameter vector is (x, y, Re b, Im b). With noise covariance
known, the Fisher information reduces to weighted sums of inner products of
the per-symbol mean derivatives; everything here is expressed through the
rank-one response applied to a transmit vector,

    w   = A s        = (a^T s) a,
    u_p = dA/dp s    = (a^T s) da_p + (da_p^T s) a,

so no N x N matrices are formed. The position CRB is the trace of the
leading 2x2 block of the inverse information matrix; the closed form uses
the Schur complement over the reflection-coefficient block, which yields
the G-terms and the offset parameter alpha reported in CrbReport.

Stationary-array bounds depend on the transmit signal only through its
covariance R: R is expanded into weighted pseudo-symbols (its carried
rank-one factor, the standard basis for identity-scaled R, or eigenvectors
otherwise) and fed through the same accumulator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import SteeringBundle, extended_steering_bundle, steering_bundle, steering_bundle_all
from .geometry import ArrayConfig, Scene
from .waveform import CovarianceSpec, WaveformSet

CONDITION_LIMIT = 1e12


class SingularFimError(ValueError):
    """Fisher information matrix is singular or numerically unusable."""

    def __init__(self, condition: float):
        super().__init__(
            f"Fisher information matrix condition number {condition:.3e} "
            f"exceeds {CONDITION_LIMIT:.0e}"
        )
        self.condition = condition


class DegenerateGeometryError(ValueError):
    """Geometry carries no usable position information (CRB undefined)."""


@dataclass(frozen=True)
class Fim:
    """4x4 real symmetric Fisher information over (x, y, Re b, Im b)."""

    matrix: np.ndarray


@dataclass(frozen=True)
class GTerms:
    """Schur-complement information terms for the position block.

    alpha = Re{g_xy}^2 / (g_xx * g_yy) measures the target's offset from
    the array's perpendicular bisector; alpha = 0 marks the symmetric case.
    """

    g_xx: float
    g_yy: float
    g_xy: complex
    alpha: float


@dataclass(frozen=True)
class CrbReport:
    """Position CRB in m^2 with its diagnostic G-terms."""

    crb_position: float
    gterms: GTerms
    architecture: str
    scheme: str

    @property
    def rmse_lower_bound(self) -> float:
        """sqrt(CRB) in meters."""
        return float(np.sqrt(self.crb_position))


@dataclass(frozen=True)
class _InfoSums:
    """Weighted accumulations sum_k w_k <u_p, u_q>, <u_p, w>, ||w||^2."""

    t_xx: float
    t_yy: float
    t_xy: complex
    v_x: complex
    v_y: complex
    w0: float


def _accumulate(bundle: SteeringBundle, symbols: np.ndarray, weights=None) -> _InfoSums:
    """Accumulate information sums over symbols (or pseudo-symbols).

    bundle arrays and symbols are (K, M); weights is (K,) or None for
    unit weights. Works equally for per-symbol steering (moving array)
    and a constant steering row broadcast against K symbols.
    """
    a, ax, ay = bundle.a, bundle.da_dx, bundle.da_dy
    if a.ndim == 1:
        a = a[None, :]
        ax = ax[None, :]
        ay = ay[None, :]
    if symbols.ndim == 1:
        symbols = symbols[None, :]
    if symbols.shape[-1] != a.shape[-1]:
        raise ValueError(
            f"symbol dimension {symbols.shape[-1]} does not match "
            f"steering dimension {a.shape[-1]}"
        )
    nu = np.sum(np.broadcast_to(a, symbols.shape) * symbols, axis=-1)
    nu_x = np.sum(np.broadcast_to(ax, symbols.shape) * symbols, axis=-1)
    nu_y = np.sum(np.broadcast_to(ay, symbols.shape) * symbols, axis=-1)
    u_x = nu[:, None] * ax + nu_x[:, None] * a
    u_y = nu[:, None] * ay + nu_y[:, None] * a
    w = nu[:, None] * a

    if weights is None:
        wgt = np.ones(symbols.shape[0])
    else:
        wgt = np.asarray(weights, dtype=float)

    def dot(u, v):
        return complex(np.sum(wgt * np.sum(u.conj() * v, axis=-1)))

    return _InfoSums(
        t_xx=dot(u_x, u_x).real,
        t_yy=dot(u_y, u_y).real,
        t_xy=dot(u_x, u_y),
        v_x=dot(u_x, w),
        v_y=dot(u_y, w),
        w0=dot(w, w).real,
    )


def _identity_sums(bundle: SteeringBundle, scale: float) -> _InfoSums:
    """Closed-form sums for covariance scale * I (basis pseudo-symbols)."""
    a, ax, ay = bundle.a, bundle.da_dx, bundle.da_dy
    a2 = float(np.vdot(a, a).real)
    cx = complex(np.vdot(a, ax))  # a^H da_x
    cy = complex(np.vdot(a, ay))
    xx = complex(np.vdot(ax, ax))
    yy = complex(np.vdot(ay, ay))
    xy = complex(np.vdot(ax, ay))
    return _InfoSums(
        t_xx=2.0 * scale * (a2 * xx.real + abs(cx) ** 2),
        t_yy=2.0 * scale * (a2 * yy.real + abs(cy) ** 2),
        t_xy=2.0 * scale * (a2 * xy + np.conj(cx) * cy),
        v_x=2.0 * scale * a2 * np.conj(cx),
        v_y=2.0 * scale * a2 * np.conj(cy),
        w0=scale * a2 * a2,
    )


def _covariance_sums(bundle: SteeringBundle, spec: CovarianceSpec) -> _InfoSums:
    """Expand a covariance into weighted pseudo-symbols and accumulate."""
    r = spec.matrix
    if spec.factor is not None:
        return _accumulate(bundle, spec.factor.T.copy())
    diag = np.diagonal(r)
    off = r - np.diag(diag)
    if not np.any(off) and np.ptp(diag.real) == 0.0 and not np.any(diag.imag):
        return _identity_sums(bundle, float(diag.real[0]))
    herm_err = np.linalg.norm(r - r.conj().T) / max(np.linalg.norm(r), 1e-300)
    if herm_err > 1e-10:
        raise ValueError(f"covariance is not Hermitian (relative error {herm_err:.2e})")
    eigvals, eigvecs = np.linalg.eigh(r)
    keep = eigvals > max(1e-14 * max(eigvals.max(), 0.0), 0.0)
    return _accumulate(bundle, eigvecs[:, keep].T.copy(), weights=eigvals[keep])


def _gterms(sums: _InfoSums) -> GTerms:
    if sums.w0 <= 0.0:
        raise DegenerateGeometryError("transmit signal carries no energy")
    g_xx = sums.t_xx - abs(sums.v_x) ** 2 / sums.w0
    g_yy = sums.t_yy - abs(sums.v_y) ** 2 / sums.w0
    g_xy = sums.t_xy - sums.v_x * np.conj(sums.v_y) / sums.w0
    denom = g_xx * g_yy
    alpha = g_xy.real**2 / denom if denom > 0.0 else float("nan")
    return GTerms(g_xx=g_xx, g_yy=g_yy, g_xy=g_xy, alpha=alpha)


def _report(gterms: GTerms, scene: Scene, prefactor: float, architecture: str, scheme: str) -> CrbReport:
    det = gterms.g_xx * gterms.g_yy - gterms.g_xy.real**2
    if det <= 0.0 or gterms.g_xx <= 0.0 or gterms.g_yy <= 0.0:
        raise DegenerateGeometryError(
            f"position information is singular (g_xx={gterms.g_xx:.3e}, "
            f"g_yy={gterms.g_yy:.3e}, det={det:.3e})"
        )
    b2 = abs(scene.reflection) ** 2
    crb = scene.noise_power / (2.0 * b2 * prefactor) * (gterms.g_xx + gterms.g_yy) / det
    return CrbReport(
        crb_position=float(crb),
        gterms=gterms,
        architecture=architecture,
        scheme=scheme,
    )


def fim_moving(cfg: ArrayConfig, scene: Scene, ws: WaveformSet) -> Fim:
    """Exact 4x4 Fisher information of the moving array for a waveform set.

    Entries follow the Re/-Im block pattern over (x, y, Re b, Im b); the
    (Re b, Im b) cross entries vanish identically and the two reflection
    diagonals coincide.
    """
    if ws.symbols.shape != (cfg.n_symbols, cfg.n_elements):
        raise ValueError(
            f"waveform set shape {ws.symbols.shape} does not match "
            f"(L, N) = ({cfg.n_symbols}, {cfg.n_elements})"
        )
    sums = _accumulate(steering_bundle_all(cfg, scene), ws.symbols)
    b = scene.reflection
    s2 = scene.noise_power
    b2 = abs(b) ** 2
    f_xx = b2 / s2 * sums.t_xx
    f_yy = b2 / s2 * sums.t_yy
    f_xy = b2 / s2 * sums.t_xy
    f_xb = np.conj(b) / s2 * sums.v_x
    f_yb = np.conj(b) / s2 * sums.v_y
    f_bb = sums.w0 / s2
    matrix = 2.0 * np.array(
        [
            [f_xx, f_xy.real, f_xb.real, -f_xb.imag],
            [f_xy.real, f_yy, f_yb.real, -f_yb.imag],
            [f_xb.real, f_yb.real, f_bb, 0.0],
            [-f_xb.imag, -f_yb.imag, 0.0, f_bb],
        ]
    )
    return Fim(matrix=matrix)


def crb_from_fim(fim: Fim, method: str = "schur") -> float:
    """Position CRB: trace of the leading 2x2 block of the inverse FIM.

    "schur" eliminates the reflection block first; "full" inverts the
    Jacobi-equilibrated 4x4 directly (cross-check path). Near-singular
    matrices (condition number above 1e12) raise SingularFimError.
    """
    f = fim.matrix
    condition = float(np.linalg.cond(f))
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise SingularFimError(condition)
    if method == "schur":
        f_aa = f[:2, :2]
        f_ab = f[:2, 2:]
        f_bb = f[2:, 2:]
        schur = f_aa - f_ab @ np.linalg.solve(f_bb, f_ab.T)
        det = schur[0, 0] * schur[1, 1] - schur[0, 1] * schur[1, 0]
        if det <= 0.0:
            raise SingularFimError(condition)
        return float((schur[0, 0] + schur[1, 1]) / det)
    if method == "full":
        scale = np.sqrt(np.abs(np.diagonal(f)))
        scale[scale == 0.0] = 1.0
        balanced = f / scale[:, None] / scale[None, :]
        inv = np.linalg.inv(balanced)
        return float(inv[0, 0] / scale[0] ** 2 + inv[1, 1] / scale[1] ** 2)
    raise ValueError(f"method must be 'schur' or 'full', got {method!r}")


def crb_moving_closed(cfg: ArrayConfig, scene: Scene, ws: WaveformSet) -> CrbReport:
    """Closed-form moving-array position CRB from the G-terms."""
    if ws.symbols.shape != (cfg.n_symbols, cfg.n_elements):
        raise ValueError(
            f"waveform set shape {ws.symbols.shape} does not match "
            f"(L, N) = ({cfg.n_symbols}, {cfg.n_elements})"
        )
    sums = _accumulate(steering_bundle_all(cfg, scene), ws.symbols)
    return _report(_gterms(sums), scene, 1.0, "moving", ws.scheme)


def crb_fixed(cfg: ArrayConfig, scene: Scene, spec: CovarianceSpec) -> CrbReport:
    """Stationary N-element array CRB; depends on the waveform only via R."""
    n = cfg.n_elements
    if spec.matrix.shape != (n, n):
        raise ValueError(
            f"covariance shape {spec.matrix.shape} does not match N = {n}"
        )
    sums = _covariance_sums(steering_bundle(cfg, scene, 0), spec)
    return _report(_gterms(sums), scene, float(cfg.n_symbols), "fixed", spec.scheme)


def crb_extended(cfg: ArrayConfig, scene: Scene, spec: CovarianceSpec) -> CrbReport:
    """Extended L-element stationary array CRB over the platform span."""
    m = cfg.n_symbols
    if spec.matrix.shape != (m, m):
        raise ValueError(
            f"covariance shape {spec.matrix.shape} does not match L = {m}"
        )
    sums = _covariance_sums(extended_steering_bundle(cfg, scene), spec)
    return _report(_gterms(sums), scene, float(m), "extended", spec.scheme)


def _moment_pair_sum(e: np.ndarray, g1: np.ndarray, g2: np.ndarray) -> float:
    """sum_{i<j} (e_i g1_j - e_j g1_i)(e_i g2_j - e_j g2_i), moment form."""
    return float(np.sum(e * e) * np.sum(g1 * g2) - np.sum(e * g1) * np.sum(e * g2))


def gterms_sem_approx(cfg: ArrayConfig, scene: Scene, architecture: str) -> GTerms:
    """Distance-only closed-form G-terms under SEM transmission.

    Valid when element-to-target distances dwarf the physical array so the
    per-element distances within one symbol can be collapsed; no steering
    vectors or waveforms are constructed. The cross term g_xy uses the same
    pair-difference structure as the diagonal terms.

    The moving-array collapse references each symbol's subarray midpoint;
    referencing an edge element instead leaves a bias that does not decay
    with range (the pair sums cancel to fourth order, so a common
    half-aperture offset survives them).
    """
    p0 = scene.tx_power
    lam = scene.wavelength
    x = scene.target_x
    if architecture == "fixed":
        positions = np.arange(cfg.n_elements) * cfg.spacing
    elif architecture in ("extended", "moving"):
        positions = np.arange(cfg.n_symbols) * (cfg.symbol_duration * cfg.speed)
        if architecture == "moving":
            positions = positions + (cfg.n_elements - 1) * cfg.spacing / 2.0
    else:
        raise ValueError(
            f"architecture must be one of ('moving', 'fixed', 'extended'), "
            f"got {architecture!r}"
        )
    yoff = scene.target_y - positions
    d = np.hypot(x, yoff)

    if architecture in ("fixed", "extended"):
        e = 1.0 / d
        gx = x / d**2
        gy = yoff / d**2
        pref = p0 * lam**2 / (64.0 * np.pi**2)
    else:
        e = 1.0 / d**2
        gx = x / d**3
        gy = yoff / d**3
        pref = (
            cfg.n_elements**2
            * p0
            * lam**2
            / (16.0 * np.pi**2)
            / float(np.sum(1.0 / d**4))
        )
    g_xx = pref * _moment_pair_sum(e, gx, gx)
    g_yy = pref * _moment_pair_sum(e, gy, gy)
    g_xy = pref * _moment_pair_sum(e, gx, gy)
    denom = g_xx * g_yy
    alpha = g_xy**2 / denom if denom > 0.0 else float("nan")
    return GTerms(g_xx=g_xx, g_yy=g_yy, g_xy=complex(g_xy), alpha=alpha)


def crb_sem_approx(cfg: ArrayConfig, scene: Scene, architecture: str) -> CrbReport:
    """Closed-form SEM position CRB from the distance-only G-terms."""
    gterms = gterms_sem_approx(cfg, scene, architecture)
    if gterms.g_xx <= 0.0 or gterms.g_yy <= 0.0:
        raise DegenerateGeometryError(
            f"approximate G-terms are degenerate (g_xx={gterms.g_xx:.3e}, "
            f"g_yy={gterms.g_yy:.3e})"
        )
    prefactor = 1.0 if architecture == "moving" else float(cfg.n_symbols)
    b2 = abs(scene.reflection) ** 2
    crb = (
        scene.noise_power
        / (2.0 * b2 * prefactor * (1.0 - gterms.alpha))
        * (1.0 / gterms.g_xx + 1.0 / gterms.g_yy)
    )
    return CrbReport(
        crb_position=float(crb),
        gterms=gterms,
        architecture=architecture,
        scheme="sem",
    )


def asymptotic_ratio(cfg: ArrayConfig) -> float:
    """Far-target limit of CRB_moving / CRB_extended: L^2 / (4 N^2)."""
    return cfg.n_symbols**2 / (4.0 * cfg.n_elements**2)
