"""Compare Fredholm numerics with the large-gap expansion.

The pipeline solves for the spectral data, evaluates ln F(r) on a grid of
scalings, fits the single free constant C and then looks at what is left:
how fast the residual decays and whether the theta term accounts for the
oscillations.

Grids are kept in a window where double precision can resolve ln F.  The
Nystrom factorisation loses accuracy as the largest eigenvalue of the
discretised kernel approaches 1, which happens roughly when ``|c| r**3``
reaches 60 to 70; see :data:`MAX_SAFE_CUBIC`.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .asympt import IntervalConfig, nu_vector, predicted_logF, solve_system
from .errors import AirygapError, AliasingError, DomainError, InsufficientDataError
from .fredholm import gap_probability_scaled
from .riemann import SurfaceData
from .specialfn import theta

__all__ = [
    "VerificationReport",
    "OscillationDiagnostics",
    "fit_constant",
    "fit_decay_exponent",
    "decay_exponent_loglog",
    "check_oscillation",
    "run_verification",
    "default_r_grid",
    "safe_r_window",
    "largest_safe_r",
    "resolve_threads",
    "CSV_HEADER",
]

#: Default verification window, as bounds on |c| r**3.
SAFE_WINDOW = (1.5, 17.0)
#: Hard upper bound on |c| r**3 for any grid accepted without ``allow_unsafe``.
MAX_SAFE_CUBIC = 50.0
#: fit_constant refuses data with |ln F| above this.
MAX_ABS_LOGF = 500.0
CSV_HEADER = "r,logF_num,err_estimate,predicted_no_C,residual"
MIN_POINTS = 4


def _annotate(exc: AirygapError, stage: str) -> AirygapError:
    exc.stage = stage
    exc.args = (f"[{stage}] {exc.args[0] if exc.args else exc}",) + tuple(exc.args[1:])
    return exc


# ------------------------------------------------------------------ windows


def safe_r_window(sd: SurfaceData, window=SAFE_WINDOW) -> tuple:
    """(r_min, r_max) with ``|c| r**3`` spanning ``window``."""
    a = abs(sd.c)
    return (window[0] / a) ** (1.0 / 3.0), (window[1] / a) ** (1.0 / 3.0)


def largest_safe_r(sd: SurfaceData) -> float:
    return (MAX_SAFE_CUBIC / abs(sd.c)) ** (1.0 / 3.0)


def default_r_grid(sd: SurfaceData, n: int = 8) -> np.ndarray:
    lo, hi = safe_r_window(sd)
    return np.linspace(lo, hi, n)


def resolve_threads(requested: int | None = None) -> int:
    """Worker count: ``requested`` (or the CPU count) capped by AIRYGAP_THREADS."""
    n = requested if requested is not None else (os.cpu_count() or 1)
    env = os.environ.get("AIRYGAP_THREADS", "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise DomainError(f"AIRYGAP_THREADS must be a positive integer, got {env!r}") from None
        if cap < 1:
            raise DomainError(f"AIRYGAP_THREADS must be a positive integer, got {env!r}")
        n = min(n, cap)
    return max(1, int(n))


# ------------------------------------------------------------------ fitting


def _as_vectors(*arrays):
    out = [np.asarray(a, dtype=float).ravel() for a in arrays]
    if len({a.size for a in out}) != 1:
        raise DomainError("input vectors must have equal length")
    return out


def fit_constant(r_grid, logF_num, predicted_no_C):
    """Fit C as the r**3-weighted mean of ``logF_num - predicted_no_C``.

    Returns ``(C, residuals)``.  Large r gets the most weight because the
    error term is smallest there.
    """
    r, L, P = _as_vectors(r_grid, logF_num, predicted_no_C)
    if r.size < MIN_POINTS:
        raise InsufficientDataError(f"need at least {MIN_POINTS} grid points, got {r.size}")
    if not (np.all(np.isfinite(L)) and np.all(np.isfinite(P))):
        raise DomainError("non-finite values in fit input")
    if np.max(np.abs(L)) > MAX_ABS_LOGF:
        raise DomainError(f"|ln F| exceeds {MAX_ABS_LOGF}; grid is outside the safe window")
    w = r**3
    d = L - P
    C = float(np.sum(w * d) / np.sum(w))
    return C, d - C


def decay_exponent_loglog(r_grid, residuals) -> float:
    """Slope of ln|residual| against ln r on the upper half of the grid."""
    r, res = _as_vectors(r_grid, residuals)
    half = r.size // 2
    rr, dd = r[half:], np.abs(res[half:])
    keep = dd > 0
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(rr[keep]), np.log(dd[keep]), 1)[0])


def _projection_sse(p, r, d, phases):
    cols = [np.ones_like(r), r**p]
    for ph in phases:
        cols += [r**p * np.cos(ph), r**p * np.sin(ph)]
    X = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(X, d, rcond=None)
    return float(np.sum((X @ coef - d) ** 2))


def fit_decay_exponent(r_grid, offsets, nu=None, p_range=(-4.0, 0.0)) -> float:
    """Exponent p of the error term by variable projection.

    ``offsets`` are ``ln F - predicted_no_C``.  They are modelled as
    ``C + r**p (a0 + sum_j a_j cos(2 pi nu_j) + b_j sin(2 pi nu_j))``; for each
    trial p the linear coefficients come from least squares and p minimises
    the remaining squared error.  The oscillatory columns capture the
    theta-modulated part of the error, which a plain log-log slope of
    ``|residual|`` cannot separate from the decay.  Columns are dropped when
    the grid is too short to determine them.
    """
    r, d = _as_vectors(r_grid, offsets)
    if r.size < MIN_POINTS:
        raise InsufficientDataError(f"need at least {MIN_POINTS} grid points, got {r.size}")
    phases = []
    if nu is not None:
        nu = np.asarray(nu, dtype=float).reshape(r.size, -1)
        phases = [2.0 * np.pi * nu[:, j] for j in range(nu.shape[1])]
    while phases and r.size < 2 + 2 * len(phases) + 2:
        phases.pop()
    grid = np.linspace(p_range[0], p_range[1], 401)
    sse = [_projection_sse(p, r, d, phases) for p in grid]
    i = int(np.argmin(sse))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if hi <= lo:
        return float(grid[i])
    best = minimize_scalar(_projection_sse, bounds=(lo, hi), args=(r, d, phases), method="bounded",
                           options={"xatol": 1e-6})
    return float(best.x) if best.fun <= sse[i] else float(grid[i])


# -------------------------------------------------------------- oscillation


@dataclass(frozen=True)
class OscillationDiagnostics:
    """How much of the residual oscillation the theta term explains.

    ``period_ratio`` is the measured period in ``t = r**1.5`` divided by the
    nearest ``2 pi / Omega_j``.
    """

    max_dev_with_theta: float
    max_dev_without_theta: float
    measured_period: float
    expected_period: float
    period_ratio: float
    theta_amplitude: float
    n_points: int

    @property
    def theta_reduces_residual(self) -> bool:
        return self.max_dev_with_theta < self.max_dev_without_theta


def _log_theta_values(sd, r, tol=1e-14):
    ev = sd.theta_evaluator(tol)
    return np.array([math.log(theta(ev, nu_vector(sd, v)).real) for v in r])


def _dominant_frequency(t, y, w_lo, w_hi):
    def sse(w):
        X = np.column_stack([np.ones_like(t), 1.0 / t, np.cos(w * t), np.sin(w * t)])
        coef, *_ = np.linalg.lstsq(X, y, rcond=None)
        return float(np.sum((X @ coef - y) ** 2))

    grid = np.linspace(w_lo, w_hi, 4000)
    vals = [sse(w) for w in grid]
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    best = minimize_scalar(sse, bounds=(a, b), method="bounded", options={"xatol": 1e-10})
    return float(best.x) if best.fun <= vals[i] else float(grid[i])


def check_oscillation(sd: SurfaceData, r_grid, residual_without_theta) -> OscillationDiagnostics:
    """Check the theta term against ``ln F - c r^3 + (3g/8) ln r - C``.

    Parameters
    ----------
    sd : SurfaceData
    r_grid : array_like
        Increasing grid; spacing must stay below ``pi / (3 Omega_max sqrt(r_max))``.
    residual_without_theta : array_like
        The sequence above, which should track ``ln theta(nu(r))``.

    Raises
    ------
    AliasingError
        The grid cannot resolve the fastest oscillation.
    """
    r, s = _as_vectors(r_grid, residual_without_theta)
    if r.size < MIN_POINTS:
        raise InsufficientDataError(f"need at least {MIN_POINTS} grid points, got {r.size}")
    if np.any(np.diff(r) <= 0):
        raise DomainError("r_grid must be strictly increasing")
    om = np.asarray(sd.Omega, dtype=float)
    limit = math.pi / (3.0 * float(om.max()) * math.sqrt(r[-1]))
    spacing = float(np.max(np.diff(r)))
    if spacing >= limit:
        raise AliasingError(f"grid spacing {spacing:.4g} must be below {limit:.4g} to resolve the oscillation")

    lt = _log_theta_values(sd, r)
    dev_with = float(np.max(np.abs(s - lt)))
    shift, _ = fit_constant(r, s, np.zeros_like(s))
    dev_without = float(np.max(np.abs(s - shift)))

    t = r**1.5
    dt = float(np.max(np.diff(t)))
    span = float(t[-1] - t[0])
    w_lo = max(0.2 * float(om.min()), 2.0 * math.pi / span)
    w_hi = min(3.0 * float(om.max()), 0.95 * math.pi / dt)
    if w_hi <= w_lo:
        raise InsufficientDataError("grid spans less than one oscillation period")
    w = _dominant_frequency(t, s, w_lo, w_hi)
    measured = 2.0 * math.pi / w
    expected_all = 2.0 * math.pi / om
    expected = float(expected_all[np.argmin(np.abs(np.log(measured / expected_all)))])
    return OscillationDiagnostics(
        max_dev_with_theta=dev_with,
        max_dev_without_theta=dev_without,
        measured_period=measured,
        expected_period=expected,
        period_ratio=measured / expected,
        theta_amplitude=float(0.5 * (lt.max() - lt.min())),
        n_points=int(r.size),
    )


# ------------------------------------------------------------------- report


def _floats(v):
    return tuple(float(x) for x in v)


@dataclass(frozen=True)
class VerificationReport:
    """Result of :func:`run_verification`.

    Vectors are tuples so that reports compare field for field.  ``residuals``
    equals ``logF_num - predicted_no_C - C_fit``.  ``partial`` marks a sweep
    that stopped early; such reports carry NaN for the fitted quantities.
    """

    cfg: IntervalConfig
    r_grid: tuple
    logF_num: tuple
    err_estimate: tuple
    predicted_no_C: tuple
    C_fit: float
    residuals: tuple
    decay_exponent_fit: float
    max_abs_residual: float
    order: int = 64
    decay_exponent_loglog: float = float("nan")
    max_abs_residual_without_theta: float = float("nan")
    oscillation: OscillationDiagnostics | None = None
    surface: dict = field(default_factory=dict)
    notes: tuple = ()
    partial: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cfg"] = {"g": self.cfg.g, "x": list(self.cfg.x)}
        for k in ("r_grid", "logF_num", "err_estimate", "predicted_no_C", "residuals", "notes"):
            d[k] = list(d[k])
        return d

    def to_json(self, indent: int | None = 2) -> str:
        # repr-based float output is the shortest string that round-trips exactly
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        d = dict(d)
        d["cfg"] = IntervalConfig(int(d["cfg"]["g"]), tuple(d["cfg"]["x"]))
        for k in ("r_grid", "logF_num", "err_estimate", "predicted_no_C", "residuals"):
            d[k] = _floats(d[k])
        d["notes"] = tuple(d.get("notes", ()))
        if d.get("oscillation") is not None:
            d["oscillation"] = OscillationDiagnostics(**d["oscillation"])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for row in zip(self.r_grid, self.logF_num, self.err_estimate, self.predicted_no_C, self.residuals):
            lines.append(",".join(format(v, ".17g") for v in row))
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        ratio = self.oscillation.period_ratio if self.oscillation else float("nan")
        return (
            f"C_fit={self.C_fit:.10g} max_abs_residual={self.max_abs_residual:.4g} "
            f"decay_exponent={self.decay_exponent_fit:.4g} period_ratio={ratio:.6g}"
            + (" partial=true" if self.partial else "")
        )


def _sweep(cfg, r, order, threads):
    def one(v):
        try:
            return gap_probability_scaled(cfg, float(v), order), None
        except AirygapError as exc:
            return None, exc

    n = resolve_threads(threads)
    if n == 1 or r.size == 1:
        return [one(v) for v in r]
    with ThreadPoolExecutor(max_workers=min(n, r.size)) as pool:
        return list(pool.map(one, r))  # map preserves grid order


def _surface_summary(sd):
    return {
        "x0": float(sd.x0),
        "c": float(sd.c),
        "Omega": [float(v) for v in sd.Omega],
        "tau_imag": [[float(v) for v in row] for row in np.asarray(sd.tau).imag],
    }


def _oscillation_grid(sd, r_min, r_max, minimum=32):
    limit = math.pi / (3.0 * float(np.max(sd.Omega)) * math.sqrt(r_max))
    n = max(minimum, int(math.ceil((r_max - r_min) / (0.5 * limit))) + 1)
    return np.linspace(r_min, r_max, n)


def run_verification(
    cfg: IntervalConfig,
    r_grid=None,
    order: int = 64,
    *,
    n_points: int = 8,
    oscillation: bool = True,
    threads: int | None = None,
    allow_unsafe: bool = False,
    sd: SurfaceData | None = None,
    theta_tol: float = 1e-14,
) -> VerificationReport:
    """Run the full comparison for one configuration.

    With ``r_grid=None`` an ``n_points`` grid spanning the default window is
    used.  Errors from any stage are re-raised with ``exc.stage`` set and the
    stage name prefixed to the message; a failing Fredholm sweep also
    attaches ``exc.partial_report`` holding the points that did succeed.
    """
    stage = "solve"
    try:
        if sd is None:
            sd = solve_system(cfg)
        stage = "grid"
        if r_grid is None:
            r = default_r_grid(sd, n_points)
        else:
            r = np.asarray(r_grid, dtype=float).ravel()
        if r.size < MIN_POINTS:
            raise InsufficientDataError(f"need at least {MIN_POINTS} grid points, got {r.size}")
        if not np.all(np.isfinite(r)) or r[0] <= 0 or np.any(np.diff(r) <= 0):
            raise DomainError("r_grid must be positive, finite and strictly increasing")
        if not allow_unsafe and abs(sd.c) * r[-1] ** 3 > MAX_SAFE_CUBIC * (1 + 1e-12):
            raise DomainError(
                f"r_max = {r[-1]:.6g} exceeds the largest safe r {largest_safe_r(sd):.6g} "
                f"(|c| r^3 <= {MAX_SAFE_CUBIC})"
            )

        stage = "expansion"
        pred = np.asarray(predicted_logF(sd, r, theta_tol=theta_tol), dtype=float)

        stage = "fredholm"
        results = _sweep(cfg, r, order, threads)
        failures = [(i, exc) for i, (_, exc) in enumerate(results) if exc is not None]
        if failures:
            ok = [i for i, (res, _) in enumerate(results) if res is not None]
            nan = (float("nan"),) * len(ok)
            partial = VerificationReport(
                cfg=cfg,
                r_grid=_floats(r[ok]),
                logF_num=tuple(results[i][0].log_det for i in ok),
                err_estimate=tuple(results[i][0].err_estimate for i in ok),
                predicted_no_C=_floats(pred[ok]),
                C_fit=float("nan"),
                residuals=nan,
                decay_exponent_fit=float("nan"),
                max_abs_residual=float("nan"),
                order=int(order),
                surface=_surface_summary(sd),
                notes=(f"sweep failed at r = {r[failures[0][0]]!r}",),
                partial=True,
            )
            exc = failures[0][1]
            exc.partial_report = partial
            raise exc
        logF = np.array([res.log_det for res, _ in results])
        errs = np.array([res.err_estimate for res, _ in results])

        stage = "fit"
        C, residuals = fit_constant(r, logF, pred)
        lt = _log_theta_values(sd, r, theta_tol)
        _, res_no_theta = fit_constant(r, logF, pred - lt)

        stage = "decay"
        nu = np.array([nu_vector(sd, v) for v in r])
        p = fit_decay_exponent(r, logF - pred, nu)
        p_loglog = decay_exponent_loglog(r, residuals)

        osc = None
        if oscillation:
            stage = "oscillation"
            dense = _oscillation_grid(sd, float(r[0]), float(r[-1]))
            dense_res = _sweep(cfg, dense, order, threads)
            bad = [exc for _, exc in dense_res if exc is not None]
            if bad:
                raise bad[0]
            dense_logF = np.array([res.log_det for res, _ in dense_res])
            g = cfg.g
            seq = dense_logF - sd.c * dense**3 + 0.375 * g * np.log(dense) - C
            osc = check_oscillation(sd, dense, seq)
    except AirygapError as exc:
        raise _annotate(exc, stage)

    notes = []
    if cfg.g >= 2:
        notes.append("Diophantine and rational-independence conditions on Omega are not checked for g >= 2")
    if osc is not None:
        t_span = float(dense[-1] ** 1.5 - dense[0] ** 1.5)
        if t_span < 2.0 * osc.expected_period:
            notes.append(
                f"the window covers {t_span / osc.expected_period:.2f} oscillation periods; "
                "the measured period is not reliable below 2"
            )
    lo, hi = -4.0, 0.0
    if min(abs(p - lo), abs(p - hi)) < 1e-3:
        notes.append("decay exponent fit hit the edge of its search range")
    if sd.ambiguous_roots:
        notes.append(f"several admissible x0 found {list(sd.ambiguous_roots)}; the smallest was used")
    return VerificationReport(
        cfg=cfg,
        r_grid=_floats(r),
        logF_num=_floats(logF),
        err_estimate=_floats(errs),
        predicted_no_C=_floats(pred),
        C_fit=C,
        residuals=_floats(residuals),
        decay_exponent_fit=p,
        max_abs_residual=float(np.max(np.abs(residuals))),
        order=int(order),
        decay_exponent_loglog=p_loglog,
        max_abs_residual_without_theta=float(np.max(np.abs(res_no_theta))),
        oscillation=osc,
        surface=_surface_summary(sd),
        notes=tuple(notes),
    )
