"""Spectral data and the large-gap expansion for a union of intervals.

For intervals ``(x_{2i}, x_{2i-1})`` with ``x1 > x2 > ... > x_{2g}`` the
extra branch point ``x0`` is the root of ``q(x0) = 0`` where ``q`` is the
monic-like polynomial whose lower coefficients make ``q/sqrt(R)`` integrate to
zero over every gap.  The expansion reads

    ln F(r) ~ c r**3 - (3g/8) ln r + ln theta(nu(r)) + C,
    nu_j(r) = -Omega_j r**(3/2) / (2 pi).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    AmbiguousSolutionError,
    DegenerateConfigurationError,
    DomainError,
    InadmissibleConfigError,
    NoSolutionError,
    QuadratureError,
    ThetaEvaluationError,
)
from .riemann import (
    DEGENERACY_RTOL,
    BranchPoints,
    SurfaceData,
    _moments,
    _omega,
    a_cycle_matrix,
    cut_integral,
    genus1_c0,
    period_matrix,
)
from .specialfn import ellint_E, ellint_K, theta

__all__ = [
    "IntervalConfig",
    "ExpansionTerms",
    "Admissibility",
    "solve_x0_g1",
    "solve_x0_g1_elliptic",
    "omega_g1_closed",
    "tau_g1_closed",
    "solve_system",
    "leading_coeff",
    "leading_coeff_g1_closed",
    "nu_vector",
    "predicted_logF",
    "expansion_terms",
    "is_admissible",
]

SCAN_POINTS = 256
RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class IntervalConfig:
    """Endpoints ``x = (x1, ..., x_{2g})`` of ``g`` disjoint intervals.

    Interval ``i`` (1-based) is ``(x_{2i}, x_{2i-1})``; the tuple must be
    strictly decreasing.
    """

    g: int
    x: tuple

    def __post_init__(self):
        if isinstance(self.g, bool) or not isinstance(self.g, (int, np.integer)) or self.g < 1:
            raise DomainError(f"g must be a positive integer, got {self.g!r}")
        try:
            x = tuple(float(v) for v in self.x)
        except (TypeError, ValueError) as exc:
            raise DomainError(f"endpoints must be numbers: {exc}") from None
        object.__setattr__(self, "g", int(self.g))
        object.__setattr__(self, "x", x)
        if len(x) != 2 * self.g:
            raise DomainError(f"expected {2 * self.g} endpoints for g={self.g}, got {len(x)}")
        if not all(math.isfinite(v) for v in x):
            raise DomainError("endpoints must be finite")
        if any(b >= a for a, b in zip(x, x[1:])):
            raise DomainError("endpoints must be strictly decreasing (x1 > x2 > ...)")
        gaps = [a - b for a, b in zip(x, x[1:])]
        if min(gaps) < DEGENERACY_RTOL * self.scale:
            raise DegenerateConfigurationError("two endpoints within 1e-8 of each other (relative)")

    @property
    def scale(self) -> float:
        return max(abs(v) for v in self.x)

    @property
    def intervals(self) -> list:
        """[(x_{2i}, x_{2i-1})] as (left, right) pairs."""
        return [(self.x[2 * i + 1], self.x[2 * i]) for i in range(self.g)]

    def scaled(self, r: float) -> list:
        return [(r * a, r * b) for a, b in self.intervals]

    @classmethod
    def from_endpoints(cls, x) -> "IntervalConfig":
        x = tuple(x)
        if len(x) % 2:
            raise DomainError("an even number of endpoints is required")
        return cls(len(x) // 2, x)


@dataclass(frozen=True)
class ExpansionTerms:
    """Pieces of the predicted ln F(r), without the constant C."""

    r: float
    cubic: float
    log_term: float
    log_theta: float
    nu: tuple
    C: float | None = None

    @property
    def predicted_no_C(self) -> float:
        return self.cubic + self.log_term + self.log_theta

    @property
    def predicted(self) -> float:
        if self.C is None:
            raise DomainError("no constant C attached")
        return self.predicted_no_C + self.C


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    criterion: str
    detail: dict = field(default_factory=dict)

    def __bool__(self):
        return self.admissible


# ---------------------------------------------------------------- genus one


def _x0_bracket_g1(x1, x2):
    if x1 < 0.0:
        return 0.0, x1 - x2
    return x1, x1 - x2


def _g1_condition(x, x1, x2):
    """int_{x2}^{x1} sqrt(x - s) (s + (x - x1 - x2)/2) / sqrt((x1 - s)(s - x2)) ds.

    With ``s = x1 - u**2`` this becomes
    ``2 int_0^a sqrt(d + u**2) (x1 + shift - u**2) / sqrt(a**2 - u**2) du``
    where ``a**2 = x1 - x2`` and ``d = x - x1``.  The factor
    ``sqrt(d + u**2)`` varies on the scale ``sqrt(d)`` near ``u = 0``, so that
    end is covered by panels growing geometrically from ``sqrt(d)``; the
    square-root endpoint at ``u = a`` goes to a Gauss-Jacobi rule.
    """
    a = math.sqrt(x1 - x2)
    d = max(x - x1, 0.0)
    top = x1 + 0.5 * (x - x1 - x2)

    def smooth(u):
        return 2.0 * np.sqrt(d + u * u) * (top - u * u) / np.sqrt(a + u)

    total = cut_integral(smooth, 0.5 * a, a, weight="right", order=16).value
    edges = [0.0]
    if d > 0.0:
        step = math.sqrt(d)
        while step < 0.5 * a:
            edges.append(step)
            step *= 4.0
    edges.append(0.5 * a)
    for lo, hi in zip(edges, edges[1:]):
        total += cut_integral(lambda u: smooth(u) / np.sqrt(a - u), lo, hi, weight="none", order=16).value
    return total


def _check_g1_admissible(x1, x2):
    if not x1 > x2:
        raise DomainError("need x1 > x2")
    if not (x1 < 0.0 or x2 < -2.0 * x1):
        raise InadmissibleConfigError(
            f"(x_1, x_2) = ({x1}, {x2}) is not admissible: need x_1 < 0, or x_1 >= 0 and x_2 < -2x_1"
        )


def solve_x0_g1(x1: float, x2: float) -> float:
    """Branch point x0 for one interval (x2, x1) by direct quadrature.

    Solves the vanishing of the single gap integral of ``q/sqrt(R)`` written
    as an integral over (x2, x1) with ``x0`` as a parameter.
    """
    _check_g1_admissible(x1, x2)
    lo, hi = _x0_bracket_g1(x1, x2)
    scale = max(abs(x1), abs(x2))
    flo = _g1_condition(lo, x1, x2)
    fhi = _g1_condition(hi, x1, x2)
    if flo * fhi > 0:
        raise NoSolutionError(f"no sign change of the genus-1 condition on [{lo}, {hi}]")
    return brentq(_g1_condition, lo, hi, args=(x1, x2), xtol=1e-15 * scale, rtol=4 * np.finfo(float).eps)


def _g1_elliptic_condition(x, x1, x2):
    # (x + x1 + x2) E(k) + 2 (x - x1) K(k), k^2 = (x1 - x2)/(x - x2)
    k = math.sqrt((x1 - x2) / (x - x2))
    return (x + x1 + x2) * ellint_E(k) + 2.0 * (x - x1) * ellint_K(k)


def solve_x0_g1_elliptic(x1: float, x2: float) -> float:
    """Same x0 as :func:`solve_x0_g1` from the complete-elliptic form.

    The condition is ``E(k)/K(k) = -2 (x0 - x1)/(x0 + x1 + x2)``.  Serves as
    an independent route for cross-checking.
    """
    _check_g1_admissible(x1, x2)
    lo, hi = _x0_bracket_g1(x1, x2)
    scale = max(abs(x1), abs(x2))
    lo = max(lo, x1 + 1e-12 * scale)  # K diverges at x0 = x1
    return brentq(_g1_elliptic_condition, lo, hi, args=(x1, x2), xtol=1e-15 * scale, rtol=4 * np.finfo(float).eps)


def _g1_moduli(x0, x1, x2):
    k = math.sqrt((x1 - x2) / (x0 - x2))
    kp = math.sqrt((x0 - x1) / (x0 - x2))
    return k, kp


def omega_g1_closed(x0: float, x1: float, x2: float) -> float:
    """Omega = (2/3) sqrt(x0-x2) (x0+x1+x2) [K(k')(1 - E(k)/K(k)) - E(k')]."""
    k, kp = _g1_moduli(x0, x1, x2)
    K, E = ellint_K(k), ellint_E(k)
    Kp, Ep = ellint_K(kp), ellint_E(kp)
    return (2.0 / 3.0) * math.sqrt(x0 - x2) * (x0 + x1 + x2) * (Kp * (1.0 - E / K) - Ep)


def tau_g1_closed(x0: float, x1: float, x2: float) -> complex:
    """tau = i K(k')/K(k)."""
    k, kp = _g1_moduli(x0, x1, x2)
    return 1j * ellint_K(kp) / ellint_K(k)


def leading_coeff_g1_closed(x0: float, x1: float, x2: float) -> float:
    """Closed-form cubic coefficient for one interval."""
    q0 = x0 * (x0 - x1 - x2) / 2.0
    s3 = x0**3 + x1**3 + x2**3
    return (s3 - (x0 + x1) * (x0 + x2) * (x1 + x2)) / 12.0 - q0 * (x0 + x1 + x2) / 3.0


# -------------------------------------------------------------- general g


def _q_polynomial(pts, g, strict=True, max_order=1024):
    """Coefficients q_0..q_{g+1} for branch points ``pts``."""
    M, mt = _moments(pts, g, strict=strict, max_order=max_order)
    low = np.linalg.solve(M, mt)
    return np.concatenate([low, [0.5 * float(np.sum(pts)), -1.0]])


def _residual(x0, x, g, strict=True, max_order=1024):
    pts = np.concatenate([[x0], x])
    q = _q_polynomial(pts, g, strict=strict, max_order=max_order)
    return float(np.polynomial.polynomial.polyval(x0, q))


def _leading_coeff(pts, q, g):
    """c = (1/12)[sum x^3 - sum_{j<k}(x_j^2 x_k + x_j x_k^2) - 2 sum_{j<k<l} x_j x_k x_l]
    - (2/3) q_{g-2} - (q_{g-1}/3) sum x_j, with q_{-1} = 0."""
    pts = [float(v) for v in pts]
    s3 = sum(v**3 for v in pts)
    pairs = sum(a * a * b + a * b * b for a, b in itertools.combinations(pts, 2))
    triples = sum(a * b * c for a, b, c in itertools.combinations(pts, 3))
    qm2 = q[g - 2] if g >= 2 else 0.0
    return (s3 - pairs - 2.0 * triples) / 12.0 - (2.0 / 3.0) * qm2 - q[g - 1] * sum(pts) / 3.0


def _scan_roots(cfg: IntervalConfig):
    x = np.array(cfg.x)
    g = cfg.g
    scale = cfg.scale
    base = max(x[0], 0.0)
    hi = x[0] - x[-1]
    eps = DEGENERACY_RTOL * scale
    grid = base + np.geomspace(eps, hi - base, SCAN_POINTS)
    vals = np.empty(SCAN_POINTS)
    for i, x0 in enumerate(grid):
        try:
            vals[i] = _residual(x0, x, g, strict=False, max_order=512)
        except (np.linalg.LinAlgError, DomainError, QuadratureError):
            vals[i] = np.nan
    roots = []
    tol = RESIDUAL_RTOL * scale**2
    for i in range(SCAN_POINTS - 1):
        a, b = vals[i], vals[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)) or a * b > 0:
            continue
        if a == 0.0:
            cand = grid[i]
        else:
            try:
                cand = brentq(
                    _residual, grid[i], grid[i + 1], args=(x, g), xtol=1e-15 * scale, rtol=4 * np.finfo(float).eps
                )
            except QuadratureError:
                continue
        res = _residual(cand, x, g)
        if abs(res) <= tol:  # sign changes across poles fail this
            roots.append((float(cand), res))
    return roots


def solve_system(cfg: IntervalConfig, strict: bool = False) -> SurfaceData:
    """Solve for x0 and the polynomial q, then assemble the surface data.

    Candidate x0 are scanned on ``(max(x1, 0), x1 - x_{2g})`` with logarithmic
    spacing toward the left end, then refined.  If several genuine roots
    exist the smallest is kept and all of them are recorded in
    ``ambiguous_roots``; ``strict=True`` raises instead.
    """
    if cfg.g == 1:
        _check_g1_admissible(*cfg.x)
    roots = _scan_roots(cfg)
    if not roots:
        raise NoSolutionError(f"no admissible x0 found for endpoints {cfg.x}")
    roots.sort()
    if len(roots) > 1 and strict:
        raise AmbiguousSolutionError(
            f"{len(roots)} admissible x0 values: {[r for r, _ in roots]}", roots=tuple(r for r, _ in roots)
        )
    x0, res = roots[0]
    return build_surface(cfg, x0, residual=res, ambiguous_roots=tuple(r for r, _ in roots) if len(roots) > 1 else ())


def build_surface(cfg: IntervalConfig, x0: float, residual: float = float("nan"), ambiguous_roots=()) -> SurfaceData:
    """Surface data for a given x0 (period matrix, frequencies, cubic coefficient)."""
    bp = BranchPoints(x0, cfg.x)
    g = cfg.g
    pts = bp.points
    M, mt = _moments(pts, g)
    q = np.concatenate([np.linalg.solve(M, mt), [0.5 * float(np.sum(pts)), -1.0]])
    A = a_cycle_matrix(bp, M)
    tau = period_matrix(bp, A)
    om = _omega(bp, q)
    if np.any(om <= 0):
        from .errors import SolverInconsistencyError

        raise SolverInconsistencyError(f"non-positive frequency {om} at x0 = {x0}")
    return SurfaceData(
        bp=bp,
        q=q,
        A=A,
        tau=tau,
        Omega=om,
        c=float(_leading_coeff(pts, q, g)),
        c0=genus1_c0(bp) if g == 1 else None,
        cond_A=float(np.linalg.cond(A)),
        residual=float(residual),
        ambiguous_roots=tuple(ambiguous_roots),
    )


def leading_coeff(sd: SurfaceData) -> float:
    """Cubic coefficient c of the expansion (negative for admissible data)."""
    return float(_leading_coeff(sd.bp.points, sd.q, sd.g))


def nu_vector(sd: SurfaceData, r: float) -> np.ndarray:
    """nu_j(r) = -Omega_j r**(3/2) / (2 pi)."""
    return -sd.Omega * r**1.5 / (2.0 * math.pi)


def _log_theta(sd, nu, tol=1e-14):
    val = theta(sd.theta_evaluator(tol), nu)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val)) or val.real <= 0.0:
        raise ThetaEvaluationError(f"theta(nu) = {val} is not positive real")
    return math.log(val.real)


def expansion_terms(sd: SurfaceData, r: float, C: float | None = None, theta_tol: float = 1e-14) -> ExpansionTerms:
    if not (math.isfinite(r) and r > 0):
        raise DomainError(f"r must be positive and finite, got {r}")
    nu = nu_vector(sd, r)
    return ExpansionTerms(
        r=float(r),
        cubic=sd.c * r**3,
        log_term=-0.375 * sd.g * math.log(r),
        log_theta=_log_theta(sd, nu, theta_tol),
        nu=tuple(float(v) for v in nu),
        C=C,
    )


def predicted_logF(sd: SurfaceData, r, C: float = 0.0, theta_tol: float = 1e-14):
    """Predicted ln F(r) = c r^3 - (3g/8) ln r + ln theta(nu(r)) + C.

    ``r`` may be a scalar or an array.
    """
    if np.ndim(r) == 0:
        return expansion_terms(sd, float(r), theta_tol=theta_tol).predicted_no_C + C
    vals = [expansion_terms(sd, float(v), theta_tol=theta_tol).predicted_no_C + C for v in np.ravel(r)]
    return np.array(vals).reshape(np.shape(r))


def is_admissible(cfg: IntervalConfig) -> Admissibility:
    """Whether the expansion applies to ``cfg``.

    For one interval this is the explicit test ``x1 < 0`` or ``x2 < -2 x1``.
    For more intervals it means: a real ``x0 > max(x1, 0)`` solves the
    system, the frequencies are positive and ``c < 0``.
    """
    if cfg.g == 1:
        x1, x2 = cfg.x
        ok = x1 < 0.0 or x2 < -2.0 * x1
        return Admissibility(ok, "x1 < 0 or x2 < -2*x1", {"x1": x1, "x2": x2})
    try:
        sd = solve_system(cfg)
    except (NoSolutionError, DegenerateConfigurationError) as exc:
        return Admissibility(False, "real x0 > max(x1, 0) exists", {"reason": str(exc)})
    except Exception as exc:  # any other solver failure is reported, not hidden
        return Admissibility(False, "spectral data computable", {"reason": f"{type(exc).__name__}: {exc}"})
    ok = bool(sd.c < 0 and np.all(sd.Omega > 0))
    return Admissibility(
        ok,
        "real x0 exists, Omega > 0 and c < 0",
        {"x0": sd.x0, "c": sd.c, "Omega": sd.Omega.tolist(), "ambiguous_roots": list(sd.ambiguous_roots)},
    )
