"""Hyperelliptic-surface numerics for sqrt(R(z)) = prod_{j=0}^{2g} sqrt(z - x_j).

Branch points are ordered ``x0 > x1 > ... > x_{2g}``.  On the real line the
boundary value from above of sqrt(R) is ``i**m * prod sqrt|s - x_j|`` where
``m`` is the number of branch points to the right of ``s``.  So sqrt(R) is
real on the gaps ``(x_{2i}, x_{2i-1})`` (sign ``(-1)**i``) and purely
imaginary on the cuts ``(x_{2j+1}, x_{2j})`` (factor ``i (-1)**j``).  All
segment integrals below are written with that rule and evaluated by
Gauss-Chebyshev quadrature, which absorbs both inverse-square-root endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from .errors import (
    DegenerateConfigurationError,
    DomainError,
    InconsistentHomologyError,
    QuadratureError,
    SolverInconsistencyError,
)
from .specialfn import ellint_K

__all__ = [
    "BranchPoints",
    "SurfaceData",
    "QuadResult",
    "sqrt_R",
    "cut_integral",
    "moments",
    "a_cycle_matrix",
    "period_matrix",
    "omega_frequencies",
    "abel_map_g1",
    "abel_moment_g1",
    "genus1_c0",
]

DEGENERACY_RTOL = 1e-8
COND_MAX = 1e12
QUAD_RTOL = 1e-12
QUAD_ORDERS = (32, 64, 128, 256, 512, 1024)


@dataclass(frozen=True)
class BranchPoints:
    """Branch points ``x0 > x1 > ... > x_{2g}`` of the genus-g surface."""

    x0: float
    x: tuple

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "x0", float(self.x0))
        if len(x) == 0 or len(x) % 2:
            raise DomainError("need an even, nonzero number of endpoints")
        pts = self.points
        if not np.all(np.isfinite(pts)):
            raise DomainError("branch points must be finite")
        if np.any(np.diff(pts) >= 0):
            raise DomainError("branch points must satisfy x0 > x1 > ... > x_2g")
        if not self.x0 > max(x[0], 0.0):
            raise DomainError("x0 must exceed max(x1, 0)")
        scale = float(np.max(np.abs(pts)))
        if np.min(-np.diff(pts)) < DEGENERACY_RTOL * scale:
            raise DegenerateConfigurationError("two branch points within 1e-8 of each other (relative)")

    @property
    def g(self) -> int:
        return len(self.x) // 2

    @property
    def points(self) -> np.ndarray:
        return np.array((self.x0,) + self.x)

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.points)))


class QuadResult(NamedTuple):
    value: np.ndarray | float
    error: float
    order: int
    converged: bool


def sqrt_R(z, bp: BranchPoints, sheet: str = "upper", side: str = "+"):
    """sqrt(R(z)) as a product of principal square roots.

    Real ``z`` on a cut returns the boundary value from above (``side="+"``)
    or below (``side="-"``).  The lower sheet is the negative of the upper.
    """
    if sheet not in ("upper", "lower"):
        raise DomainError(f"unknown sheet {sheet!r}")
    if side not in ("+", "-"):
        raise DomainError(f"unknown side {side!r}")
    za = np.asarray(z)
    real_input = np.isrealobj(za)
    za = za.astype(np.complex128)  # real input gets imaginary part +0.0
    out = np.ones_like(za)
    for xj in bp.points:
        out = out * np.sqrt(za - xj)
    if real_input and side == "-":
        out = np.conj(out)
    if sheet == "lower":
        out = -out
    return complex(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def _chebyshev_rule(n):
    t = np.cos((2.0 * np.arange(1, n + 1) - 1.0) * np.pi / (2.0 * n))
    return t, np.full(n, np.pi / n)


@lru_cache(maxsize=None)
def _jacobi_rule(n, alpha, beta):
    t, w = roots_jacobi(n, alpha, beta)
    return t, w


@lru_cache(maxsize=None)
def _legendre_rule(n):
    return leggauss(n)


def _rule(weight, n, a, b):
    """Nodes and weights on (a, b) for the requested endpoint singularity."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    if weight == "chebyshev":  # 1/sqrt((b-s)(s-a))
        t, w = _chebyshev_rule(n)
        return mid + half * t, w
    if weight == "left":  # 1/sqrt(s-a)
        t, w = _jacobi_rule(n, 0.0, -0.5)
        return mid + half * t, w * math.sqrt(half)
    if weight == "right":  # 1/sqrt(b-s)
        t, w = _jacobi_rule(n, -0.5, 0.0)
        return mid + half * t, w * math.sqrt(half)
    if weight == "none":
        t, w = _legendre_rule(n)
        return mid + half * t, w * half
    raise DomainError(f"unknown weight {weight!r}")


def cut_integral(
    fn: Callable,
    a: float,
    b: float,
    order: int = 32,
    weight: str = "chebyshev",
    rtol: float = QUAD_RTOL,
    max_order: int = 1024,
    strict: bool = True,
) -> QuadResult:
    """Integrate ``fn(s) * w(s)`` over (a, b) with an endpoint-singular weight.

    ``weight`` is ``"chebyshev"`` for ``1/sqrt((b-s)(s-a))``, ``"left"`` for
    ``1/sqrt(s-a)``, ``"right"`` for ``1/sqrt(b-s)`` and ``"none"`` for plain
    Gauss-Legendre.  ``fn`` may return an array of shape ``(n,)`` or
    ``(n, m)`` for ``n`` nodes; vector integrands share one set of nodes.

    The order doubles from ``order`` until two successive results agree to
    ``rtol`` relative to ``sum w |f|``, so integrands that cancel to nearly
    zero still terminate; the error estimate is that difference.  With
    ``strict`` an unconverged result raises :class:`QuadratureError`.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("cut_integral: endpoints must be finite")
    if a >= b:
        raise DomainError(f"cut_integral: need a < b, got ({a}, {b})")
    if order < 4:
        raise DomainError("cut_integral: order must be >= 4")

    def apply(n):
        s, w = _rule(weight, n, a, b)
        vals = np.asarray(fn(s))
        return np.tensordot(w, vals, axes=(0, 0)), float(np.max(np.tensordot(w, np.abs(vals), axes=(0, 0))))

    n = order
    prev, _ = apply(n)
    while True:
        cur, size = apply(2 * n)
        err = float(np.max(np.abs(cur - prev)))
        if err <= rtol * max(size, 1e-300) or err == 0.0:
            return QuadResult(cur if np.ndim(cur) else float(cur), err, 2 * n, True)
        if 2 * n >= max_order:
            if strict:
                raise QuadratureError(
                    f"quadrature on ({a}, {b}) not converged at order {2 * n}: "
                    f"delta {err:.3e} vs size {size:.3e}"
                )
            return QuadResult(cur if np.ndim(cur) else float(cur), err, 2 * n, False)
        n *= 2
        prev = cur


def _others(s, pts, skip):
    """prod_{j not in skip} sqrt|s - x_j| for node array ``s``."""
    out = np.ones_like(s)
    for j, xj in enumerate(pts):
        if j not in skip:
            out = out * np.sqrt(np.abs(s - xj))
    return out


def _gap_integrals(pts, g, cols, strict=True, max_order=1024):
    """Integrals over each gap i=1..g of cols(s)/sqrt(R(s)); returns (g, m)."""
    rows = []
    for i in range(1, g + 1):
        a, b = pts[2 * i], pts[2 * i - 1]
        sign = (-1.0) ** i

        def integrand(s, i=i, sign=sign):
            return cols(s) * (sign / _others(s, pts, (2 * i - 1, 2 * i)))[:, None]

        rows.append(cut_integral(integrand, a, b, strict=strict, max_order=max_order).value)
    return np.array(rows)


def _cut_integrals(pts, g, cols, strict=True):
    """Integrals over each cut j=0..g-1 of cols(s)/|sqrt(R(s))|; returns (g, m).

    The boundary value from above on cut j is ``i (-1)**j |sqrt(R)|``; callers
    apply that factor.
    """
    rows = []
    for j in range(g):
        a, b = pts[2 * j + 1], pts[2 * j]

        def integrand(s, j=j):
            return cols(s) * (1.0 / _others(s, pts, (2 * j, 2 * j + 1)))[:, None]

        rows.append(cut_integral(integrand, a, b, strict=strict).value)
    return np.array(rows)


def _powers(g):
    return lambda s: np.vander(s, g, increasing=True)


def _moments(pts, g, strict=True, max_order=1024):
    """(M, mt) for branch points ``pts = (x0, x1, ..., x_2g)``."""
    qg = 0.5 * float(np.sum(pts))

    def cols(s):
        P = np.vander(s, g + 2, increasing=True)
        top = -(-1.0 * P[:, g + 1] + qg * P[:, g])
        return np.column_stack([P[:, :g], top])

    vals = _gap_integrals(pts, g, cols, strict=strict, max_order=max_order)
    return vals[:, :g], vals[:, g]


def moments(bp: BranchPoints):
    """Moment matrix ``M[i, j] = int_gap_i s**j / sqrt(R)`` and right-hand side.

    Returns ``(M, mt)`` with ``mt[i] = -int_gap_i (q_{g+1} s**(g+1) + q_g s**g)/sqrt(R)``,
    ``q_{g+1} = -1`` and ``q_g = sum(x_j)/2`` over all 2g+1 branch points.
    """
    return _moments(bp.points, bp.g)


def a_cycle_matrix(bp: BranchPoints, M=None) -> np.ndarray:
    """A-period matrix ``A[j, k] = 2 sum_{l>=j} int_{x_{2l-1}}^{x_{2l}} s**k / sqrt(R)``.

    The integral runs right to left over gap l, hence ``-2 * M`` summed over
    rows l >= j.
    """
    if M is None:
        M, _ = moments(bp)
    A = -2.0 * np.cumsum(M[::-1], axis=0)[::-1]
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > COND_MAX:
        raise DegenerateConfigurationError(f"A-cycle matrix is singular (cond {cond:.3e})")
    return A


def period_matrix(bp: BranchPoints, A: np.ndarray) -> np.ndarray:
    """Period matrix ``tau = B A^{-1}`` from B-cycles around the cuts.

    B_j encircles the cut ``(x_{2j-1}, x_{2j-2})`` on the first sheet and is
    twice the boundary-value integral over it.  Each row's orientation is then
    chosen so that ``Im tau[j, j] > 0``; the result must come out symmetric
    with positive definite imaginary part.
    """
    g = bp.g
    P = _cut_integrals(bp.points, g, _powers(g))
    # 2 * int s^k / (i (-1)^j |sqrt R|) = -2i (-1)^j int s^k/|sqrt R|
    signs = (-1.0) ** np.arange(g)
    B_imag = -2.0 * signs[:, None] * P
    T = np.linalg.solve(A.T, B_imag.T).T  # B A^{-1}, imaginary parts
    T = T * np.sign(np.diag(T))[:, None]
    asym = float(np.max(np.abs(T - T.T)))
    if asym > 1e-8 * max(1.0, float(np.max(np.abs(T)))):
        raise InconsistentHomologyError(f"period matrix not symmetric (defect {asym:.3e})")
    T = 0.5 * (T + T.T)
    if np.linalg.eigvalsh(T)[0] <= 0.0:
        raise InconsistentHomologyError("imaginary part of tau is not positive definite")
    return 1j * T


def _q_values(q, s):
    return np.polynomial.polynomial.polyval(s, q)


def _omega(bp: BranchPoints, q) -> np.ndarray:
    """Omega_j = 2i int_{cut j} q / sqrt(R)_+  =  2 (-1)**j int_{cut j} q / |sqrt(R)|."""
    g = bp.g
    vals = _cut_integrals(bp.points, g, lambda s: _q_values(q, s)[:, None])[:, 0]
    return 2.0 * (-1.0) ** np.arange(g) * vals


def omega_frequencies(sd: "SurfaceData") -> np.ndarray:
    """Frequencies Omega_0..Omega_{g-1} of the theta oscillation; all must be > 0."""
    om = _omega(sd.bp, sd.q)
    if np.any(om <= 0):
        raise SolverInconsistencyError(f"non-positive frequency in {om}")
    return om


def genus1_c0(bp: BranchPoints) -> float:
    """Normalising constant c0 = sqrt(x0 - x2) / (4 K(k)), k^2 = (x1-x2)/(x0-x2)."""
    x0, (x1, x2) = bp.x0, bp.x
    k = math.sqrt((x1 - x2) / (x0 - x2))
    return math.sqrt(x0 - x2) / (4.0 * ellint_K(k))


@dataclass(frozen=True)
class SurfaceData:
    """Spectral data of a solved configuration.

    ``q`` holds the coefficients ``q_0..q_{g+1}`` of the polynomial
    ``q(z) = sum q_j z**j`` (``q_{g+1} = -1``).  ``c0`` is only set for g = 1.
    """

    bp: BranchPoints
    q: np.ndarray
    A: np.ndarray
    tau: np.ndarray
    Omega: np.ndarray
    c: float
    c0: float | None = None
    cond_A: float = float("nan")
    residual: float = 0.0
    ambiguous_roots: tuple = ()

    @property
    def g(self) -> int:
        return self.bp.g

    @property
    def x0(self) -> float:
        return self.bp.x0

    def theta_evaluator(self, tol: float = 1e-14):
        from .specialfn import ThetaEvaluator

        key = ("_theta", tol)
        cache = self.__dict__.setdefault("_cache", {})
        if key not in cache:
            cache[key] = ThetaEvaluator(self.tau, tol=tol)
        return cache[key]


def _abel_reduction(bp):
    """Substitution s = (x0 - x1 sin^2 t) / cos^2 t for g = 1.

    Gives ds / sqrt(R) = 2 dt / (sqrt(x0 - x2) sqrt(1 - k^2 sin^2 t)).
    """
    x0, (x1, x2) = bp.x0, bp.x
    k2 = (x1 - x2) / (x0 - x2)
    return x0, x1, x2, k2


def _abel_quad(fn, upper):
    res = cut_integral(fn, 0.0, upper, order=16, weight="none", rtol=1e-14, max_order=4096)
    return res.value


def abel_map_g1(sd: SurfaceData, x: float) -> float:
    """phi(x) = int_{x0}^x c0 / sqrt(R(s)) ds on the upper sheet, x >= x0.

    ``x = inf`` is allowed and gives 1/2 (up to quadrature error).
    """
    if sd.g != 1:
        raise DomainError("abel_map_g1 requires genus 1")
    x0, x1, x2, k2 = _abel_reduction(sd.bp)
    if not x >= x0:
        raise DomainError(f"abel_map_g1: need x >= x0 = {x0}, got {x}")
    if x == x0:
        return 0.0
    psi = math.pi / 2 if math.isinf(x) else math.asin(math.sqrt((x - x0) / (x - x1)))
    val = _abel_quad(lambda t: 1.0 / np.sqrt(1.0 - k2 * np.sin(t) ** 2), psi)
    return float(sd.c0 * 2.0 / math.sqrt(x0 - x2) * val)


def abel_moment_g1(sd: SurfaceData, power: int) -> float:
    """2 int_{x0}^inf phi'(xi) / (xi - x2)**power dxi on the upper sheet."""
    if sd.g != 1:
        raise DomainError("abel_moment_g1 requires genus 1")
    x0, x1, x2, k2 = _abel_reduction(sd.bp)

    def integrand(t):
        s2 = np.sin(t) ** 2
        delta = 1.0 - k2 * s2
        inv = np.cos(t) ** 2 / ((x0 - x2) * delta)  # 1 / (s - x2)
        return inv**power / np.sqrt(delta)

    val = _abel_quad(integrand, math.pi / 2)
    return float(2.0 * sd.c0 * 2.0 / math.sqrt(x0 - x2) * val)
