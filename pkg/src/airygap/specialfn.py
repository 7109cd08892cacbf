"""Special functions: Airy Ai/Ai', complete elliptic integrals, Riemann theta.

Airy evaluation
---------------
* ``|x| <= 8``: Taylor expansion about the nearest node of a table with
  spacing 1/4 on [-8, 10].  The table is built once at import by stepping the
  ODE ``Ai'' = x Ai`` with 40-term Taylor polynomials: from the exact Maclaurin
  values at 0 towards -8 (oscillatory side), and backwards from the asymptotic
  value at 10 towards 0 (backwards is the stable direction for the recessive
  solution).
* ``x > 8``: exponentially decaying asymptotic expansion.
* ``x < -8``: oscillatory asymptotic expansion.

Both asymptotic series are truncated at their smallest term, which is below
1e-13 relative once ``|x| >= 8``.

Elliptic integrals use the modulus ``k`` (not the parameter ``m = k**2``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import DomainError, ThetaEvaluationError, UnsupportedOrderError

__all__ = [
    "airy",
    "airy_ai",
    "airy_ai_prime",
    "ellint_K",
    "ellint_E",
    "ThetaEvaluator",
    "theta",
    "theta_derivs_g1",
    "AIRY_SPLIT",
]

AIRY_SPLIT = 8.0
AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)

_TABLE_H = 0.25
_TABLE_LO = -8.0
_TABLE_HI = 10.0
_N_ASYM = 60


def _asymptotic_coefficients(n):
    u = np.empty(n)
    v = np.empty(n)
    u[0] = v[0] = 1.0
    for k in range(1, n):
        # u_k = (2k+1)(2k+3)...(6k-1) / (216^k k!)
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
        v[k] = -(6 * k + 1) / (6 * k - 1) * u[k]
    return u, v


_U, _V = _asymptotic_coefficients(_N_ASYM)


def _truncated_series(coef, inv_zeta, signs):
    """Sum signs*coef[k]*inv_zeta**k, stopping each entry at its smallest term."""
    total = np.zeros_like(inv_zeta)
    power = np.ones_like(inv_zeta)
    prev = np.full_like(inv_zeta, np.inf)
    active = np.ones(inv_zeta.shape, dtype=bool)
    for k in range(len(coef)):
        term = signs[k] * coef[k] * power
        mag = np.abs(term)
        active &= mag <= prev
        total += np.where(active, term, 0.0)
        prev = np.where(active, mag, prev)
        power = power * inv_zeta
        if not active.any():
            break
    return total


_ALT = np.array([(-1.0) ** k for k in range(_N_ASYM)])


def _airy_decaying(x):
    zeta = 2.0 / 3.0 * x**1.5
    inv = 1.0 / zeta
    pref = np.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    x4 = x**0.25
    ai = pref / x4 * _truncated_series(_U, inv, _ALT)
    aip = -pref * x4 * _truncated_series(_V, inv, _ALT)
    return ai, aip


def _airy_oscillatory(x):
    """Ai(x), Ai'(x) for x < 0 with |x| large."""
    y = -x
    zeta = 2.0 / 3.0 * y**1.5
    inv2 = 1.0 / zeta**2
    alt = _ALT[: _N_ASYM // 2]
    pu = _truncated_series(_U[0::2], inv2, alt)
    qu = _truncated_series(_U[1::2], inv2, alt) / zeta
    pv = _truncated_series(_V[0::2], inv2, alt)
    qv = _truncated_series(_V[1::2], inv2, alt) / zeta
    phase = zeta - math.pi / 4.0
    c, s = np.cos(phase), np.sin(phase)
    y4 = y**0.25
    rpi = 1.0 / math.sqrt(math.pi)
    ai = rpi / y4 * (c * pu + s * qu)
    aip = rpi * y4 * (s * pv - c * qv)
    return ai, aip


def _taylor_step(xc, a, ap, t):
    """Advance (Ai, Ai') from xc to xc + t with a 40-term Taylor polynomial."""
    ai_new, aip_new = kernels.airy_table_eval(
        np.array([xc + t]), xc, 1.0, np.array([a]), np.array([ap])
    )
    return float(ai_new[0]), float(aip_new[0])


def _build_table():
    n_neg = int(round(-_TABLE_LO / _TABLE_H))
    n_pos = int(round(_TABLE_HI / _TABLE_H))
    xs = _TABLE_LO + _TABLE_H * np.arange(n_neg + n_pos + 1)
    ai = np.empty_like(xs)
    aip = np.empty_like(xs)
    ai[n_neg], aip[n_neg] = AI0, AIP0
    a, ap = AI0, AIP0
    for i in range(n_neg - 1, -1, -1):
        a, ap = _taylor_step(xs[i + 1], a, ap, -_TABLE_H)
        ai[i], aip[i] = a, ap
    hi_ai, hi_aip = _airy_decaying(np.array([_TABLE_HI]))
    a, ap = float(hi_ai[0]), float(hi_aip[0])
    ai[-1], aip[-1] = a, ap
    for i in range(len(xs) - 2, n_neg, -1):
        a, ap = _taylor_step(xs[i + 1], a, ap, -_TABLE_H)
        ai[i], aip[i] = a, ap
    return xs, ai, aip


_TABLE_X, _TABLE_AI, _TABLE_AIP = _build_table()


def airy(x):
    """Return ``(Ai(x), Ai'(x))`` elementwise for real ``x``.

    Raises :class:`DomainError` on non-finite input.
    """
    xa = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(xa)):
        raise DomainError("airy: non-finite argument")
    flat = xa.ravel()
    ai = np.empty_like(flat)
    aip = np.empty_like(flat)
    mid = np.abs(flat) <= AIRY_SPLIT
    if mid.any():
        ai[mid], aip[mid] = kernels.airy_table_eval(
            flat[mid], _TABLE_LO, _TABLE_H, _TABLE_AI, _TABLE_AIP
        )
    hi = flat > AIRY_SPLIT
    if hi.any():
        ai[hi], aip[hi] = _airy_decaying(flat[hi])
    lo = flat < -AIRY_SPLIT
    if lo.any():
        ai[lo], aip[lo] = _airy_oscillatory(flat[lo])
    if xa.ndim == 0:
        return float(ai[0]), float(aip[0])
    return ai.reshape(xa.shape), aip.reshape(xa.shape)


def airy_ai(x):
    return airy(x)[0]


def airy_ai_prime(x):
    return airy(x)[1]


def _agm_terms(k):
    a, b = 1.0, math.sqrt((1.0 - k) * (1.0 + k))
    c = k
    csum = 0.5 * c * c
    power = 0.5
    for _ in range(64):
        if abs(c) <= 1e-17 * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        power *= 2.0
        csum += power * c * c
    return a, csum


def ellint_K(k):
    """Complete elliptic integral of the first kind, modulus ``k`` in [0, 1)."""
    k = float(k)
    if not (0.0 <= abs(k) < 1.0) or not math.isfinite(k):
        raise DomainError(f"ellint_K: modulus must satisfy |k| < 1, got {k!r}")
    a, _ = _agm_terms(abs(k))
    return math.pi / (2.0 * a)


def ellint_E(k):
    """Complete elliptic integral of the second kind, modulus ``k`` in [0, 1]."""
    k = float(k)
    if not math.isfinite(k) or abs(k) > 1.0:
        raise DomainError(f"ellint_E: modulus must satisfy |k| <= 1, got {k!r}")
    if abs(k) == 1.0:
        return 1.0
    a, csum = _agm_terms(abs(k))
    return math.pi / (2.0 * a) * (1.0 - csum)


def _shell_count(m, g):
    return (2 * m + 1) ** g - (2 * m - 1) ** g


def _truncation_radius(lam_min, g, tol, poly=0):
    """Smallest R whose lattice tail sum_{|n|_inf > R} |term| is below tol.

    Terms with sup-norm m are bounded by (2 pi m)**poly * exp(-pi lam_min m**2).
    """
    for R in range(1, 400):
        tail = 0.0
        for m in range(R + 1, R + 60):
            tail += _shell_count(m, g) * (2.0 * math.pi * m) ** poly * math.exp(-math.pi * lam_min * m * m)
        if tail < tol:
            return R
    raise ThetaEvaluationError("theta: imaginary part of tau too small for truncation")


def _half_lattice(radius, g):
    """Lattice points in [-R, R]^g whose first nonzero entry is positive."""
    pts = [
        n
        for n in itertools.product(range(-radius, radius + 1), repeat=g)
        if any(n) and next(c for c in n if c != 0) > 0
    ]
    return np.array(pts, dtype=np.int64).reshape(-1, g)


@dataclass(frozen=True)
class ThetaEvaluator:
    """Truncated lattice-sum evaluator for the genus-g Riemann theta function.

    Parameters
    ----------
    tau : array_like, complex (g, g)
        Symmetric period matrix with positive definite imaginary part.
    tol : float
        Absolute truncation tolerance, relative to the largest lattice term.
    """

    tau: np.ndarray
    tol: float = 1e-14
    radius: int = field(init=False)
    g: int = field(init=False)
    lam_min: float = field(init=False)
    pure_imaginary: bool = field(init=False)

    def __post_init__(self):
        tau = np.atleast_2d(np.asarray(self.tau, dtype=np.complex128))
        if tau.shape[0] != tau.shape[1]:
            raise DomainError("tau must be square")
        scale = max(1.0, float(np.max(np.abs(tau))))
        if np.max(np.abs(tau - tau.T)) > max(self.tol, 1e-12) * scale:
            raise DomainError("tau is not symmetric")
        Y = 0.5 * (tau.imag + tau.imag.T)
        lam = np.linalg.eigvalsh(Y)
        if lam[0] <= 0.0:
            raise DomainError("imaginary part of tau is not positive definite")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "g", tau.shape[0])
        object.__setattr__(self, "lam_min", float(lam[0]))
        object.__setattr__(self, "radius", _truncation_radius(float(lam[0]), tau.shape[0], self.tol))
        object.__setattr__(self, "pure_imaginary", bool(np.max(np.abs(tau.real)) <= 1e-15 * scale))

    def lattice(self, radius):
        vecs = _half_lattice(radius, self.g)
        quad = np.einsum("ki,ij,kj->k", vecs, self.tau, vecs)
        return vecs, np.exp(1j * np.pi * quad)

    def _radius_for(self, z, poly=0):
        Y = self.tau.imag
        shift = np.linalg.solve(Y, np.asarray(z).imag) if np.any(np.asarray(z).imag) else np.zeros(self.g)
        base = self.radius if poly == 0 else _truncation_radius(self.lam_min, self.g, self.tol, poly)
        return base + int(math.ceil(float(np.max(np.abs(shift)))))


def _as_vector(z, g):
    zv = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if zv.shape != (g,):
        raise DomainError(f"theta argument must have shape ({g},), got {zv.shape}")
    return zv


def theta(ev: ThetaEvaluator, z) -> complex:
    """Riemann theta function by symmetric lattice summation.

    Pairs ``n`` and ``-n`` are combined before accumulation, which makes
    ``theta(-z) == theta(z)`` hold exactly.  For purely imaginary ``tau`` and
    real ``z`` the imaginary part is exactly zero.
    """
    zv = _as_vector(z, ev.g)
    if ev.pure_imaginary and not np.any(zv.imag):
        vecs, w = ev.lattice(ev.radius)
        return complex(1.0 + 2.0 * kernels.theta_sum_real(w.real.copy(), vecs, zv.real.copy()), 0.0)
    vecs, w = ev.lattice(ev._radius_for(zv))
    return 1.0 + kernels.theta_pair_sum(2.0 * w, vecs, zv, False)


def theta_derivs_g1(ev: ThetaEvaluator, z, order: int) -> complex:
    """``order``-th z-derivative of the genus-1 theta function, order <= 3.

    Differentiates the lattice sum term by term.
    """
    if ev.g != 1:
        raise DomainError("theta_derivs_g1 requires genus 1")
    if order not in (0, 1, 2, 3):
        raise UnsupportedOrderError(f"derivative order {order} not supported (max 3)")
    if order == 0:
        return theta(ev, z)
    zv = _as_vector(z, 1)
    vecs, w = ev.lattice(ev._radius_for(zv, poly=order))
    n = vecs[:, 0].astype(np.float64)
    coef = 2.0 * w * (2j * np.pi * n) ** order
    return kernels.theta_pair_sum(coef, vecs, zv, order % 2 == 1)
