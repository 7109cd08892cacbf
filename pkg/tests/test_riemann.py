import math

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad

from airygap.errors import DegenerateConfigurationError, DomainError, QuadratureError
from airygap.riemann import (
    BranchPoints,
    a_cycle_matrix,
    abel_map_g1,
    abel_moment_g1,
    cut_integral,
    genus1_c0,
    moments,
    omega_frequencies,
    period_matrix,
    sqrt_R,
)

X0 = 0.0803808663709154


@pytest.fixture
def bp1():
    return BranchPoints(X0, (-1.0, -2.0))


def test_branch_points_validation():
    with pytest.raises(DomainError):
        BranchPoints(0.5, (-1.0,))  # odd count
    with pytest.raises(DomainError):
        BranchPoints(0.5, (-2.0, -1.0))  # not decreasing
    with pytest.raises(DomainError):
        BranchPoints(-0.5, (-1.0, -2.0))  # x0 below 0
    with pytest.raises(DegenerateConfigurationError):
        BranchPoints(0.5, (-1.0, -1.0 - 1e-10))
    assert BranchPoints(0.5, (-1, -2)).g == 1


def test_sqrt_R_signs_on_real_axis(bp1):
    # gap (x2, x1): real with sign (-1)^1
    v = sqrt_R(-1.5, bp1)
    assert v.imag == 0 and v.real < 0
    # cut (x1, x0): i * positive
    v = sqrt_R(-0.5, bp1)
    assert v.real == 0 and v.imag > 0
    # left of everything: i^3 = -i
    v = sqrt_R(-3.0, bp1)
    assert abs(v.real) < 1e-15 and v.imag < 0
    # right of x0: positive
    assert sqrt_R(1.0, bp1).real > 0


def test_sqrt_R_boundary_values_and_sheets(bp1):
    up = sqrt_R(-0.5, bp1, side="+")
    down = sqrt_R(-0.5, bp1, side="-")
    assert down == np.conj(up)
    assert sqrt_R(0.3 + 0.2j, bp1, sheet="lower") == -sqrt_R(0.3 + 0.2j, bp1)
    z = np.array([-0.5 + 1e-12j, 2.0 + 0j])
    np.testing.assert_allclose(sqrt_R(z, bp1), [sqrt_R(-0.5, bp1), sqrt_R(2.0, bp1)], rtol=1e-10)
    with pytest.raises(DomainError):
        sqrt_R(0.0, bp1, sheet="middle")


def test_sqrt_R_squares_to_polynomial(bp1):
    z = 0.7 - 1.3j
    assert sqrt_R(z, bp1) ** 2 == pytest.approx(np.prod([z - x for x in bp1.points]), rel=1e-14)


@pytest.mark.parametrize("weight", ["chebyshev", "left", "right", "none"])
def test_cut_integral_against_quad(weight):
    a, b = -1.3, 0.4
    f = lambda s: np.exp(0.3 * s) * np.cos(s)  # noqa: E731
    wvar = {"chebyshev": (-0.5, -0.5), "left": (-0.5, 0.0), "right": (0.0, -0.5), "none": (0.0, 0.0)}[weight]
    ref = quad(f, a, b, weight="alg", wvar=wvar, epsabs=1e-14, epsrel=1e-13)[0]
    res = cut_integral(f, a, b, weight=weight)
    assert res.value == pytest.approx(ref, rel=1e-11)
    assert res.converged and res.error <= 1e-12 * 10


def test_cut_integral_vector_valued():
    res = cut_integral(lambda s: np.column_stack([np.ones_like(s), s]), -1.0, 1.0)
    np.testing.assert_allclose(res.value, [math.pi, 0.0], atol=1e-14)


def test_cut_integral_errors():
    with pytest.raises(DomainError):
        cut_integral(np.cos, 1.0, 0.0)
    with pytest.raises(DomainError):
        cut_integral(np.cos, 0.0, 1.0, weight="bogus")
    # |s|^0.5 has a kink that spectral rules cannot resolve to 1e-15 quickly
    with pytest.raises(QuadratureError):
        cut_integral(lambda s: np.abs(s) ** 0.5, -1.0, 1.0, rtol=1e-15, max_order=64)
    res = cut_integral(lambda s: np.abs(s) ** 0.5, -1.0, 1.0, rtol=1e-15, max_order=64, strict=False)
    assert not res.converged and res.order == 64


def test_moments_against_quad(bp1):
    M, mt = moments(bp1)
    x0, x1, x2 = bp1.points

    def inv_sqrt(s):  # sqrt(R) on the gap has sign (-1)^1
        return -1.0 / math.sqrt(abs((s - x0) * (s - x1) * (s - x2)))

    ref = quad(inv_sqrt, x2, x1, limit=200)[0]
    assert M[0, 0] == pytest.approx(ref, rel=1e-10)
    qg = 0.5 * (x0 + x1 + x2)
    ref_t = -quad(lambda s: (-s * s + qg * s) * inv_sqrt(s), x2, x1, limit=200)[0]
    assert mt[0] == pytest.approx(ref_t, rel=1e-10)


def test_a_cycle_matrix_is_inverse_c0(bp1):
    A = a_cycle_matrix(bp1)
    assert A[0, 0] == pytest.approx(1.0 / genus1_c0(bp1), rel=1e-13)


def test_a_cycle_matrix_rejects_singular():
    M = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(DegenerateConfigurationError):
        a_cycle_matrix(BranchPoints(0.5, (-1, -2, -3, -4)), M)


def test_period_matrix_genus1(bp1):
    tau = period_matrix(bp1, a_cycle_matrix(bp1))
    assert tau.shape == (1, 1)
    assert tau[0, 0].real == 0.0
    assert tau[0, 0].imag == pytest.approx(1.017819262122192, rel=1e-12)


def test_period_matrix_genus2_symmetric(sd_g2):
    tau = sd_g2.tau
    assert np.max(np.abs(tau - tau.T)) < 1e-12
    assert np.all(np.linalg.eigvalsh(tau.imag) > 0)


def test_omega_frequencies_positive(sd_g1, sd_g2):
    assert omega_frequencies(sd_g1)[0] == pytest.approx(2.3992206554886346, rel=1e-12)
    assert np.all(omega_frequencies(sd_g2) > 0)


def test_abel_map_against_quad(sd_g1):
    x0, x1, x2 = (mp.mpf(float(v)) for v in sd_g1.bp.points)
    c0 = sd_g1.c0
    with mp.workdps(30):
        for x in (float(x0) + 1e-6, 0.5, 5.0, 60.0):
            # s = x0 + u^2 removes the endpoint singularity
            f = lambda u: 2 * c0 / mp.sqrt((x0 + u * u - x1) * (x0 + u * u - x2))  # noqa: E731
            ref = float(mp.quad(f, [0, mp.sqrt(mp.mpf(x) - x0)]))
            assert abel_map_g1(sd_g1, x) == pytest.approx(ref, rel=1e-13)
    assert abel_map_g1(sd_g1, x0) == 0.0
    assert abel_map_g1(sd_g1, math.inf) == pytest.approx(0.5, rel=1e-14)


def test_abel_map_monotone(sd_g1):
    xs = [sd_g1.x0 + d for d in (1e-3, 1e-1, 1.0, 10.0, 1e3)]
    vals = [abel_map_g1(sd_g1, x) for x in xs]
    assert all(a < b for a, b in zip(vals, vals[1:])) and vals[-1] < 0.5


def test_abel_map_errors(sd_g1, sd_g2):
    with pytest.raises(DomainError):
        abel_map_g1(sd_g1, sd_g1.x0 - 0.1)
    with pytest.raises(DomainError):
        abel_map_g1(sd_g2, 5.0)
    with pytest.raises(DomainError):
        abel_moment_g1(sd_g2, 1)


def test_abel_moment_against_quad(sd_g1):
    x0, x1, x2 = sd_g1.bp.points
    c0 = sd_g1.c0
    for p in (1, 2, 3):
        f = lambda s: 2 * c0 / math.sqrt((s - x0) * (s - x1) * (s - x2)) / (s - x2) ** p  # noqa: E731
        ref = quad(f, x0, x0 + 1, limit=400)[0] + quad(f, x0 + 1, math.inf, limit=400)[0]
        assert abel_moment_g1(sd_g1, p) == pytest.approx(ref, rel=1e-9)
