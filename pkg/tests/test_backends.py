"""The compiled kernels and the numpy fallback must agree to rounding."""

import os
import subprocess
import sys

import numpy as np
import pytest

from airygap import _kernels_py as py
from airygap.specialfn import _TABLE_AI, _TABLE_AIP, _TABLE_H, _TABLE_LO

cy = pytest.importorskip("airygap._kernels_c", reason="compiled extension not built")


def test_airy_table_parity():
    x = np.random.default_rng(1).uniform(-8, 8, 500)
    a1, b1 = py.airy_table_eval(x, _TABLE_LO, _TABLE_H, _TABLE_AI, _TABLE_AIP)
    a2, b2 = cy.airy_table_eval(x, _TABLE_LO, _TABLE_H, _TABLE_AI, _TABLE_AIP)
    assert np.max(np.abs(a1 - a2)) < 1e-15
    assert np.max(np.abs(b1 - b2)) < 1e-15


def test_airy_table_parity_preserves_shape():
    x = np.linspace(-2, 2, 6).reshape(2, 3)
    a, b = cy.airy_table_eval(x, _TABLE_LO, _TABLE_H, _TABLE_AI, _TABLE_AIP)
    assert a.shape == (2, 3) and b.shape == (2, 3)


def test_kernel_matrix_parity():
    rng = np.random.default_rng(2)
    u = np.sort(rng.uniform(-5, 3, 80))
    u[10] = u[11] + 1e-8  # exercise the near-diagonal branch
    ai, aip = py.airy_table_eval(u, _TABLE_LO, _TABLE_H, _TABLE_AI, _TABLE_AIP)
    K1 = py.airy_kernel_matrix(u, ai, aip, 1e-6)
    K2 = cy.airy_kernel_matrix(u, ai, aip, 1e-6)
    assert np.max(np.abs(K1 - K2)) < 1e-15
    assert np.array_equal(K2, K2.T)


def test_theta_sum_parity():
    rng = np.random.default_rng(3)
    vecs = rng.integers(-4, 5, size=(60, 2)).astype(np.int64)
    w = rng.uniform(0, 1, 60)
    z = np.array([0.17, -0.42])
    assert py.theta_sum_real(w, vecs, z) == pytest.approx(cy.theta_sum_real(w, vecs, z), abs=1e-14)
    coef = w * np.exp(1j * rng.uniform(0, 6, 60))
    zc = np.array([0.1 + 0.05j, -0.3 + 0.02j])
    for odd in (False, True):
        assert abs(py.theta_pair_sum(coef, vecs, zc, odd) - cy.theta_pair_sum(coef, vecs, zc, odd)) < 1e-13


def test_backend_selection_via_environment():
    code = (
        "import airygap, airygap.fredholm as f;"
        "print(airygap.BACKEND, repr(f.log_gap_probability([(-2.0, -1.0)]).log_det))"
    )
    results = {}
    for flag in ("0", "1"):
        env = dict(os.environ, AIRYGAP_PURE_PYTHON=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        backend, value = out.stdout.split()
        results[backend] = float(value)
    assert set(results) == {"cython", "python"}
    assert results["cython"] == pytest.approx(results["python"], abs=1e-14)
