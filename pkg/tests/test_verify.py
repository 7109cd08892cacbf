import json
import math

import numpy as np
import pytest

from airygap import verify
from airygap.asympt import IntervalConfig
from airygap.errors import (
    AliasingError,
    DomainError,
    InsufficientDataError,
    NearSingularError,
)
from airygap.verify import (
    CSV_HEADER,
    VerificationReport,
    check_oscillation,
    decay_exponent_loglog,
    default_r_grid,
    fit_constant,
    fit_decay_exponent,
    largest_safe_r,
    resolve_threads,
    run_verification,
    safe_r_window,
)

CFG = IntervalConfig(1, (-1.0, -2.0))


@pytest.fixture(scope="module")
def report():
    return run_verification(CFG, threads=2)


def test_fit_constant_exact_offset():
    r = np.linspace(2, 5, 8)
    pred = -0.2 * r**3
    C, res = fit_constant(r, pred + 7.0, pred)
    assert C == pytest.approx(7.0, abs=1e-13)
    assert np.max(np.abs(res)) < 1e-13


def test_fit_constant_decaying_error():
    pred = np.zeros(8)
    grids = [np.linspace(2, 4, 8), np.linspace(6, 12, 8)]
    Cs = []
    for r in grids:
        C, res = fit_constant(r, 7.0 + r**-1.5, pred)
        Cs.append(C)
    assert abs(Cs[1] - 7.0) < abs(Cs[0] - 7.0)
    C, res = fit_constant(grids[1], 7.0 + grids[1] ** -1.5, pred)
    assert abs(res[-1]) < grids[1][-1] ** -1.5


def test_fit_constant_validation():
    with pytest.raises(InsufficientDataError):
        fit_constant([1, 2, 3], [0, 0, 0], [0, 0, 0])
    with pytest.raises(DomainError):
        fit_constant([1, 2, 3, 4], [0, 0, -600, 0], [0, 0, 0, 0])
    with pytest.raises(DomainError):
        fit_constant([1, 2, 3, 4], [0, 0, 0], [0, 0, 0, 0])
    with pytest.raises(DomainError):
        fit_constant([1, 2, 3, 4], [0, 0, math.nan, 0], [0, 0, 0, 0])


def test_decay_exponent_recovers_synthetic_model():
    r = np.linspace(2, 4.5, 8)
    nu = -2.4 * r**1.5 / (2 * math.pi)
    d = -0.31 + r**-1.5 * (0.04 - 0.02 * np.cos(2 * math.pi * nu) - 0.04 * np.sin(2 * math.pi * nu))
    assert fit_decay_exponent(r, d, nu) == pytest.approx(-1.5, abs=1e-4)
    # without oscillation the plain model is used
    assert fit_decay_exponent(r, 3.0 + 0.5 * r**-2.0) == pytest.approx(-2.0, abs=1e-4)


def test_decay_exponent_loglog_on_clean_power_law():
    r = np.linspace(2, 6, 10)
    assert decay_exponent_loglog(r, 0.1 * r**-1.5) == pytest.approx(-1.5, abs=1e-10)
    assert math.isnan(decay_exponent_loglog(r, np.zeros_like(r)))


def test_windows(sd_g1):
    lo, hi = safe_r_window(sd_g1)
    assert abs(sd_g1.c) * lo**3 == pytest.approx(1.5)
    assert abs(sd_g1.c) * hi**3 == pytest.approx(17.0)
    assert 1.99 < lo < 2.0 and 4.48 < hi < 4.5
    grid = default_r_grid(sd_g1)
    assert grid.size == 8 and grid[0] == pytest.approx(lo)
    assert abs(sd_g1.c) * largest_safe_r(sd_g1) ** 3 == pytest.approx(verify.MAX_SAFE_CUBIC)


def test_report_contents(report):
    n = len(report.r_grid)
    assert n == 8
    for name in ("logF_num", "err_estimate", "predicted_no_C", "residuals"):
        assert len(getattr(report, name)) == n
    assert all(b > a for a, b in zip(report.r_grid, report.r_grid[1:]))
    res = np.array(report.logF_num) - np.array(report.predicted_no_C) - report.C_fit
    np.testing.assert_allclose(report.residuals, res, atol=1e-14)
    assert report.max_abs_residual < 0.05
    assert report.max_abs_residual < report.max_abs_residual_without_theta
    assert -2.5 <= report.decay_exponent_fit <= -1.0
    assert report.C_fit == pytest.approx(-0.313, abs=0.01)
    assert not report.partial and report.notes == ()


def test_report_json_round_trip(report):
    again = VerificationReport.from_json(report.to_json())
    assert again == report
    data = json.loads(report.to_json())
    assert data["partial"] is False and data["cfg"] == {"g": 1, "x": [-1.0, -2.0]}


def test_report_csv(report):
    text = report.to_csv()
    lines = text.split("\n")
    assert lines[0] == CSV_HEADER
    assert text.endswith("\n") and "\r" not in text
    first = [float(v) for v in lines[1].split(",")]
    assert first[0] == report.r_grid[0] and first[1] == report.logF_num[0]


def test_determinism_across_thread_counts(report):
    again = run_verification(CFG, threads=1)
    assert again == report


def test_scaled_config_shifts_window(report):
    scaled = run_verification(IntervalConfig(1, (-0.5, -1.0)))
    np.testing.assert_allclose(np.array(scaled.r_grid) / 2, report.r_grid, rtol=1e-12)
    np.testing.assert_allclose(scaled.residuals, report.residuals, atol=1e-8)


def test_genus2_pipeline():
    rep = run_verification(IntervalConfig(2, (-1.0, -2.0, -3.0, -4.0)))
    assert rep.max_abs_residual < rep.max_abs_residual_without_theta
    assert any("Diophantine" in n for n in rep.notes)


def test_check_oscillation_rejects_coarse_grid(sd_g1):
    r = np.linspace(2, 4.5, 6)
    with pytest.raises(AliasingError):
        check_oscillation(sd_g1, r, np.zeros_like(r))


def test_check_oscillation_on_synthetic_theta(sd_g1):
    r = np.linspace(2, 4.5, 40)
    lt = verify._log_theta_values(sd_g1, r)
    diag = check_oscillation(sd_g1, r, lt + 0.001 * r**-1.5)
    assert diag.period_ratio == pytest.approx(1.0, abs=0.02)
    assert diag.max_dev_with_theta < diag.max_dev_without_theta
    assert diag.max_dev_without_theta >= diag.theta_amplitude * 0.9


def test_grid_validation(sd_g1):
    with pytest.raises(InsufficientDataError):
        run_verification(CFG, [2.0, 3.0, 4.0], sd=sd_g1)
    with pytest.raises(DomainError) as info:
        run_verification(CFG, [2.0, 3.0, 3.0, 4.0], sd=sd_g1)
    assert info.value.stage == "grid" and str(info.value).startswith("[grid]")
    with pytest.raises(DomainError, match="largest safe r"):
        run_verification(CFG, np.linspace(2, 9, 8), sd=sd_g1)


def test_partial_sweep_is_attached(monkeypatch, sd_g1):
    real = verify.gap_probability_scaled

    def flaky(cfg, r, order):
        if r > 4.0:
            raise NearSingularError("synthetic failure")
        return real(cfg, r, order)

    monkeypatch.setattr(verify, "gap_probability_scaled", flaky)
    with pytest.raises(NearSingularError) as info:
        run_verification(CFG, sd=sd_g1, threads=1)
    exc = info.value
    assert exc.stage == "fredholm"
    part = exc.partial_report
    assert part.partial and 0 < len(part.r_grid) < 8
    assert max(part.r_grid) <= 4.0
    assert json.loads(part.to_json())["partial"] is True


def test_resolve_threads(monkeypatch):
    monkeypatch.setenv("AIRYGAP_THREADS", "2")
    assert resolve_threads(8) == 2
    assert resolve_threads(1) == 1
    monkeypatch.setenv("AIRYGAP_THREADS", "zero")
    with pytest.raises(DomainError):
        resolve_threads(4)
    monkeypatch.setenv("AIRYGAP_THREADS", "0")
    with pytest.raises(DomainError):
        resolve_threads(4)
    monkeypatch.delenv("AIRYGAP_THREADS")
    assert resolve_threads(3) == 3
