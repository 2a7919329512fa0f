import numpy as np
import pytest

from displab.harness import (
    SweepConfig,
    SweepRecord,
    TPolicy,
    direct_smoothing_record,
    fit_loglog,
    focusing_s_grid,
    random_band_upper_bound_check,
    run_sweep,
    verify_airy,
    verify_maximal_necessary,
    verify_sharpness,
)
from displab.norms import airy_exponent, smoothing_exponent


def records_from(lams, ratios):
    return [
        SweepRecord(lam=lam, points=8, half_width=1.0, t_count=1,
                    numerator=r, denominator=1.0, ratio=r)
        for lam, r in zip(lams, ratios)
    ]


def test_fit_exact_power_law():
    lams = [8.0, 16.0, 32.0, 64.0]
    fit = fit_loglog(records_from(lams, [lam**0.5 for lam in lams]))
    assert abs(fit.slope - 0.5) < 1e-12
    assert fit.max_residual < 1e-12


def test_fit_constant_ratios():
    fit = fit_loglog(records_from([8.0, 16.0, 32.0], [2.5, 2.5, 2.5]))
    assert abs(fit.slope) < 1e-13


def test_fit_against_lstsq_oracle(rng):
    lams = [8.0, 24.0, 80.0]
    ratios = [3.0, 1.2, 0.7]
    fit = fit_loglog(records_from(lams, ratios))
    x = np.log(lams)
    design = np.stack([x, np.ones(3)], axis=1)
    slope, intercept = np.linalg.lstsq(design, np.log(ratios), rcond=None)[0]
    assert fit.slope == pytest.approx(slope, abs=1e-12)
    assert fit.intercept == pytest.approx(intercept, abs=1e-12)


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_loglog(records_from([8.0], [1.0]))
    recs = records_from([8.0, 16.0], [1.0, 2.0])
    object.__setattr__(recs[0], "ratio", -1.0)
    with pytest.raises(ValueError):
        fit_loglog(recs)


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        SweepConfig("smoothing", 2.0, 2, 6.0, 0.0, (16.0,))  # dim != 1
    with pytest.raises(ValueError):
        SweepConfig("smoothing", 2.0, 1, 6.0, 0.0, (32.0, 16.0))  # not increasing
    with pytest.raises(ValueError):
        SweepConfig("airy", 2.0, 1, 6.0, 0.0, (16.0,))  # airy needs alpha = 3
    with pytest.raises(ValueError):
        SweepConfig("maximal", 2.0, 1, 6.0, 0.0, (16.0,))  # needs maximal norm kind
    with pytest.raises(ValueError):
        SweepRecord(16.0, 8, 1.0, 1, numerator=np.inf, denominator=1.0, ratio=1.0)


def test_single_scale_smoke():
    cfg = SweepConfig("smoothing", 2.0, 1, 6.0, 0.0, (16.0,))
    (rec,) = run_sweep(cfg)
    assert rec.ratio > 0 and np.isfinite(rec.ratio)
    assert rec.coverage == pytest.approx(1.0)  # lam^alpha fits inside the horizon


def test_focusing_s_grid_profile():
    pol = TPolicy()
    s = focusing_s_grid(16.0, 2.0, horizon=1e9, policy=pol)
    assert s[0] == pytest.approx(-256.0)
    assert s[-1] == 0.0
    assert np.all(np.diff(s) > 0)
    fine = s[s >= -4.0]
    assert fine.size >= pol.refined_count - 1


def test_denominator_scaling_slope():
    beta = 0.25
    cfg = SweepConfig("smoothing", 2.0, 1, 6.0, beta, (16.0, 32.0, 64.0, 128.0))
    recs = run_sweep(cfg)
    lams = np.array([r.lam for r in recs])
    dens = np.array([r.denominator for r in recs])
    slope = np.polyfit(np.log(lams), np.log(dens), 1)[0]
    predicted = beta + 1 - 2.0 / 2 + (2.0 - 1) / 6.0
    assert abs(slope - predicted) <= 0.1


def test_verdicts_require_enough_scales():
    cfg = SweepConfig("maximal", 3.0, 1, 6.0, 0.25, (16.0,), norm_kind="maximal")
    with pytest.raises(ValueError, match="4"):
        verify_maximal_necessary(cfg)


def test_verify_sharpness_requirements():
    cfg = SweepConfig("smoothing", 2.0, 1, 6.0, 0.0, (16.0, 32.0, 64.0, 128.0),
                      t_policy=TPolicy(focusing_refinement=False))
    with pytest.raises(ValueError, match="focusing"):
        verify_sharpness(cfg)
    cfg = SweepConfig("smoothing", 2.0, 1, 3.0, 0.0, (16.0, 32.0, 64.0, 128.0))
    with pytest.raises(ValueError, match="exceed"):
        verify_sharpness(cfg)


def test_determinism():
    cfg = SweepConfig("smoothing", 2.0, 1, 6.0, 1 / 3, (16.0, 32.0))
    a = run_sweep(cfg)
    b = run_sweep(cfg)
    for ra, rb in zip(a, b):
        assert ra == rb


def test_datum_rescale_leaves_ratio_invariant():
    lams = (16.0, 32.0)
    base = run_sweep(SweepConfig("smoothing", 2.0, 1, 6.0, 1 / 3, lams))
    scaled = run_sweep(SweepConfig("smoothing", 2.0, 1, 6.0, 1 / 3, lams, datum_scale=7.3))
    for rb, rs in zip(base, scaled):
        assert rs.ratio == pytest.approx(rb.ratio, rel=1e-12)
        assert rs.numerator == pytest.approx(7.3 * rb.numerator, rel=1e-12)
    scaled_max = run_sweep(
        SweepConfig("maximal", 3.0, 1, 6.0, 0.25, lams, norm_kind="maximal", datum_scale=3.1)
    )
    base_max = run_sweep(SweepConfig("maximal", 3.0, 1, 6.0, 0.25, lams, norm_kind="maximal"))
    for rb, rs in zip(base_max, scaled_max):
        assert rs.ratio == pytest.approx(rb.ratio, rel=1e-12)


@pytest.mark.slow
def test_rescaled_engine_matches_direct_route():
    """The unit-profile engine and an honest lam-scale grid agree."""
    cfg = SweepConfig("smoothing", 2.0, 1, 6.0, smoothing_exponent(2, 1, 6), (16.0,))
    rescaled = run_sweep(cfg)[0]
    direct = direct_smoothing_record(cfg, 16.0)
    assert direct.numerator == pytest.approx(rescaled.numerator, rel=1e-9)
    assert direct.denominator == pytest.approx(rescaled.denominator, rel=1e-9)


@pytest.mark.slow
def test_sobolev_denominator_agrees_in_slope():
    lams = (16.0, 32.0, 64.0, 128.0)
    beta = smoothing_exponent(2, 1, 6)
    plain = fit_loglog(run_sweep(SweepConfig("smoothing", 2.0, 1, 6.0, beta, lams)))
    bessel = fit_loglog(
        run_sweep(SweepConfig("smoothing", 2.0, 1, 6.0, beta, lams, use_sobolev_denominator=True))
    )
    assert abs(plain.slope - bessel.slope) <= 0.05


def test_subsequence_slope_consistency():
    lams = (16.0, 32.0, 64.0, 128.0, 256.0)
    recs = run_sweep(SweepConfig("smoothing", 2.0, 1, 6.0, smoothing_exponent(2, 1, 6), lams))
    full = fit_loglog(recs)
    for drop in range(len(recs)):
        sub = [r for i, r in enumerate(recs) if i != drop]
        fit = fit_loglog(sub)
        assert abs(fit.slope - full.slope) <= 2.0 * full.max_residual + 1e-9


@pytest.mark.slow
def test_verify_sharpness_all_betas():
    lams = (16.0, 32.0, 64.0, 128.0)
    beta_c = smoothing_exponent(2, 1, 6)
    for shift, expected in ((0.0, 0.0), (-0.2, 0.2), (0.2, -0.2)):
        verdict = verify_sharpness(
            SweepConfig("smoothing", 2.0, 1, 6.0, beta_c + shift, lams), tolerance=0.1
        )
        assert verdict.passed
        assert abs(verdict.slope - expected) <= 0.1


def test_verify_maximal_necessary_contract():
    cfg = SweepConfig("maximal", 3.0, 1, 6.0, 0.25, (16.0, 32.0, 64.0, 128.0),
                      norm_kind="maximal")
    verdict = verify_maximal_necessary(cfg, 0.1)
    assert verdict.passed
    assert verdict.slope >= -0.1  # boundary regularity: non-growing ratio
    assert verdict.fit.slope > 0.1  # weakened weight: strictly growing


@pytest.mark.slow
def test_verify_airy_contract():
    lams = (16.0, 32.0, 64.0, 128.0)
    verdict = verify_airy(SweepConfig("airy", 3.0, 1, 6.0, airy_exponent(6.0), lams), 0.1)
    assert verdict.passed and abs(verdict.slope) <= 0.1
    verdict = verify_airy(SweepConfig("airy", 3.0, 1, 6.0, 0.0, lams), 0.1)
    assert verdict.passed and abs(verdict.slope - 0.5) <= 0.1
    # boundary exponent: p = 4 sits at the zero of the endpoint formula
    verdict = verify_airy(SweepConfig("airy", 3.0, 1, 4.0, 0.0, lams), 0.1)
    assert verdict.passed and abs(verdict.slope) <= 0.1


@pytest.mark.slow
def test_random_band_upper_bound_spot_check():
    worst = random_band_upper_bound_check(2.0, 6.0, bands=(3, 4, 5))
    assert worst < 10.0  # stays O(1) across the bands


def test_focusing_window_lower_bound_slope():
    """Mixed norm restricted to |t-1| <= (10 lam^alpha)^-1 grows like lam^{d-(d+alpha)/p}."""
    from displab.extremizers import unit_annulus_field, unit_profile_grid
    from displab.norms import lp_norm as _lp
    from displab.propagator import DispersionParams, evolve
    from displab.spectral import to_physical

    alpha, p = 2.0, 6.0
    grid = unit_profile_grid(2**12)
    profile = unit_annulus_field(grid)
    params = DispersionParams(alpha, 1)
    s = np.linspace(-0.1, 0.0, 17)
    w = np.diff(np.concatenate([[-0.1], 0.5 * (s[1:] + s[:-1]), [0.0]]))
    vals = np.array(
        [_lp(to_physical(evolve(profile, float(si), params, headroom=0.0)), p) ** p for si in s]
    )
    window_integral = float(vals @ w)
    lams = np.array([16.0, 32.0, 64.0, 128.0])
    norms = lams ** (1 - 1 / p) * (lams**-alpha * window_integral) ** (1 / p)
    slope = np.polyfit(np.log(lams), np.log(norms), 1)[0]
    assert slope >= 1 - (1 + alpha) / p - 0.1


def test_memory_cap_names_smallest_failing_scale(monkeypatch):
    from displab.errors import SizingError

    monkeypatch.setenv("DISPLAB_MAX_GRID_POINTS", "4096")
    cfg = SweepConfig("smoothing", 3.0, 1, 6.0, 0.5, (16.0, 64.0, 256.0, 1024.0))
    with pytest.raises(SizingError, match="lam = "):
        run_sweep(cfg)


def test_worker_pool_is_deterministic(monkeypatch):
    cfg = SweepConfig("smoothing", 2.0, 1, 6.0, 1 / 3, (16.0, 32.0, 64.0))
    serial = run_sweep(cfg)
    monkeypatch.setenv("DISPLAB_MAX_WORKERS", "3")
    parallel = run_sweep(cfg)
    assert serial == parallel
