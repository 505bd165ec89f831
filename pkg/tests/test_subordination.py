import math

import numpy as np
import pytest
from scipy.special import erfc
from scipy.special import gamma as gamma_fn

from subheat.heat import MassSummary
from subheat.kernels import KernelSpec, UnsupportedKernelFormError
from subheat.laplace import g_density_grid
from subheat.series import TimeSeries
from subheat.subordination import (
    CesaroHeadWarning, CoverageError, cesaro_mean, cesaro_series, dk_apply,
    fit_decay, predicted_asymptote, predicted_band_n1, subordinate,
    subordinate_many, tau_quadrature,
)


def mass_summary(l1=1.0, weighted=None, m=1.0):
    return MassSummary(m, l1, weighted if weighted is not None else l1,
                       0.0, np.zeros(2), 10.0)


def flat_series(value=1.0, hi=5e3):
    taus = np.geomspace(1e-6, hi, 400)
    return TimeSeries(taus, np.full_like(taus, value))


def test_subordinate_transports_constants():
    spec = KernelSpec.stable(0.4)
    assert subordinate(flat_series(), spec, 5.0) == pytest.approx(1.0, abs=1e-5)
    assert subordinate(flat_series(3.5), spec, 2.0) == pytest.approx(3.5, rel=1e-5)


def test_subordinate_mittag_leffler_identity():
    """exp(-tau) series: the time-changed value is the one-parameter
    Mittag-Leffler function at -t^theta, via the erfc closed form."""
    taus = np.geomspace(1e-8, 300.0, 4000)
    series = TimeSeries(taus, np.exp(-taus))
    spec = KernelSpec.stable(0.5)
    for t in (1.0, 4.0):
        x = math.sqrt(t)
        target = math.exp(x * x) * erfc(x)
        assert subordinate(series, spec, t) == pytest.approx(target, rel=1e-5)


def test_subordinate_monotone_comparison():
    taus = np.geomspace(1e-6, 3e3, 300)
    lo = TimeSeries(taus, 1.0 / (1.0 + taus))
    hi = TimeSeries(taus, 1.2 / (1.0 + 0.5 * taus))
    spec = KernelSpec.stable(0.6)
    for t in (0.5, 3.0, 20.0):
        assert subordinate(lo, spec, t) <= subordinate(hi, spec, t)


def test_subordinate_rejects_negative_series():
    taus = np.geomspace(0.1, 10.0, 50)
    series = TimeSeries(taus, np.sin(taus))
    with pytest.raises(ValueError):
        subordinate(series, KernelSpec.stable(0.5), 1.0)


def test_subordinate_coverage_guard():
    taus = np.geomspace(1e-4, 2.0, 60)   # far too short for t = 100
    series = TimeSeries(taus, np.full_like(taus, 1.0))
    with pytest.raises(CoverageError):
        subordinate(series, KernelSpec.stable(0.5), 100.0)


def test_subordinate_linearity():
    taus = np.geomspace(1e-6, 3e3, 300)
    f = TimeSeries(taus, np.exp(-taus))
    g = TimeSeries(taus, 1.0 / (1.0 + taus))
    both = TimeSeries(taus, 2.0 * np.exp(-taus) + 3.0 / (1.0 + taus))
    spec = KernelSpec.stable(0.5)
    t = 2.0
    lhs = subordinate(both, spec, t)
    rhs = 2.0 * subordinate(f, spec, t) + 3.0 * subordinate(g, spec, t)
    # power-segment interpolation of a sum differs from the sum of the
    # interpolants at the interpolation-error level
    assert lhs == pytest.approx(rhs, rel=5e-4)


def test_cesaro_constant_and_linear():
    taus = np.geomspace(1e-4, 10.0, 600)
    const = TimeSeries(taus, np.ones_like(taus))
    assert cesaro_mean(const, 5.0) == pytest.approx(1.0, rel=1e-6)
    lin = TimeSeries(taus, taus)
    assert cesaro_mean(lin, 2.0) == pytest.approx(1.0, rel=1e-4)


def test_cesaro_exponential():
    taus = np.geomspace(1e-5, 4.0, 2000)
    series = TimeSeries(taus, np.exp(-taus))
    assert cesaro_mean(series, 2.0) == pytest.approx(0.43233235838169365,
                                                     rel=1e-5)


def test_cesaro_head_flag():
    taus = np.geomspace(0.5, 10.0, 40)   # coarse head: first sample carries >1%
    series = TimeSeries(taus, np.ones_like(taus))
    with pytest.warns(CesaroHeadWarning):
        cesaro_mean(series, 2.0)


def test_cesaro_coverage():
    taus = np.geomspace(0.1, 10.0, 50)
    series = TimeSeries(taus, np.ones_like(taus))
    with pytest.raises(CoverageError):
        cesaro_mean(series, 50.0)


def test_cesaro_series_matches_pointwise():
    taus = np.geomspace(1e-4, 100.0, 300)
    series = TimeSeries(taus, 1.0 / (1.0 + taus))
    cs = cesaro_series(series)
    for i in (50, 150, 299):
        assert cs.values[i] == pytest.approx(cesaro_mean(series, taus[i]),
                                             rel=1e-12)


def test_cesaro_two_route_consistency():
    """Averaging the time-changed series equals averaging the density first
    (the double integral computed in either order)."""
    spec = KernelSpec.stable(0.5)
    taus = np.geomspace(1e-6, 400.0, 400)
    v = TimeSeries(taus, np.exp(-taus))
    t = 10.0
    # route 1: Cesaro of the subordinated series
    tg = np.geomspace(1e-3, t, 400)
    ve = TimeSeries(tg, subordinate_many(v, spec, tg))
    route1 = cesaro_mean(ve, t)
    # route 2: v against the time-averaged density, nodes shared per s
    n_s = 200
    sg = (np.arange(n_s) + 0.5) * (t / n_s)
    nodes, wts, _ = tau_quadrature(spec, t)
    g_avg = np.zeros_like(nodes)
    for s_val in sg:
        g_avg += g_density_grid(spec, s_val, nodes)
    g_avg /= n_s
    route2 = float(np.sum(wts * g_avg * v.interp(np.maximum(nodes, taus[0]))))
    assert route1 == pytest.approx(route2, rel=1e-3)


def test_predicted_asymptote_stable_row():
    spec = KernelSpec.stable(0.5)
    val = predicted_asymptote(spec, mass_summary(l1=1.0), 100.0)
    assert val == pytest.approx(0.11283791670955128, rel=1e-12)


def test_predicted_asymptote_tempered_row():
    spec = KernelSpec.tempered_stable(0.5, 1.0)
    val = predicted_asymptote(spec, mass_summary(l1=2.0), 10.0)
    assert val == pytest.approx(0.1, rel=1e-12)


def test_predicted_asymptote_inverse_gamma_row():
    spec = KernelSpec.inverse_gamma(1.0, 1.0)
    ms = mass_summary(l1=math.inf, weighted=0.3)
    for t in (1.0, 100.0, 1e6):
        assert predicted_asymptote(spec, ms, t) == pytest.approx(0.6, rel=1e-12)
    bad = mass_summary(l1=1.0, weighted=math.inf)
    with pytest.raises(ValueError):
        predicted_asymptote(spec, bad, 10.0)


def test_predicted_asymptote_gamma_row():
    spec = KernelSpec.gamma(2.0, 4.0)
    val = predicted_asymptote(spec, mass_summary(l1=3.0), 10.0)
    assert val == pytest.approx(2.0 / 4.0 * 3.0 / 10.0, rel=1e-12)


def test_predicted_asymptote_distributed_order_row():
    spec = KernelSpec.distributed_order(2.0, 1.5)
    val = predicted_asymptote(spec, mass_summary(l1=1.0), 1e4)
    assert val == pytest.approx(2.0 * math.log(1e4) ** -1.5, rel=1e-12)


def test_predicted_band_forms():
    # stable: rho = 1 - theta, unit slowly varying part
    spec = KernelSpec.stable(0.5)
    s = 0.75
    for t in (10.0, 1000.0):
        target = t ** (-0.5 / (2 * s)) / gamma_fn(1.5)
        assert predicted_band_n1(spec, s, t) == pytest.approx(target, rel=1e-12)
    # gamma class: rho = 0, L(t) = a t ln(1 + 1/(b t)) -> net t^-1 L^(1/2s)
    g = KernelSpec.gamma(1.0, 1.0)
    t = 1e4
    target = t ** (-1.0 / (2 * s)) * (t * math.log1p(1.0 / t)) ** (1.0 / (2 * s))
    assert predicted_band_n1(g, s, t) == pytest.approx(target, rel=1e-10)
    with pytest.raises(ValueError):
        predicted_band_n1(spec, 0.3, 10.0)


def test_fit_decay_exact_power():
    t = np.geomspace(1.0, 1e6, 200)
    series = TimeSeries(t, 3.0 * t ** -0.5)
    fit = fit_decay(series, (10.0, 1e6))
    assert fit.exponent == pytest.approx(-0.5, abs=1e-3)
    assert fit.prefactor == pytest.approx(3.0, rel=1e-3)
    assert fit.max_residual < 1e-10


def test_fit_decay_log_correction():
    t = np.geomspace(1e3, 1e6, 120)
    series = TimeSeries(t, 2.0 * np.log(t) ** -2.0)
    fit = fit_decay(series, (1e3, 1e6), model="power_with_log")
    assert fit.log_correction_kappa == pytest.approx(2.0, abs=0.05)
    assert abs(fit.exponent) < 0.01


def test_fit_decay_noisy_power():
    rng = np.random.default_rng(42)
    t = np.geomspace(1e2, 1e5, 150)
    vals = 1.7 * t ** -0.8 * np.exp(rng.normal(0.0, 0.01, t.size))
    fit = fit_decay(TimeSeries(t, vals), (1e2, 1e5))
    assert fit.exponent == pytest.approx(-0.8, abs=0.02)


def test_fit_decay_guards():
    t = np.geomspace(1.0, 100.0, 30)
    series = TimeSeries(t, t ** -1.0)
    with pytest.raises(ValueError):
        fit_decay(series, (90.0, 100.0))       # too few samples
    bad = TimeSeries(t, t ** -1.0 - 0.5)
    with pytest.raises(ValueError):
        fit_decay(bad, (1.0, 100.0))           # nonpositive values


def test_dk_apply_linear_function():
    """Memory derivative of g(u) = u is u^(1-theta)/Gamma(2-theta)."""
    spec = KernelSpec.stable(0.5)
    u = np.linspace(1e-4, 2.0, 2000)
    series = TimeSeries(u, u.copy())
    val = dk_apply(series, spec, 1.0)
    assert val == pytest.approx(1.1283791670955126, rel=1e-4)


def test_dk_apply_constant_is_zero():
    spec = KernelSpec.stable(0.5)
    u = np.linspace(1e-4, 2.0, 500)
    series = TimeSeries(u, np.full_like(u, 2.7))
    assert dk_apply(series, spec, 1.0) == pytest.approx(0.0, abs=1e-12)


def test_dk_apply_quadratic_oracle():
    # d/dt int k(t-u) u^2 du = 2 t^(2-theta)/Gamma(3-theta)
    theta = 0.5
    spec = KernelSpec.stable(theta)
    u = np.linspace(1e-4, 2.0, 3000)
    series = TimeSeries(u, u ** 2)
    target = 2.0 * 1.5 ** (2 - theta) / gamma_fn(3.0 - theta)
    assert dk_apply(series, spec, 1.5) == pytest.approx(target, rel=1e-4)


def test_dk_apply_guards():
    spec = KernelSpec.stable(0.5)
    u = np.linspace(1e-4, 2.0, 2000)
    series = TimeSeries(u, u.copy())
    with pytest.raises(UnsupportedKernelFormError):
        dk_apply(series, KernelSpec.gamma(1.0, 1.0), 1.0)
    with pytest.raises(CoverageError):
        dk_apply(series, spec, 5.0)
    uc = np.linspace(0.05, 1.6, 9)
    coarse = TimeSeries(uc, np.exp(3.0 * uc))   # strongly curved, 9 samples
    with pytest.raises(CoverageError):
        dk_apply(coarse, spec, 1.0)
