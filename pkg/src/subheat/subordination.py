"""Random-time-change of a solution series and its long-time Cesaro behavior.

The subordinated value v^E(x,t) averages v(x, .) against the inverse-
subordinator density G_t; the Cesaro mean of v^E then decays at the rate
t^-1 K(1/t) set by the kernel class, with an explicit prefactor.  This
module computes the average, the Cesaro means, the predicted asymptotes,
decay-rate fits, and the memory-derivative residual check for the stable
class.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import roots_legendre

from . import kernels as kmod
from .kernels import eval_phi, svf_L
from .laplace import _g_engine, _check_density
from .series import AsymptoticFit, TimeSeries

__all__ = [
    "subordinate", "subordinate_many", "cesaro_mean", "cesaro_series",
    "predicted_asymptote", "predicted_band_n1", "fit_decay", "dk_apply",
    "CoverageError", "CesaroHeadWarning",
]


class CoverageError(ValueError):
    """The supplied series does not reach far enough for the quadrature."""


class CesaroHeadWarning(RuntimeWarning):
    pass


_GL8_X, _GL8_W = roots_legendre(8)


def tau_quadrature(spec, t, tau_cap=None, n_panels=240):
    """Panelized Gauss-Legendre nodes and weights covering the mass of G_t.

    The envelope exp(-tau * phi(1/t)) bounds the tail.  Geometric panels
    resolve the possible peak at tau = 0; for finite-mean subordinators a
    linear refinement straddles the concentration zone near t / phi'(0),
    whose width shrinks like sqrt(t) relative to its location.
    """
    phi_small = eval_phi(spec, min(1.0 / t, 0.5))
    tau_hi = 46.0 / phi_small
    if tau_cap is not None:
        tau_hi = min(tau_hi, tau_cap)
    tau_lo = tau_hi * 1e-9
    edges = np.concatenate([[0.0], np.geomspace(tau_lo, tau_hi, n_panels)])
    s_edge = kmod.left_abscissa(spec)
    if s_edge < 0.0:
        # curvature probe at the kernel's own scale (1/t would cancel away)
        eps = 1e-5 * abs(s_edge)
        d1 = eval_phi(spec, eps) / eps
        d2 = (eval_phi(spec, 2 * eps) - 2.0 * eval_phi(spec, eps)) / eps ** 2
        loc = t / d1
        sd = math.sqrt(max(t * abs(d2), 1e-300)) / d1 ** 1.5
        lo = max(loc - 10.0 * sd, 0.0)
        hi = min(loc + 10.0 * sd, tau_hi)
        if hi > lo and sd < 0.05 * loc:
            edges = np.concatenate([edges[(edges < lo) | (edges > hi)],
                                    np.linspace(lo, hi, 80)])
            edges = np.unique(edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    halfs = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mids[:, None] + halfs[:, None] * _GL8_X[None, :]).reshape(-1)
    wts = (halfs[:, None] * _GL8_W[None, :]).reshape(-1)
    return nodes, wts, tau_hi


def _coverage_guard(v_series, spec, t, nodes, wts, g_vals, integral):
    tau_end = v_series.times[-1]
    if tau_end >= nodes[-1]:
        return
    beyond = nodes > tau_end
    tail = float(np.sum(np.abs(wts[beyond] * g_vals[beyond]))) \
        * float(np.max(np.abs(v_series.values[-3:])))
    if tail > 1e-4 * max(abs(integral), 1e-300):
        raise CoverageError(
            f"series ends at tau={tau_end:g} but the weight still carries "
            f"~{tail:.2e} beyond it (integral {integral:.3e})")


def subordinate(v_series, spec, t):
    """v^E(t): average of the series against the random-time density G_t."""
    return subordinate_many(v_series, spec, [t])[0]


def subordinate_many(v_series, spec, ts):
    """Subordinated values at several times, one density table per time."""
    if np.any(v_series.values < 0.0):
        raise ValueError("series values must be nonnegative")
    out = np.empty(len(ts))
    for i, t in enumerate(np.asarray(ts, dtype=float)):
        if t <= 0.0:
            raise ValueError("t must be positive")
        nodes, wts, _ = tau_quadrature(spec, t)
        g_vals = _check_density(_g_engine(spec, t).values(nodes), scalar_input=False)
        v_vals = v_series.interp(np.maximum(nodes, v_series.times[0]))
        integral = float(np.sum(wts * g_vals * v_vals))
        _coverage_guard(v_series, spec, t, nodes, wts, g_vals, integral)
        out[i] = integral
    return out


def subordinated_series(v_series, spec, t_grid):
    return TimeSeries(np.asarray(t_grid, float),
                      subordinate_many(v_series, spec, t_grid), meaning="v_E")


def cesaro_mean(series, t):
    """Running time-average (1/t) integral_0^t of the series.

    Trapezoid on the log grid; the unresolved head [0, t_min] uses the first
    sample value and is flagged when it exceeds 1% of the total.
    """
    t = float(t)
    if t < series.times[0] or t > series.times[-1] * (1.0 + 1e-12):
        raise CoverageError(f"t={t:g} outside series coverage")
    keep = series.times <= t
    ts = series.times[keep]
    vs = series.values[keep]
    if ts[-1] < t:
        ts = np.append(ts, t)
        vs = np.append(vs, series.interp(t))
    total = float(np.trapezoid(vs, ts))
    head = series.values[0] * series.times[0]
    if abs(head) > 0.01 * max(abs(total + head), 1e-300):
        warnings.warn(f"unresolved head below t={series.times[0]:g} carries "
                      f"{head / (total + head):.1%} of the mean", CesaroHeadWarning)
    return (total + head) / t


def cesaro_series(series):
    """Cesaro means at every grid time (cumulative trapezoid plus head)."""
    cum = np.concatenate([[0.0], np.cumsum(
        0.5 * (series.values[1:] + series.values[:-1]) * np.diff(series.times))])
    head = series.values[0] * series.times[0]
    return TimeSeries(series.times, (cum + head) / series.times, meaning="cesaro")


def predicted_asymptote(spec, mass, t):
    """Class-specific long-time level of the Cesaro mean.

    ``mass`` is a heat.MassSummary (or any object with l1_time and
    l1_time_weighted).  For the inverse-gamma class with a > 0 the weighted
    norm is required and the level is flat in t.
    """
    t = float(t)
    if t <= 0.0:
        raise ValueError("t must be positive")
    kind = spec.kind
    if kind == kmod.STABLE:
        th = spec.param("theta")
        return mass.l1_time / gamma_fn(2.0 - th) * t ** (-th)
    if kind == kmod.DISTRIBUTED_ORDER:
        c, kappa = spec.param("c"), spec.param("kappa")
        return c * mass.l1_time * math.log(t) ** (-kappa)
    if kind == kmod.INVERSE_GAMMA:
        a, b = spec.param("a"), spec.param("b")
        if a > 0.0:
            w = getattr(mass, "l1_time_weighted", None)
            if w is None or not np.isfinite(w):
                raise ValueError("inverse-gamma prediction needs the "
                                 "exponentially weighted time norm")
            return 2.0 * math.sqrt(a * b) * w
        # a = 0 degenerates to the stable class with theta = 1/2
        return mass.l1_time / gamma_fn(1.5) * 2.0 * math.sqrt(2.0 * b) * t ** (-0.5)
    if kind == kmod.GAMMA:
        a, b = spec.param("a"), spec.param("b")
        return a / b * mass.l1_time / t
    if kind == kmod.TEMPERED_STABLE:
        th, be = spec.param("theta"), spec.param("beta")
        return th * be ** (th - 1.0) * mass.l1_time / t
    # distributed mu: ||v||_1 / Gamma(varrho+1) * int t^-alpha mu(alpha) dalpha
    mu = kmod._mu_weight_values(spec, kmod._GL_X)
    mix = float(np.sum(t ** (-kmod._GL_X) * mu * kmod._GL_W))
    return mass.l1_time / gamma_fn(spec.rv_index + 1.0) * mix


def predicted_band_n1(spec, s, t):
    """One-dimensional comparison function t^((varrho-1)/2s) L(t)^(1/2s) / Gamma(1+varrho).

    Valid for 1/2 <= s < 1 in one dimension; callers test that the ratio of
    the measured Cesaro mean to this stays inside a fixed window.
    """
    if not 0.5 <= s < 1.0:
        raise ValueError("the one-dimensional band needs 1/2 <= s < 1")
    t = float(t)
    rho = spec.rv_index
    return (t ** ((rho - 1.0) / (2.0 * s)) * svf_L(spec, t) ** (1.0 / (2.0 * s))
            / gamma_fn(1.0 + rho))


def fit_decay(series, window, model="pure_power"):
    """Least-squares decay fit on the log-log scale.

    pure_power:     log v = log A + p log t
    power_with_log: log v = log A + p log t - kappa log log t
    Needs at least eight samples in the window and positive values.
    """
    t_lo, t_hi = window
    sub = series.window(t_lo, t_hi)
    if len(sub) < 8:
        raise ValueError(f"window {window} holds only {len(sub)} samples; need 8")
    if np.any(sub.values <= 0.0):
        raise ValueError("decay fit needs positive values")
    ln_t = np.log(sub.times)
    ln_v = np.log(sub.values)
    if model == "pure_power":
        cols = np.column_stack([np.ones_like(ln_t), ln_t])
    elif model == "power_with_log":
        if np.any(sub.times <= 1.0):
            raise ValueError("log-corrected fit needs t > 1")
        cols = np.column_stack([np.ones_like(ln_t), ln_t, np.log(np.log(sub.times))])
    else:
        raise ValueError(f"unknown fit model {model!r}")
    coef, *_ = np.linalg.lstsq(cols, ln_v, rcond=None)
    resid = cols @ coef - ln_v
    max_rel = float(np.max(np.abs(np.expm1(resid))))
    kappa = -float(coef[2]) if model == "power_with_log" else 0.0
    return AsymptoticFit(float(coef[1]), kappa, float(math.exp(coef[0])),
                         (float(t_lo), float(t_hi)), max_rel, model)


# ----------------------------------------------------------------------
# memory-derivative (convolution) operator, stable class only
# ----------------------------------------------------------------------

def _frac_conv_integral(g_times, g_values, theta, t):
    """I(t) = int_0^t k(t-u) (g(u) - g(0)) du with k(u) = u^-theta/Gamma(1-theta).

    Piecewise-linear g against exact kernel moments, so the weak singularity
    integrates exactly.
    """
    keep = g_times <= t
    ts = g_times[keep]
    gs = g_values[keep]
    if ts[-1] < t:
        gs = np.append(gs, np.interp(t, g_times, g_values))
        ts = np.append(ts, t)
    d = gs - gs[0]
    om = 1.0 - theta
    w0 = (t - ts[:-1]) ** om
    w1 = (t - ts[1:]) ** om
    # exact moments of (t-u)^-theta over each panel for linear interpolants
    m0 = (w0 - w1) / om
    m1 = (w0 * (t - ts[:-1]) - w1 * (t - ts[1:])) / (om + 1.0)
    lo, hi = d[:-1], d[1:]
    slope = (hi - lo) / np.diff(ts)
    # int (t-u)^-theta [lo + slope (u - u_lo)] du
    vals = lo * m0 + slope * ((t - ts[:-1]) * m0 - m1)
    return float(vals.sum()) / gamma_fn(1.0 - theta)


def dk_apply(g_series, spec, t, rel_step=1e-3, g_at_zero=None):
    """Memory derivative d/dt int_0^t k(t-u)(g(u)-g(0)) du for the stable class.

    Product-integration quadrature for the singular convolution, then a
    central difference in t.  ``g_at_zero`` supplies the initial value g(0)
    (the first sample is used when omitted); a wrong initial value shifts
    the result by (g(0+) - g(0)) k(t).  Raises when halving the sample
    density moves the answer by more than 1%.
    """
    if spec.kind != kmod.STABLE:
        raise kmod.UnsupportedKernelFormError(
            "the convolution-derivative check is implemented for the stable "
            "class only")
    theta = spec.param("theta")
    t = float(t)
    if not g_series.times[0] < t <= g_series.times[-1]:
        raise CoverageError("t must lie inside the sample grid")
    h = rel_step * t
    g_times = g_series.times
    g_values = g_series.values
    if g_at_zero is not None:
        g_times = np.concatenate([[0.0], g_times])
        g_values = np.concatenate([[float(g_at_zero)], g_values])

    def deriv(times, values):
        ip = _frac_conv_integral(times, values, theta, t + h)
        im = _frac_conv_integral(times, values, theta, t - h)
        return (ip - im) / (2.0 * h)

    base = deriv(g_times, g_values)
    # resolution estimate: halving the sample density must not move the
    # answer; the polyline itself is already integrated exactly
    half_idx = np.unique(np.concatenate([np.arange(0, len(g_times), 2),
                                         [len(g_times) - 1]]))
    halved = deriv(g_times[half_idx], g_values[half_idx])
    if abs(halved - base) > 0.01 * max(abs(base), 1e-300):
        raise CoverageError(
            f"sample grid too coarse near t={t:g}: halving the density moved "
            f"the value from {base:.6e} to {halved:.6e}")
    return base
