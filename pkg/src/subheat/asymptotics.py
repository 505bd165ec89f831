"""Tauberian machinery checks: transform-side vs time-side regular variation.

A monotone function growing like t^rho L(t) has a Laplace transform growing
like lambda^-(1+rho) L(1/lambda) near zero with a Gamma-factor linking the
two constants; these routines measure both sides numerically.  The
truncated power-exponential integral needed by the one-dimensional band
argument gets its own quadrature-vs-prediction comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from .laplace import forward_laplace

__all__ = [
    "MonotoneFn", "karamata_pair_check", "incomplete_gamma_F",
    "incomplete_gamma_predicted", "svf_ratio_test",
]


@dataclass
class MonotoneFn:
    """A nondecreasing right-continuous function with declared growth data."""

    fn: callable
    rho: float
    svf: callable = None
    check_grid: np.ndarray = field(
        default_factory=lambda: np.geomspace(0.1, 1e4, 40))

    def __post_init__(self):
        vals = np.array([self.fn(t) for t in self.check_grid])
        if np.any(np.diff(vals) < -1e-12 * np.maximum(np.abs(vals[:-1]), 1.0)):
            raise ValueError("function is not numerically nondecreasing")

    def __call__(self, t):
        return self.fn(t)


@dataclass
class KaramataReport:
    lambdas: np.ndarray
    transform_ratios: np.ndarray       # L(U)(lam) lam^(1+rho) / L(1/lam)
    times: np.ndarray
    time_ratios: np.ndarray            # U(t) Gamma(rho+1) / (t^rho L(t))
    transform_constant: float
    time_constant: float

    @property
    def consistency(self):
        """Relative gap between the two measured constants."""
        return abs(self.transform_constant / self.time_constant - 1.0)


def karamata_pair_check(U, rho=None, svf=None,
                        lambdas=None, times=None):
    """Measure both sides of the transform/time-side correspondence.

    The transform-side ratio L(U)(lam) * lam^(1+rho) / L(1/lam) and the
    time-side ratio U(t) * Gamma(rho+1) / (t^rho L(t)) must approach the
    same constant.
    """
    if isinstance(U, MonotoneFn):
        fn = U.fn
        rho = U.rho if rho is None else rho
        svf = U.svf if svf is None else svf
    else:
        fn = U
    if rho is None:
        raise ValueError("rho is required")
    L = svf if svf is not None else (lambda x: 1.0)
    lambdas = np.asarray(lambdas if lambdas is not None
                         else 10.0 ** -np.arange(1, 5, dtype=float))
    times = np.asarray(times if times is not None
                       else 10.0 ** np.arange(1, 5, dtype=float))
    # sanity: transformable at lam = 1
    forward_laplace(fn, 1.0, tail_exponent=rho)

    tr = np.array([forward_laplace(fn, lam, tail_exponent=rho)
                   * lam ** (1.0 + rho) / L(1.0 / lam) for lam in lambdas])
    tm = np.array([fn(t) * gamma_fn(rho + 1.0) / (t ** rho * L(t))
                   for t in times])
    return KaramataReport(lambdas, tr, times, tm, float(tr[-1]), float(tm[-1]))


def incomplete_gamma_F(theta, eps):
    """Quadrature value of int_1^inf tau^-theta exp(-eps tau) dtau."""
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    eps = float(eps)
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    hi = 1.0 + 46.0 / eps
    val, _ = quad(lambda u: u ** (-theta) * math.exp(-eps * u), 1.0, hi,
                  limit=400, points=[min(1.0 / eps, hi)] if eps < 1 else None)
    return val


def incomplete_gamma_predicted(theta, eps):
    """Small-eps prediction eps^(theta-1) Gamma(1-theta) for the integral."""
    return float(eps) ** (theta - 1.0) * gamma_fn(1.0 - theta)


@dataclass
class SvfRatioReport:
    x_grid: np.ndarray
    c_set: tuple
    ratios: dict                 # c -> |L(cx)/L(x) - 1| over the grid
    monotone_beyond: dict        # c -> decreasing beyond x = 1e4
    passed: bool

    def to_dict(self):
        return {
            "x_grid": [float(x) for x in self.x_grid],
            "ratios": {str(c): [float(x) for x in v]
                       for c, v in self.ratios.items()},
            "monotone_beyond": {str(c): bool(v)
                                for c, v in self.monotone_beyond.items()},
            "passed": bool(self.passed),
        }

    def to_csv(self, path):
        cols = [self.x_grid] + [self.ratios[c] for c in self.c_set]
        header = ",".join(["x"] + [f"ratio_c{c:g}" for c in self.c_set])
        np.savetxt(path, np.column_stack(cols), delimiter=",",
                   header=header, comments="", fmt="%.17g")


def svf_ratio_test(L, x_grid=None, c_set=(2.0, 10.0), onset=1e4):
    """Slow-variation diagnostic: L(cx)/L(x) - 1 must fall to zero.

    Passes when each c-column decreases monotonically toward zero beyond
    the onset scale.
    """
    x_grid = np.asarray(x_grid if x_grid is not None
                        else 10.0 ** np.arange(2, 9, dtype=float))
    ratios, monotone = {}, {}
    for c in c_set:
        r = np.array([abs(L(c * x) / L(x) - 1.0) for x in x_grid])
        ratios[c] = r
        tail = r[x_grid >= onset]
        if len(tail) < 2 or tail[-1] < 1e-6:
            # already at (or below the rounding noise of) the limit
            ok = bool(r[-1] < 1e-6)
        else:
            ok = bool(np.all(np.diff(tail) <= 1e-15)
                      and tail[-1] <= 0.7 * tail[0])
        monotone[c] = ok
    passed = all(monotone.values())
    return SvfRatioReport(x_grid, tuple(c_set), ratios, monotone, passed)
