"""Report figures rendered alongside the delimited output."""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .laplace import g_density_grid

__all__ = ["render_report"]


def _save(fig, path):
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return str(path)


def render_report(out_dir, spec, v_series, ve_series, m_series, pred_series,
                  fit, mc=None):
    """Write the standard report figures; returns the list of paths."""
    out_dir = Path(out_dir)
    written = []

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.loglog(m_series.times, m_series.values, "o", ms=3, label="running mean")
    ax.loglog(pred_series.times, pred_series.values, "-",
              label="predicted level")
    w = (m_series.times >= fit.window[0]) & (m_series.times <= fit.window[1])
    ax.loglog(m_series.times[w], fit.predict(m_series.times[w]), "--",
              label=f"fit: t^{fit.exponent:+.3f}")
    ax.set_xlabel("t")
    ax.set_ylabel("running time-average")
    ax.set_title(f"{spec.kind} kernel: long-time mean decay")
    ax.legend(frameon=False)
    written.append(_save(fig, out_dir / "fig_cesaro.png"))

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.loglog(v_series.times, np.maximum(v_series.values, 1e-300), lw=1.2,
              label="v at probe")
    ax.loglog(ve_series.times, np.maximum(ve_series.values, 1e-300), lw=1.2,
              label="time-changed value")
    ax.set_xlabel("t")
    ax.set_ylabel("value")
    ax.set_title("probe histories")
    ax.legend(frameon=False)
    written.append(_save(fig, out_dir / "fig_series.png"))

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for t in (1.0, 10.0, 100.0):
        taus = np.linspace(0.0, 8.0 * max(t ** 0.5, 1.0), 300)
        dens = g_density_grid(spec, t, taus)
        ax.plot(taus, dens, lw=1.2, label=f"t = {t:g}")
    ax.set_xlabel("tau")
    ax.set_ylabel("first-passage density")
    ax.set_title("random-time densities")
    ax.set_xlim(left=0.0)
    ax.legend(frameon=False)
    written.append(_save(fig, out_dir / "fig_gdensity.png"))

    if mc is not None:
        fig, ax = plt.subplots(figsize=(5.4, 4.0))
        ax.errorbar([0.0], [mc["estimate"]], yerr=[3.0 * mc["se"]],
                    fmt="o", capsize=4, label="Monte Carlo (3 SE)")
        ax.axhline(mc["quadrature"], color="k", lw=1.0, label="quadrature")
        ax.set_xticks([])
        ax.set_ylabel(f"time-changed value at t = {mc['t']:g}")
        ax.set_title("stochastic cross-check")
        ax.legend(frameon=False)
        written.append(_save(fig, out_dir / "fig_mc.png"))
    return written
