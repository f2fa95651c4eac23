"""Matplotlib renderings written next to the delimited outputs.

Every CLI command that produces a table also drops a PNG of the obvious
plot: space-time heatmaps for simulations, the U-shaped threshold curve for
Turing scans, the curve arrangement in the (b, beta) plane for bifurcation
diagrams, and so on.  These are presentation artifacts; the CSV/JSON files
stay the authoritative, byte-reproducible outputs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .pde import Grid1D, SimulationResult
from .spectral import SpectralMode, TuringThresholds, Deltas, _r1_threshold

__all__ = [
    "heatmap_figure",
    "threshold_figure",
    "dispersion_figure",
    "bifdiagram_figure",
    "hopf_curve_figure",
    "sweep_figure",
    "turing_turing_figure",
]

_DPI = 130


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def heatmap_figure(path, result: SimulationResult, grid: Grid1D,
                   which: str = "I", max_rows: int = 2000) -> Path:
    states = result.states
    step = max(1, -(-len(states) // max_rows))
    picked = states[::step]
    data = np.stack([getattr(s, which) for s in picked])
    ts = [s.t for s in picked]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    im = ax.imshow(data, origin="lower", aspect="auto", cmap="viridis",
                   extent=(0.0, grid.ell * np.pi, ts[0], ts[-1]))
    fig.colorbar(im, ax=ax, label=which)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(f"{which}(x, t)")
    return _save(fig, path)


def threshold_figure(path, th: TuringThresholds, deltas: Deltas,
                     ell: float, r2: float) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if not th.stable:
        kk = np.linspace(0.35, th.k_bar + 0.6, 400)
        kk = kk[(kk / ell) ** 2 * r2 < deltas.d4]
        ax.plot(kk, [_r1_threshold(deltas, ell, r2, k) for k in kk],
                "--", color="tab:blue", lw=1.2, label="continuous threshold")
        ks = [k for k, _ in th.table]
        rs = [r for _, r in th.table]
        ax.plot(ks, rs, "o", color="tab:red", label="mode thresholds")
        ax.set_ylim(0, max(rs) * 1.15)
        ax.axvline(th.k_hat, color="gray", lw=0.6, ls=":")
    ax.set_xlabel("mode k")
    ax.set_ylabel(r"critical $r_1$")
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def dispersion_figure(path, modes: list[SpectralMode]) -> Path:
    ks = [m.k for m in modes]
    re = [m.max_real_part for m in modes]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.axhline(0.0, color="gray", lw=0.6)
    ax.plot(ks, re, "o-", ms=4)
    ax.set_xlabel("mode k")
    ax.set_ylabel(r"max Re $\lambda(k)$")
    return _save(fig, path)


def bifdiagram_figure(path, curves: dict[str, list[tuple[float, float]]],
                      points: dict[str, tuple[float, float]]) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    styles = {"C0": ("k-", 1.0), "C1": ("g--", 1.0),
              "CDelta+": ("b-", 1.0), "CDelta-": ("b:", 0.8), "H": ("r-", 1.3)}
    for tag, pts in curves.items():
        if not pts:
            continue
        st, lw = styles.get(tag, ("m-", 1.0))
        bs, betas = zip(*pts)
        ax.plot(bs, betas, st, lw=lw, label=tag)
    for name, (b, beta) in points.items():
        ax.plot([b], [beta], "k*", ms=9)
        ax.annotate(name, (b, beta), textcoords="offset points",
                    xytext=(4, 4), fontsize=8)
    ax.set_xlabel("b")
    ax.set_ylabel(r"$\beta$")
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def hopf_curve_figure(path, pts: list, gh: tuple[float, float] | None) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if pts:
        bs = [p.b for p in pts]
        betas = [p.beta for p in pts]
        l1 = np.array([p.diagnostics["L1"] for p in pts])
        ax.scatter(bs, betas, c=np.where(l1 < 0, "tab:blue", "tab:red"), s=12)
        ax.plot([], [], "o", color="tab:blue", label="L1 < 0 (supercritical)")
        ax.plot([], [], "o", color="tab:red", label="L1 > 0 (subcritical)")
    if gh is not None:
        ax.plot([gh[0]], [gh[1]], "k*", ms=12, label="GH")
    ax.set_xlabel("b")
    ax.set_ylabel(r"$\beta$")
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def sweep_figure(path, axis1_vals, axis2_vals, matrix, label: str) -> Path:
    fig, ax = plt.subplots(figsize=(6.2, 4.6))
    arr = np.asarray(matrix, dtype=float)
    if axis2_vals is None or len(axis2_vals) == 0:
        ax.plot(axis1_vals, arr.ravel(), "o-")
        ax.set_ylabel(label)
    else:
        im = ax.imshow(arr, origin="lower", aspect="auto",
                       extent=(axis1_vals[0], axis1_vals[-1],
                               axis2_vals[0], axis2_vals[-1]),
                       cmap="viridis")
        fig.colorbar(im, ax=ax, label=label)
    ax.set_xlabel("axis 1")
    if axis2_vals is not None and len(axis2_vals):
        ax.set_ylabel("axis 2")
    return _save(fig, path)


def turing_turing_figure(path, deltas: Deltas, ell: float,
                         r2_range: tuple[float, float], gamma_minus: float,
                         points: list[dict], k_max: int = 8) -> Path:
    fig, ax = plt.subplots(figsize=(6.2, 4.6))
    r2s = np.linspace(max(r2_range[0], 1e-9), r2_range[1], 300)
    for k in range(1, k_max + 1):
        ok = (r2s * (k / ell) ** 2) < deltas.d4
        if not ok.any():
            continue
        ax.plot(r2s[ok], [_r1_threshold(deltas, ell, r2, k) for r2 in r2s[ok]],
                lw=1.0, label=f"k={k}")
    ax.plot(r2s, r2s / gamma_minus, "b--", lw=1.4, label=r"$r_1 = r_2/\gamma_-$")
    if points:
        ax.plot([p["r2"] for p in points], [p["r1"] for p in points],
                "ko", ms=5, label="Turing-Turing")
    top = max((p["r1"] for p in points), default=r2_range[1] / gamma_minus)
    ax.set_ylim(0.0, 2.5 * top)
    ax.set_xlabel(r"$r_2$")
    ax.set_ylabel(r"$r_1$")
    ax.legend(loc="best", fontsize=7, ncol=2)
    return _save(fig, path)
