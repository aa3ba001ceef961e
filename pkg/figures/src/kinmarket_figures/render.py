"""Rendering of the standard figure kinds to PNG files.

Band plots draw W(t) as a solid line between dashed W +- R envelopes.
Output rasters are 1200 x 800 pixels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from . import readers  # noqa: E402

FIGURE_KINDS = (
    "bubble-crash-curve",
    "mean-vs-time-with-band",
    "delta-comparison",
    "bollinger-overlay",
    "bandwidth",
)

_FIGSIZE = (12.0, 8.0)
_DPI = 100


@dataclass
class FigureSpec:
    kind: str
    inputs: list[str]
    labels: list[str] = field(default_factory=list)
    title: str = ""
    summary: str | None = None      # summary.json with the scenario echo
    band_W: float | None = None     # constant band fallback
    band_R: float | None = None

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"figure kind {self.kind!r} not one of "
                             f"{FIGURE_KINDS}")
        if not self.inputs:
            raise ValueError("figure: no input files")


def _label(spec, i, default):
    return spec.labels[i] if i < len(spec.labels) else default


def _band_curves(spec, t):
    """(W(t), R) from the summary echo or the explicit flags."""
    if spec.summary:
        summary = readers.read_summary(spec.summary)
        bg = readers.background_from_summary(summary)
        R = float(summary["config"]["model"]["band_R"])
        return np.array([bg(ti) for ti in t]), R
    if spec.band_W is not None and spec.band_R is not None:
        return np.full(len(t), spec.band_W), spec.band_R
    return None, None


def _draw_band(ax, t, W, R):
    ax.plot(t, W, color="black", lw=1.2, label="W(t)")
    ax.plot(t, W + R, color="black", lw=1.0, ls="--", label="W(t) +- R")
    ax.plot(t, W - R, color="black", lw=1.0, ls="--")


def _fig_axes(n_rows=1, n_cols=1):
    fig, axes = plt.subplots(n_rows, n_cols, figsize=_FIGSIZE)
    return fig, axes


def _render_bubble_crash(spec, out):
    table = readers.read_sweep(spec.inputs[0])
    fig, (ax_b, ax_c) = _fig_axes(1, 2)
    betas = sorted(set(table["beta"]))
    for beta in betas:
        sel = table["beta"] == beta
        order = np.argsort(table["alpha"][sel])
        alpha = table["alpha"][sel][order]
        ax_b.plot(alpha, table["pct_bubble"][sel][order], marker="o",
                  label=f"beta = {beta:g}")
        ax_c.plot(alpha, table["pct_crash"][sel][order], marker="s",
                  label=f"beta = {beta:g}")
    for ax, what in ((ax_b, "bubbles"), (ax_c, "crashes")):
        ax.set_xlabel("alpha")
        ax.set_ylabel(f"% of steps in {what}")
        ax.set_title(f"Percentage of {what}")
        ax.legend()
    return fig


def _render_mean_vs_time(spec, out):
    fig, ax = _fig_axes()
    for i, path in enumerate(spec.inputs):
        data = readers.read_trajectory(path)
        ax.plot(data["t"], data["m_w"], lw=1.0,
                label=_label(spec, i, f"m_w ({path})"))
    t = readers.read_trajectory(spec.inputs[0])["t"]
    W, R = _band_curves(spec, t)
    if W is not None:
        _draw_band(ax, t, W, R)
    ax.set_xlabel("t")
    ax.set_ylabel("mean asset value")
    ax.set_title(spec.title or "Mean asset value versus time")
    ax.legend()
    return fig


def _render_delta_comparison(spec, out):
    if len(spec.inputs) < 2:
        raise ValueError("delta-comparison: needs at least two trajectories")
    return _render_mean_vs_time(
        spec if spec.title else FigureSpec(
            kind=spec.kind, inputs=spec.inputs, labels=spec.labels,
            title="Adaptation speed of the mean asset value",
            summary=spec.summary, band_W=spec.band_W, band_R=spec.band_R),
        out)


def _render_bollinger(spec, out):
    traj = readers.read_trajectory(spec.inputs[0])
    bands = readers.read_bands(spec.inputs[1]) if len(spec.inputs) > 1 \
        else None
    fig, ax = _fig_axes()
    ax.plot(traj["t"], traj["m_w"], lw=1.0, color="tab:blue", label="m_w")
    if bands is not None:
        ax.plot(bands["t"], bands["r_plus"], color="tab:red", lw=1.0,
                ls="--", label="R+")
        ax.plot(bands["t"], bands["r_minus"], color="tab:green", lw=1.0,
                ls="--", label="R-")
        ax.plot(bands["t"], bands["M_n"], color="black", lw=0.8,
                label="moving average")
    ax.set_xlabel("t")
    ax.set_ylabel("mean asset value")
    ax.set_title(spec.title or "Bollinger bands")
    ax.legend()
    return fig


def _render_bandwidth(spec, out):
    fig, ax = _fig_axes()
    for i, path in enumerate(spec.inputs):
        bands = readers.read_bands(path)
        ax.plot(bands["t"], bands["bandwidth"], lw=1.0,
                label=_label(spec, i, f"B(t) ({path})"))
    ax.set_xlabel("t")
    ax.set_ylabel("bandwidth %")
    ax.set_title(spec.title or "Bollinger bandwidth")
    ax.legend()
    return fig


_RENDERERS = {
    "bubble-crash-curve": _render_bubble_crash,
    "mean-vs-time-with-band": _render_mean_vs_time,
    "delta-comparison": _render_delta_comparison,
    "bollinger-overlay": _render_bollinger,
    "bandwidth": _render_bandwidth,
}


def render(spec: FigureSpec, out: str) -> str:
    """Render the figure described by spec into the PNG file out."""
    fig = _RENDERERS[spec.kind](spec, out)
    try:
        fig.savefig(out, dpi=_DPI)
    finally:
        plt.close(fig)
    return out
