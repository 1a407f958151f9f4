"""Figure rendering for traces, analysis overlays and ratio curves.

Everything renders to a file through the Agg backend, so the CLI can emit
figures next to its CSV/JSON outputs on headless machines.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .analysis import AnalysisReport  # noqa: E402
from .efficiency import RatioCurve  # noqa: E402
from .synth import Trace  # noqa: E402

__all__ = ["save_trace_plot", "save_curve_plot"]


def save_trace_plot(
    trace: Trace,
    path: str | Path,
    report: AnalysisReport | None = None,
    title: str | None = None,
) -> Path:
    """Render a trace against its QNL, optionally overlaying analysis results."""
    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.plot(trace.x, trace.power_dbm, lw=0.8, color="tab:blue", label="trace")
    ax.axhline(trace.qnl_dbm, color="k", lw=1.0, ls="--", label="QNL")
    if report is not None:
        ax.axhline(
            trace.qnl_dbm + report.det_sq_db, color="tab:green", lw=0.8, ls=":",
            label=f"detected squeezing {report.det_sq_db:+.2f} dB",
        )
        ax.axhline(
            trace.qnl_dbm + report.det_asq_db, color="tab:red", lw=0.8, ls=":",
            label=f"detected anti-squeezing {report.det_asq_db:+.2f} dB",
        )
        ax.set_title(
            title
            or f"r = {report.squeeze.r:.3f} +- {report.squeeze.sigma_r:.3f}, "
            f"ratio = {report.ratio.mean:.4f}"
        )
    elif title:
        ax.set_title(title)
    ax.set_xlabel("scan coordinate (samples)")
    ax.set_ylabel("power (dBm)")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def save_curve_plot(
    curves: list[RatioCurve],
    path: str | Path,
    mark: tuple[float, float] | None = None,
) -> Path:
    """Render squeezing/anti-squeezing vs ratio for a family of efficiencies.

    ``mark`` draws a vertical guide at a measured (ratio, r-independent) point.
    """
    fig, ax = plt.subplots(figsize=(7, 5))
    for curve in curves:
        (line,) = ax.plot(curve.ratio, curve.sq_db, lw=1.2, label=f"eta = {curve.eta:g}")
        ax.plot(curve.ratio, curve.asq_db, lw=1.2, ls="--", color=line.get_color())
    ax.axhline(0.0, color="k", lw=0.8)
    if mark is not None:
        ax.axvline(mark[0], color="gray", lw=0.8, ls=":")
        ax.annotate(f"ratio = {mark[0]:g}", (mark[0], mark[1]), fontsize=8)
    ax.set_xlabel("crossing ratio")
    ax.set_ylabel("detected variance (dB rel. QNL)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
