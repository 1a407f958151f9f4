"""Command-line surface: simulate, analyze, invert-ratio, efficiency, curve.

Exit codes: 0 success, 1 usage or configuration error, 2 unanalyzable trace.
JSON results go to stdout (or --output); human-readable summaries and
diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .analysis import analyze_trace
from .efficiency import extract_efficiency_db, variance_vs_ratio_curve
from .estimator import InsufficientScanError, RatioEstimate, estimate_squeeze
from .synth import NoiseSpec, ScanSpec, synthesize_trace
from .traceio import read_trace, write_trace
from .variance import ChannelModel, SqueezeState

__all__ = ["main", "entry"]


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this tool reserves 2 for bad traces."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _round12(obj):
    if isinstance(obj, float):
        return None if not math.isfinite(obj) else float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _emit_json(doc: dict, output: str | None) -> None:
    text = json.dumps(_round12(doc), indent=2, sort_keys=False) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_text(text: str, output: str | None) -> None:
    if output:
        Path(output).write_bytes(text.encode("utf-8"))
    else:
        sys.stdout.write(text)


def _parse_ramp(text: str) -> tuple[float, ...]:
    if not text:
        return ()
    return tuple(float(part) for part in text.split(","))


def cmd_simulate(args) -> int:
    state = SqueezeState(r=args.r, theta_s=args.theta_s)
    gap = args.qnl_dbm - args.dark_dbm if args.dark_dbm is not None else math.inf
    chan = ChannelModel.from_gap_db(args.eta, gap)
    scan = ScanSpec(
        n_samples=args.samples,
        theta_start=args.theta_start,
        theta_end=args.theta_end,
        n_sweeps=args.sweeps,
        ramp_distortion=_parse_ramp(args.ramp),
    )
    noise = NoiseSpec(sigma_db=args.noise_db, seed=args.seed)
    trace = synthesize_trace(state, chan, scan, noise, qnl_dbm=args.qnl_dbm)
    if args.output:
        write_trace(trace, args.output)
    else:
        from .traceio import format_trace

        sys.stdout.write(format_trace(trace))
    if args.plot:
        from .plots import save_trace_plot

        save_trace_plot(trace, args.plot, title=f"synthetic trace, r = {args.r:g}")
        print(f"figure written to {args.plot}", file=sys.stderr)
    print(
        f"simulated {scan.total_samples} samples ({scan.n_sweeps} sweep(s), "
        f"r = {args.r:g}, eta = {args.eta:g}, noise = {args.noise_db:g} dB)",
        file=sys.stderr,
    )
    return 0


def cmd_analyze(args) -> int:
    trace = read_trace(args.trace)
    report = analyze_trace(
        trace,
        qnl_dbm=args.qnl_dbm,
        dark_dbm=args.dark_dbm,
        eta_det=args.eta_det,
        eta_vis=args.eta_vis,
        eta_opt=args.eta_opt,
        k_sigma=args.k_sigma,
        window=args.smooth_window,
    )
    _emit_json(report.to_dict(), args.output)
    for line in report.summary_lines():
        print(line, file=sys.stderr)
    if report.unphysical:
        print("warning: an extracted efficiency is unphysical (> 1)", file=sys.stderr)
    if args.plot:
        from .plots import save_trace_plot

        save_trace_plot(trace, args.plot, report=report)
        print(f"figure written to {args.plot}", file=sys.stderr)
    return 0


def cmd_invert_ratio(args) -> int:
    if not 0.0 < args.ratio <= 1.0:
        raise ValueError(f"--ratio must be in (0, 1], got {args.ratio!r}")
    if args.sigma < 0.0:
        raise ValueError(f"--sigma must be >= 0, got {args.sigma!r}")
    est = estimate_squeeze(
        RatioEstimate(ratios=(args.ratio,), mean=args.ratio, sigma=args.sigma, n=1)
    )
    _emit_json(
        {
            "ratio": args.ratio,
            "sigma": args.sigma,
            "r": est.r,
            "sigma_r": est.sigma_r,
            "mu_sq_db": est.mu_sq_db,
            "mu_asq_db": est.mu_asq_db,
            "sigma_db": est.sigma_db,
            "clipped": est.clipped,
        },
        args.output,
    )
    return 0


def cmd_efficiency(args) -> int:
    est = extract_efficiency_db(
        args.det_db,
        args.mu_db,
        args.gap_db,
        det_sigma_db=args.det_sigma_db,
        mu_sigma_db=args.mu_sigma_db,
        gap_sigma_db=args.gap_sigma_db,
    )
    _emit_json(
        {
            "det_db": args.det_db,
            "mu_db": args.mu_db,
            "gap_db": None if math.isinf(args.gap_db) else args.gap_db,
            "eta": est.eta,
            "sigma": est.sigma,
            "unphysical": est.unphysical,
        },
        args.output,
    )
    if est.unphysical:
        print("warning: extracted efficiency is unphysical", file=sys.stderr)
    return 0


def cmd_curve(args) -> int:
    etas = [float(part) for chunk in args.eta for part in chunk.split(",")]
    if not etas:
        raise ValueError("at least one --eta is required")
    if not (0.0 < args.ratio_min < args.ratio_max < 1.0):
        raise ValueError("need 0 < --ratio-min < --ratio-max < 1")
    grid = np.linspace(args.ratio_min, args.ratio_max, args.points)
    curves = [variance_vs_ratio_curve(eta, grid) for eta in etas]
    out = io.StringIO()
    out.write("eta,ratio,sq_db,asq_db\n")
    for curve in curves:
        for rho, sq, asq in zip(curve.ratio.tolist(), curve.sq_db.tolist(), curve.asq_db.tolist()):
            out.write(f"{curve.eta!r},{rho!r},{sq!r},{asq!r}\n")
    _emit_text(out.getvalue(), args.output)
    if args.plot:
        from .plots import save_curve_plot

        save_curve_plot(curves, args.plot)
        print(f"figure written to {args.plot}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="sqzratio",
        description="Characterize squeezed light from the QNL crossings of scanned homodyne traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize a scanned homodyne trace CSV")
    p.add_argument("--r", type=float, required=True, help="squeezing parameter (>= 0)")
    p.add_argument("--theta-s", type=float, default=0.0, help="squeezing angle (rad)")
    p.add_argument("--eta", type=float, default=1.0, help="total channel efficiency")
    p.add_argument("--qnl-dbm", type=float, default=0.0, help="QNL anchor level (dBm)")
    p.add_argument(
        "--dark-dbm", type=float, default=None, help="dark-noise level (dBm); omit for none"
    )
    p.add_argument("--samples", type=int, default=1024, help="samples per sweep")
    p.add_argument("--sweeps", type=int, default=2, help="number of monotone sweeps")
    p.add_argument("--theta-start", type=float, default=-0.6, help="sweep start angle (rad)")
    p.add_argument(
        "--theta-end", type=float, default=-0.6 + 1.2 * math.pi, help="sweep end angle (rad)"
    )
    p.add_argument(
        "--ramp",
        default="",
        help="ramp polynomial coefficients a1,a2,... (must sum to 1; empty = linear)",
    )
    p.add_argument("--noise-db", type=float, default=0.0, help="trace noise sigma (dB)")
    p.add_argument("--seed", type=int, default=0, help="noise RNG seed")
    p.add_argument("--output", help="trace CSV path (default stdout)")
    p.add_argument("--plot", help="also render the trace to this image file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="run the ratio-method analysis on a trace CSV")
    p.add_argument("trace", help="trace CSV path")
    p.add_argument("--qnl-dbm", type=float, default=None, help="override the QNL level (dBm)")
    p.add_argument("--dark-dbm", type=float, default=None, help="override the dark level (dBm)")
    p.add_argument("--eta-det", type=float, default=None, help="detector quantum efficiency")
    p.add_argument("--eta-vis", type=float, default=None, help="homodyne visibility efficiency")
    p.add_argument("--eta-opt", type=float, default=None, help="optical path efficiency")
    p.add_argument("--k-sigma", type=float, default=2.0, help="consistency threshold (sigmas)")
    p.add_argument("--smooth-window", type=int, default=None, help="smoothing window (samples)")
    p.add_argument("--output", help="report JSON path (default stdout)")
    p.add_argument("--plot", help="also render the trace with overlays to this image file")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("invert-ratio", help="map a measured crossing ratio to r and the MU state")
    p.add_argument("--ratio", type=float, required=True, help="measured ratio in (0, 1]")
    p.add_argument("--sigma", type=float, default=0.0, help="ratio standard error")
    p.add_argument("--output", help="JSON path (default stdout)")
    p.set_defaults(func=cmd_invert_ratio)

    p = sub.add_parser("efficiency", help="extract the channel efficiency from dB levels")
    p.add_argument("--det-db", type=float, required=True, help="detected level rel. QNL (dB)")
    p.add_argument("--mu-db", type=float, required=True, help="ideal-state level rel. QNL (dB)")
    p.add_argument(
        "--gap-db", type=float, default=math.inf, help="QNL-to-dark gap (dB); inf = no dark noise"
    )
    p.add_argument("--det-sigma-db", type=float, default=0.0)
    p.add_argument("--mu-sigma-db", type=float, default=0.0)
    p.add_argument("--gap-sigma-db", type=float, default=0.0)
    p.add_argument("--output", help="JSON path (default stdout)")
    p.set_defaults(func=cmd_efficiency)

    p = sub.add_parser("curve", help="tabulate detected variance vs ratio for given efficiencies")
    p.add_argument(
        "--eta",
        action="append",
        default=[],
        help="efficiency value or comma list; repeatable",
    )
    p.add_argument("--ratio-min", type=float, default=0.02)
    p.add_argument("--ratio-max", type=float, default=0.98)
    p.add_argument("--points", type=int, default=97)
    p.add_argument("--output", help="CSV path (default stdout)")
    p.add_argument("--plot", help="also render the curve family to this image file")
    p.set_defaults(func=cmd_curve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InsufficientScanError as exc:
        print(f"sqzratio: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"sqzratio: error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
