"""Command-line front end: ``vrcache <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from . import __version__
from .bandwidth import normalized_bandwidth, parse_bw
from .cachesim import SWEEPABLE, SimConfig, run_simulation, sweep
from .geometry import ViewportSpec
from .report import METRICS, chunk_report, pairwise_report
from .sequence import DEFAULT_POSITIONS, OrderingPlan, run_sequence_experiment
from .traces import CATEGORIES, TraceError, load_traces, synthesize_trace_set, write_trace_set

log = logging.getLogger("vrcache")


def _vp(text: str) -> ViewportSpec:
    try:
        return ViewportSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _sigma(text: str):
    if text == "auto":
        return None
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("sigma must be a number of degrees or 'auto'") from None
    if v < 0:
        raise argparse.ArgumentTypeError("sigma must be >= 0")
    return v


def _sweep(text: str):
    name, _, vals = text.partition("=")
    if name not in SWEEPABLE or not vals:
        raise argparse.ArgumentTypeError(f"expected one of {SWEEPABLE} followed by =v1,v2,...")
    try:
        return name, [float(v) for v in vals.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sweep values in {text!r}") from None


def _add_traces(p: argparse.ArgumentParser):
    p.add_argument("--traces", required=True, help="video directory, or a directory of video directories")
    p.add_argument("--recenter", action="store_true",
                   help="rotate each session so it starts at yaw 0 (drops the shared video frame)")


def _out_dir(base: Path, video_id: str, many: bool) -> Path:
    return base / video_id if many else base


def cmd_pairwise(args) -> str:
    sets = load_traces(args.traces, args.recenter)
    base = Path(args.out)
    for ts in sets:
        rep = pairwise_report(ts, args.metric, args.vp, args.granularity_ms)
        rep.write(_out_dir(base, ts.video_id, len(sets) > 1), args.cdf_points)
    return f"pairwise {args.metric}: {len(sets)} video(s), {rep.pairs} pairs in the last, median pair mean {rep.box.median:.4g}"


def cmd_chunk(args) -> str:
    sets = load_traces(args.traces, args.recenter)
    base = Path(args.out)
    for ts in sets:
        for ms in args.chunk_ms:
            rep = chunk_report(ts, args.vp, ms)
            rep.write(_out_dir(base, ts.video_id, len(sets) > 1), args.cdf_points, args.omit_extremes)
    return f"chunk: {len(sets)} video(s) x {len(args.chunk_ms)} chunk duration(s), vp {args.vp.label()}"


def cmd_sequence(args) -> str:
    sets = load_traces(args.traces, args.recenter)
    base = Path(args.out)
    for ts in sets:
        plan = OrderingPlan(args.orderings, args.seed, len(ts))
        res = run_sequence_experiment(ts, plan, args.mode, args.granularity_ms, args.vp,
                                      args.chunk_ms, args.positions)
        res.write(_out_dir(base, ts.video_id, len(sets) > 1), args.cdf_points)
    means = ", ".join(f"N={n}: {res.mean(n):.3f}" for n in res.positions)
    return f"sequence {args.mode}: {len(sets)} video(s), {args.orderings} orderings; mean overlap {means}"


def cmd_simulate(args) -> str:
    sets = load_traces(args.traces, args.recenter)
    cfg = SimConfig(beta=args.beta, n_tiles=args.tiles, chunk_ms=args.chunks_ms, f_psi=args.f_psi,
                    f_n=args.f_n, sigma_deg=args.sigma, bw=parse_bw(args.bw, args.bw_avg),
                    num_sequences=args.sequences, seed=args.seed, workers=args.workers)
    out = Path(args.out)
    many = len(sets) > 1
    summary = []
    for ts in sets:
        if args.sweep:
            name, values = args.sweep
            curves = sweep(ts, cfg, name, values)
            paths = [out.with_name(f"{out.stem}{'_' + ts.video_id if many else ''}_{name}={v:g}{out.suffix}")
                     for v in values]
        else:
            curves = [run_simulation(ts, cfg)]
            paths = [out.with_name(f"{out.stem}_{ts.video_id}{out.suffix}") if many else out]
        for c, p in zip(curves, paths):
            c.write_csv(p)
        c = curves[0]
        n = min(4, c.positions - 1)
        summary.append(f"{ts.video_id} N={n} object {c.object_hit_rate[n]:.3f} byte {c.byte_hit_rate[n]:.3f}")
    norm = normalized_bandwidth(cfg.bw, cfg.ladder, cfg.n_tiles)
    return f"simulate-cache (normalized bw {norm:.3f}, {cfg.num_sequences} sequences): " + "; ".join(summary)


def cmd_gen(args) -> str:
    ts = synthesize_trace_set(args.sigma, args.sessions, args.duration_ms, args.seed,
                              args.category, args.video_id)
    vdir = write_trace_set(ts, args.out)
    return f"wrote {len(ts)} traces of {args.duration_ms} ms to {vdir}"


def cmd_info(args) -> str:
    sets = load_traces(args.traces, args.recenter)
    for ts in sets:
        gaps = sum(len(t.gaps()) for t in ts.traces)
        print(f"{ts.video_id}: {len(ts)} sessions, category {ts.category}, "
              f"common duration {ts.common_duration_ms} ms, {gaps} sampling gaps")
    return f"{len(sets)} video(s), {sum(len(s) for s in sets)} sessions"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vrcache", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pairwise", help="pairwise direction differences or viewport overlap")
    _add_traces(p)
    p.add_argument("--metric", choices=METRICS, required=True)
    p.add_argument("--vp", type=_vp, default=ViewportSpec(120.0, 67.5), help="WxH or Wfull (default 120x67.5)")
    p.add_argument("--granularity-ms", type=int, default=50)
    p.add_argument("--cdf-points", type=int, default=None, help="thin CDFs to at most this many points")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pairwise)

    p = sub.add_parser("chunk", help="per-chunk movement bounds, cover sizes and cover overlaps")
    _add_traces(p)
    p.add_argument("--vp", type=_vp, default=ViewportSpec(120.0, 67.5))
    p.add_argument("--chunk-ms", type=_int_list, default=[2000], help="comma-separated chunk durations")
    p.add_argument("--omit-extremes", action="store_true", help="leave min/max out of cover box stats")
    p.add_argument("--cdf-points", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_chunk)

    p = sub.add_parser("sequence", help="overlap with the aggregate cover of N prior users")
    _add_traces(p)
    p.add_argument("--mode", choices=("instant", "chunk"), default="instant")
    p.add_argument("--vp", type=_vp, default=ViewportSpec(90.0))
    p.add_argument("--orderings", type=int, default=1000)
    p.add_argument("--positions", type=_int_list, default=list(DEFAULT_POSITIONS))
    p.add_argument("--granularity-ms", type=int, default=50)
    p.add_argument("--chunk-ms", type=int, default=2000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--cdf-points", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sequence)

    p = sub.add_parser("simulate-cache", help="edge-cache hit rates versus prior viewers")
    _add_traces(p)
    p.add_argument("--bw", default="constant", help="constant | three-level | file:<path>")
    p.add_argument("--bw-avg", type=float, default=12000.0)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--f-psi", type=float, default=1.0)
    p.add_argument("--f-n", type=float, default=1.0)
    p.add_argument("--sigma", type=_sigma, default=None, help="degrees, or 'auto' for the category default")
    p.add_argument("--chunks-ms", type=int, default=2000)
    p.add_argument("--tiles", type=int, default=6)
    p.add_argument("--sequences", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--sweep", type=_sweep, default=None, help="f_psi|f_n|bw_avg=v1,v2,...")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen-traces", help="write synthetic random-walk traces")
    p.add_argument("--sigma", type=float, required=True, help="target 10 s yaw-change std (deg)")
    p.add_argument("--sessions", type=int, required=True)
    p.add_argument("--duration-ms", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--category", choices=CATEGORIES, default="misc")
    p.add_argument("--video-id", default="synthetic")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("info", help="summarize a trace directory")
    _add_traces(p)
    p.set_defaults(func=cmd_info)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        summary = args.func(args)
    except (TraceError, ValueError, OSError) as exc:
        print(f"vrcache {args.command}: error: {exc}", file=sys.stderr)
        return 1
    print(f"{summary} [{time.perf_counter() - t0:.1f} s]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
