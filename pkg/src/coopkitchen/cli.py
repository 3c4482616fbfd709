"""Command-line interface: batch experiments, comparisons, replay, figure
rendering, and the live play server."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .assets import MAP_NAMES
from .harness import (
    ConditionSummary,
    EpisodeLog,
    PAPER_RUNS_PER_MAP,
    compare_conditions,
    fit_team_scaling,
    replay_episode,
    run_condition,
    run_sweep,
    scaling_rows,
    summary_csv,
)


def _maps_argument(value: str) -> list[str]:
    if value == "all":
        return list(MAP_NAMES)
    return [m.strip() for m in value.split(",") if m.strip()]


def cmd_run(args) -> int:
    maps = _maps_argument(args.map)
    roster = tuple(s.strip() for s in args.roster.split(","))
    out_dir = Path(args.out) if args.out else None
    summary = run_condition(
        roster,
        maps,
        runs_per_map=args.runs,
        base_seed=args.seed,
        horizon=args.horizon,
        beta=args.beta,
        out_dir=out_dir,
        maps_dir=args.maps_dir,
        progress=(lambda line: print(line, file=sys.stderr)) if args.verbose else None,
    )
    baseline = ConditionSummary.load(args.normalize_to) if args.normalize_to else None
    csv_text = summary_csv(summary, baseline)
    print(csv_text, end="")
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = summary.label.replace("/", "_")
        (out_dir / f"{stem}.csv").write_text(csv_text)
        summary.save(out_dir / f"{stem}.json")
        print(f"wrote {out_dir / (stem + '.csv')}", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    lo, _, hi = args.agents.partition("..")
    team_sizes = list(range(int(lo), int(hi or lo) + 1))
    out_dir = Path(args.out) if args.out else None
    summaries = run_sweep(
        team_sizes,
        maps=_maps_argument(args.map),
        base_seed=args.seed,
        runs_per_map=args.runs_per_map,
        horizon=args.horizon,
        out_dir=out_dir,
        progress=(lambda line: print(line, file=sys.stderr)) if args.verbose else None,
    )
    for summary in summaries:
        print(summary_csv(summary), end="")
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            stem = summary.label.replace("/", "_")
            (out_dir / f"{stem}.csv").write_text(summary_csv(summary))
            summary.save(out_dir / f"{stem}.json")
    import numpy as np

    try:
        fit = fit_team_scaling(scaling_rows(summaries))
    except np.linalg.LinAlgError:
        print("scaling fit skipped: degenerate design (need >1 team size)", file=sys.stderr)
        return 0
    print(json.dumps({"scaling_fit": fit.to_json()}, indent=2))
    if out_dir is not None:
        (out_dir / "scaling_fit.json").write_text(json.dumps(fit.to_json(), indent=2))
    return 0


def cmd_compare(args) -> int:
    a = ConditionSummary.load(args.summary_a)
    b = ConditionSummary.load(args.summary_b)
    report = compare_conditions(a, b)
    print(report.format_text())
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_json(), indent=2))
    return 0


def cmd_replay(args) -> int:
    log = EpisodeLog.load(args.log)
    score = replay_episode(log)
    print(f"replayed {args.log}: {len(log.records)} ticks, final score {score}")
    return 0


def cmd_report(args) -> int:
    from .report import render_report

    for path in render_report(args.summaries, args.out):
        print(f"wrote {path}")
    return 0


def cmd_serve(args) -> int:
    from .server import serve

    serve(
        host=args.host,
        port=args.port,
        maps_dir=args.maps_dir,
        log_dir=args.log_dir,
        tick_ms=args.tick_ms,
        static_dir=args.static_dir,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coopkitchen",
        description="Cooperative kitchen simulator and experiment harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one condition over maps and seeds")
    run.add_argument("--map", default="all", help="map name, comma list, or 'all'")
    run.add_argument("--roster", default="ntom,tom", help="comma list of seats (ntom|tom)")
    run.add_argument("--runs", type=int, default=30, help="episodes per map")
    run.add_argument("--seed", type=int, default=7, help="base seed")
    run.add_argument("--horizon", type=int, default=500)
    run.add_argument("--beta", type=float, default=0.5)
    run.add_argument("--out", help="directory for logs, CSV and JSON summaries")
    run.add_argument("--maps-dir", help="directory of custom map files")
    run.add_argument("--normalize-to", help="summary JSON used as normalization baseline")
    run.add_argument("--verbose", action="store_true")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="team size x intention-awareness grid")
    sweep.add_argument("--agents", default="2..4", help="team size range, e.g. 2..4")
    sweep.add_argument(
        "--runs-per-map",
        type=int,
        default=None,
        help=f"episodes per map (default: per-size design {PAPER_RUNS_PER_MAP})",
    )
    sweep.add_argument("--map", default="all")
    sweep.add_argument("--seed", type=int, default=7)
    sweep.add_argument("--horizon", type=int, default=500)
    sweep.add_argument("--out")
    sweep.add_argument("--verbose", action="store_true")
    sweep.set_defaults(func=cmd_sweep)

    compare = sub.add_parser("compare", help="directional comparison of two summaries")
    compare.add_argument("summary_a", help="summary JSON for the left condition")
    compare.add_argument("summary_b", help="summary JSON for the baseline condition")
    compare.add_argument("--out", help="write the comparison report JSON here")
    compare.set_defaults(func=cmd_compare)

    replay = sub.add_parser("replay", help="verify a stored episode log")
    replay.add_argument("log", help="episode .jsonl path")
    replay.set_defaults(func=cmd_replay)

    report = sub.add_parser("report", help="render figures from saved summaries")
    report.add_argument("--summaries", required=True, help="directory of summary .json files")
    report.add_argument("--out", required=True, help="output directory for figures")
    report.set_defaults(func=cmd_report)

    serve = sub.add_parser("serve", help="start the live play server")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--maps-dir")
    serve.add_argument("--log-dir")
    serve.add_argument("--tick-ms", type=int, default=150)
    serve.add_argument("--static-dir", help="built web client to serve at /")
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
