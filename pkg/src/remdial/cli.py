"""Command line front door: offline analysis and scripted simulation."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analytics.report import RENDERERS, analyze_corpus
from .model import SchemaError
from .sim.runner import load_setup_map, run_scenario, run_scenario_wall
from .sim.scenario import load_scenario

_ANNOTATOR_SOURCE = {"rule": "rule", "external": "stored", "auto": "auto"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="remdial",
        description="Reminiscence dialogue runtime: analyze session datasets or run scripted simulations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="aggregate engagement and latency metrics from a dataset")
    analyze.add_argument("dataset_root", type=Path, help="directory of session folders")
    analyze.add_argument("--setup-map", type=Path, default=None, help="JSON file mapping user ids to setup labels")
    analyze.add_argument(
        "--annotator",
        choices=sorted(_ANNOTATOR_SOURCE),
        default="auto",
        help="semantic labels: stored external annotations, the rule annotator, or stored-with-fallback",
    )
    analyze.add_argument("--report", choices=sorted(RENDERERS), default="json", help="output format")
    analyze.add_argument("--out", type=Path, default=None, help="write the report here instead of stdout")

    simulate = sub.add_parser("simulate", help="run a scripted session end to end")
    simulate.add_argument("scenario", type=Path, help="scenario JSON file")
    simulate.add_argument(
        "--clock",
        choices=("sim", "wall"),
        default="sim",
        help="virtual clock (instant, deterministic) or real time",
    )
    simulate.add_argument("--out", type=Path, default=None, help="dataset directory to write the session into")
    simulate.add_argument("--portal-root", type=Path, default=None, help="provision the profile through a portal at this directory")
    return parser


def _run_analyze(args: argparse.Namespace) -> int:
    setup_map = load_setup_map(args.setup_map) if args.setup_map else None
    report = analyze_corpus(
        args.dataset_root,
        setup_map=setup_map,
        semantic_source=_ANNOTATOR_SOURCE[args.annotator],
    )
    rendered = RENDERERS[args.report](report)
    if args.out is not None:
        args.out.write_text(rendered, encoding="utf-8")
        print(f"wrote {args.report} report to {args.out}")
    else:
        sys.stdout.write(rendered)
    for diagnostic in report.diagnostics:
        print(f"note: {diagnostic.folder}: {diagnostic.problem}", file=sys.stderr)
    return 0


def _run_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    runner = run_scenario if args.clock == "sim" else run_scenario_wall
    result = runner(scenario, out_dir=args.out, portal_root=args.portal_root)
    record = result.record
    print(f"session {result.session_id}: {len(record.turns)} turn(s), setup {record.robot_setup.value}")
    print(f"completed without intervention: {record.completed_without_intervention}")
    for turn in record.turns:
        lat = turn.latency
        print(
            f"  turn {turn.turn_index}: end-to-end {lat.end_to_end_s:.2f}s"
            f" (asr {lat.asr_s:.2f} / reasoning {lat.reasoning_s:.2f} / orchestration {lat.orchestration_s:.2f})"
        )
    if result.dataset_path is not None:
        print(f"dataset written to {result.dataset_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            return _run_analyze(args)
        return _run_simulate(args)
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
