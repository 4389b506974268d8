"""Command-line entry point: ``interview-match run | replay | check``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .core import InputError, Instance, InterviewLedger, Matching, UnsupportedConfiguration
from .harness import Experiment, ExperimentConfig, replay, run_experiment
from .stability import check_interim_stability

EXIT_OK, EXIT_UNSTABLE, EXIT_CONFIG = 0, 1, 2


def _parse_m(values: Optional[list[str]]):
    if not values:
        return None
    if len(values) == 1 and values[0] in ("equal", "n-plus-10logn"):
        return values[0]
    return [int(v) for v in values]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="interview-match", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a seeded Monte Carlo experiment")
    run.add_argument("--experiment", required=True,
                     choices=[e.value for e in Experiment if e is not Experiment.D1_REPLAY])
    run.add_argument("--n", type=int, nargs="+", help="market sizes (applicants)")
    run.add_argument("--m", nargs="+",
                     help="'equal', 'n-plus-10logn', or one explicit m per n")
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int, default=0, help="base seed; trial t uses seed+t")
    run.add_argument("--algorithm", choices=["sequential", "hybrid", "fully-parallel"])
    run.add_argument("--tie-break", default="lowest-match-value",
                     choices=["lowest-match-value", "unmatched-then-unhappy"])
    run.add_argument("--almost-equivalent", action="store_true",
                     help="use the value model's upper threshold for unmet positions")
    run.add_argument("--out", type=Path, help="CSV path; a .json summary is written beside it")
    run.add_argument("--workers", type=int, help="process count (default: $IM_THREADS or 1)")

    rep = sub.add_parser("replay", help="replay a fixed-matrices fixture")
    rep.add_argument("--fixture", default="d1", help="fixture JSON (default: packaged d1.json)")
    rep.add_argument("--trace", type=Path, help="write the event trace as JSON lines")

    chk = sub.add_parser("check", help="check a matching for interim stability")
    chk.add_argument("--instance", type=Path, required=True)
    chk.add_argument("--matching", type=Path, required=True)
    chk.add_argument("--ledger", type=Path, required=True)
    return parser


def write_trace(path: Path, events: Sequence[dict]) -> None:
    with open(path, "w") as fh:
        for event in events:
            fh.write(json.dumps(event, sort_keys=True) + "\n")


def _cmd_run(args) -> int:
    overrides = {"base_seed": args.seed, "tie_break": args.tie_break,
                 "almost_equivalent": args.almost_equivalent,
                 "output_path": args.out, "workers": args.workers}
    if args.n:
        overrides["n_values"] = args.n
    m_rule = _parse_m(args.m)
    if m_rule is not None:
        overrides["m_rule"] = m_rule
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.algorithm:
        overrides["algorithm"] = args.algorithm
    config = ExperimentConfig.for_experiment(args.experiment, **overrides)
    stats = run_experiment(config)
    print(f"{'n':>5} {'m':>5} {'interviews/app':>15} {'rounds':>9} {'max/agent':>9} {'stable':>7} {'fallback':>8}")
    for e in stats.per_n:
        print(f"{e['n']:>5} {e['m']:>5} {e['interviews_per_applicant']['mean']:>15.3f} "
              f"{e['rounds']['mean']:>9.2f} {e['max_agent_interviews']['mean']:>9.2f} "
              f"{e['stability_pass_rate']:>7.3f} {e['fallback_rate']:>8.3f}")
    return EXIT_OK if stats.stability_pass_rate == 1.0 else EXIT_UNSTABLE


def _cmd_replay(args) -> int:
    out = replay(args.fixture)
    if args.trace:
        write_trace(args.trace, out["trace"])
    summary = {k: v for k, v in out.items() if k != "trace"}
    print(json.dumps(summary, indent=2))
    if not out["stability"]["is_interim_stable"]:
        return EXIT_UNSTABLE
    return EXIT_OK if out["ok"] else EXIT_CONFIG


def _cmd_check(args) -> int:
    doc = json.loads(args.instance.read_text())
    instance = Instance.from_json(doc.get("instance", doc))
    n, m = instance.n, instance.m
    matching = Matching.from_json(json.loads(args.matching.read_text()), n, m)
    ledger = InterviewLedger.from_json(json.loads(args.ledger.read_text()), n, m)
    report = check_interim_stability(instance, ledger, matching)
    print(json.dumps(report.to_json(), indent=2))
    return EXIT_OK if report.is_interim_stable else EXIT_UNSTABLE


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "replay": _cmd_replay, "check": _cmd_check}[args.command]
    try:
        return handler(args)
    except (InputError, UnsupportedConfiguration, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
