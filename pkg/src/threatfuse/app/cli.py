"""Command-line interface: ``threatfuse <command> ...``.

Every command opens the engine by replaying the configured event log, so
state carries over between invocations.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence

from ..errors import ThreatFuseError
from ..estimative import TermRow, band_for_probability, content_code_for_probability
from ..fusion import CombinationRule, demo_tables
from ..reports import parse_timestamp
from ..triage import render_triage, triage_jsonl
from .config import load_config
from .engine import Engine
from .simulate import simulate_echo


def _timestamp(text: str):
    try:
        return parse_timestamp(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _probability(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="threatfuse", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="config JSON (default: $THREATFUSE_CONFIG or packaged default)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest a JSONL file of reports")
    p.add_argument("file")

    p = sub.add_parser("fuse", help="fuse the evidence for one incident")
    p.add_argument("incident_id")
    p.add_argument("--rule", choices=["noisy-or", "odds"])

    p = sub.add_parser("triage", help="rank incidents for response")
    p.add_argument("--policy", choices=["confidence-first", "cost-first", "weighted"])
    p.add_argument("--now", type=_timestamp, help="RFC 3339 evaluation time (default: current time)")
    p.add_argument("--format", choices=["text", "jsonl"], default="text")

    p = sub.add_parser("term", help="estimative terms for a probability")
    p.add_argument("p", type=_probability)
    p.add_argument("--row", choices=[r.value for r in TermRow])

    p = sub.add_parser("feedback", help="record an outcome for a report")
    p.add_argument("report_id")
    p.add_argument("outcome", choices=["confirmed", "refuted"])

    p = sub.add_parser("sources", help="list source profiles as CSV")
    p.add_argument("--reload-trusted", nargs="?", const="", metavar="PATH",
                   help="reload the trusted list first (default path from config)")

    p = sub.add_parser("demo", help="render the worked example tables")
    p.add_argument("what", choices=["tables"])

    p = sub.add_parser("simulate", help="show echo-chamber inflation")
    p.add_argument("what", choices=["echo"])
    p.add_argument("--sources", type=int, default=2)
    p.add_argument("--duplicates", type=int, default=5)
    p.add_argument("--rule", choices=["noisy-or", "odds"], default="noisy-or")

    p = sub.add_parser("replay", help="rebuild state from an event log")
    p.add_argument("log")
    p.add_argument("--policy", choices=["confidence-first", "cost-first", "weighted"],
                   help="also print triage (jsonl) from the replayed state")
    p.add_argument("--now", type=_timestamp)
    return parser


def _policy(name: str | None) -> str | None:
    return name.replace("-", "_") if name else None


def run(args: argparse.Namespace, out=sys.stdout) -> int:
    if args.command == "demo":
        out.write(demo_tables())
        return 0
    if args.command == "term":
        band = band_for_probability(args.p)
        if args.row:
            out.write(band.term(args.row) + "\n")
        else:
            content = content_code_for_probability(args.p)
            out.write(json.dumps({
                "band": band.index,
                "likelihood": band.likelihood_term,
                "probability": band.probability_term,
                "range": [band.lo, band.hi],
                "admiralty_content": [int(content), content.definition],
            }) + "\n")
        return 0
    if args.command == "simulate":
        out.write(simulate_echo(args.sources, args.duplicates, CombinationRule.parse(args.rule)).render())
        return 0

    config = load_config(args.config)
    if args.command == "replay":
        engine = Engine.replay(args.log, config)
        out.write(json.dumps(engine.state_summary(), sort_keys=True) + "\n")
        if args.policy:
            out.write(triage_jsonl(engine.triage(_policy(args.policy), args.now)))
        return 0

    engine = Engine.open(config)
    if args.command == "ingest":
        summary = engine.ingest(args.file)
        for err in summary.errors:
            logging.getLogger("threatfuse").warning(err)
        out.write(json.dumps({k: v for k, v in summary.as_dict().items() if k != "errors"}) + "\n")
    elif args.command == "fuse":
        out.write(json.dumps(engine.fuse_incident(args.incident_id, args.rule).as_dict(), sort_keys=True) + "\n")
    elif args.command == "triage":
        items = engine.triage(_policy(args.policy), args.now)
        out.write(triage_jsonl(items) if args.format == "jsonl" else render_triage(items))
    elif args.command == "feedback":
        p = engine.feedback(args.report_id, args.outcome)
        out.write(f"{p.source_id}: confirmed={p.confirmed} refuted={p.refuted} letter={p.letter.value}\n")
    elif args.command == "sources":
        if args.reload_trusted is not None:
            engine.reload_trusted(args.reload_trusted or None)
        out.write(engine.sources_csv())
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return run(args)
    except (ThreatFuseError, OSError) as exc:
        print(f"threatfuse: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
