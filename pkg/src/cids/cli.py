"""Batch CLI: run scenarios, verify ledgers, bloom math, trust reports.

Exit codes are a stable CI contract: 0 success, 1 verification or assertion
failure, 2 usage or parse error. Stdout carries only JSON; human-oriented
notes go to stderr. Seed precedence for `run`: --seed flag, then the config
file, then the CIDS_SEED environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .bloom import MAX_K, analytic_fpr, optimal_k
from .errors import CidsError, ConfigInvalid, MalformedBytes
from .ledger import TxKind, export_jsonl, first_invalid_height, import_jsonl
from .simnet.config import config_from_dict
from .simnet.engine import Simulation
from .trust import TrustRecord, apply_outcome

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2


def _fail_usage(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def cmd_run(args) -> int:
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except OSError as exc:
        return _fail_usage(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        return _fail_usage(f"config is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        return _fail_usage("config must be a JSON object")

    if args.seed is not None:
        raw["seed"] = args.seed
    elif "seed" not in raw and os.environ.get("CIDS_SEED"):
        try:
            raw["seed"] = int(os.environ["CIDS_SEED"])
        except ValueError:
            return _fail_usage("CIDS_SEED must be an integer")

    try:
        config = config_from_dict(raw)
    except ConfigInvalid as exc:
        return _fail_usage(str(exc))

    sim = Simulation(config)
    report = sim.run(trace=args.trace is not None)
    payload = report.to_json()

    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload)
    if args.trace:
        with open(args.trace, "w") as fh:
            for record in sim.trace:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
    if args.ledger_out:
        with open(args.ledger_out, "w") as fh:
            fh.write(export_jsonl(sim.ledger))
    if args.nodes_out:
        with open(args.nodes_out, "w") as fh:
            json.dump([n.state_summary() for n in sim.nodes], fh, sort_keys=True)
            fh.write("\n")
    if args.dump_store:
        sim.store.dump(args.dump_store)

    sys.stdout.write(payload)
    print(f"run complete: seed {config.seed}, {report.ledger_blocks} blocks",
          file=sys.stderr)
    return EXIT_OK


def cmd_ledger_verify(args) -> int:
    try:
        with open(args.ledger) as fh:
            text = fh.read()
        ledger = import_jsonl(text)
    except OSError as exc:
        return _fail_usage(f"cannot read ledger: {exc}")
    except MalformedBytes as exc:
        return _fail_usage(f"cannot parse ledger: {exc}")
    height = first_invalid_height(ledger)
    if height is None:
        sys.stdout.write(json.dumps({"valid": True, "blocks": len(ledger.blocks)}) + "\n")
        return EXIT_OK
    sys.stdout.write(
        json.dumps({"valid": False, "first_invalid_height": height}) + "\n"
    )
    print(f"chain invalid at height {height}", file=sys.stderr)
    return EXIT_VERIFY_FAILED


def cmd_bloom_calc(args) -> int:
    if args.m < 1:
        return _fail_usage("--m must be >= 1")
    if args.n < 0:
        return _fail_usage("--n must be >= 0")
    if args.k is not None and not 1 <= args.k <= MAX_K:
        return _fail_usage(f"--k must be in [1, {MAX_K}]")
    if args.k is not None:
        k = args.k
    elif args.n >= 1:
        k = optimal_k(args.m, args.n)
    else:
        k = 1
    fpr = analytic_fpr(args.m, k, args.n)
    sys.stdout.write(
        json.dumps({"m": args.m, "n": args.n, "k": k, "analytic_fpr": fpr}) + "\n"
    )
    return EXIT_OK


def cmd_trust_report(args) -> int:
    try:
        with open(args.ledger) as fh:
            ledger = import_jsonl(fh.read())
    except OSError as exc:
        return _fail_usage(f"cannot read ledger: {exc}")
    except MalformedBytes as exc:
        return _fail_usage(f"cannot parse ledger: {exc}")

    known: set[int] = set()
    for block in ledger.blocks[1:]:
        known.add(block.proposer)
        for tx in block.txs:
            known.add(tx.sender)
    records = {node: TrustRecord(node) for node in known}
    for _height, tx in ledger.scan(TxKind.TRUST_UPDATE):
        subject = tx.payload.subject
        current = records.get(subject, TrustRecord(subject))
        records[subject] = apply_outcome(current, tx.payload.outcome)
    rows = [
        {
            "node": node,
            "positives": r.positives,
            "negatives": r.negatives,
            "score": r.score,
        }
        for node, r in sorted(records.items())
    ]
    sys.stdout.write(json.dumps(rows) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cids", description="collaborative intrusion detection simulator"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario and print the metrics report")
    run_p.add_argument("--config", required=True, help="scenario JSON file")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--out", default=None, help="also write the report here")
    run_p.add_argument("--trace", default=None, help="write a per-tick JSONL trace")
    run_p.add_argument("--ledger-out", default=None, help="export the ledger (JSONL)")
    run_p.add_argument("--nodes-out", default=None, help="write per-node state dumps")
    run_p.add_argument("--dump-store", default=None,
                       help="dump content-store blobs into this directory")
    run_p.set_defaults(func=cmd_run)

    lv = sub.add_parser("ledger-verify", help="re-check all chain invariants")
    lv.add_argument("ledger", help="exported ledger file (JSONL)")
    lv.set_defaults(func=cmd_ledger_verify)

    ledger_group = sub.add_parser("ledger", help="ledger inspection commands")
    ledger_sub = ledger_group.add_subparsers(dest="ledger_command", required=True)
    lv2 = ledger_sub.add_parser("verify", help="re-check all chain invariants")
    lv2.add_argument("ledger", help="exported ledger file (JSONL)")
    lv2.set_defaults(func=cmd_ledger_verify)

    bc = sub.add_parser("bloom-calc", help="analytic FPR and optimal k")
    bc.add_argument("--m", type=int, required=True, help="filter size in bits")
    bc.add_argument("--n", type=int, required=True, help="expected item count")
    bc.add_argument("--k", type=int, default=None, help="hash count (default: optimal)")
    bc.set_defaults(func=cmd_bloom_calc)

    tr = sub.add_parser("trust-report", help="fold the chain's trust updates")
    tr.add_argument("ledger", help="exported ledger file (JSONL)")
    tr.set_defaults(func=cmd_trust_report)

    trust_group = sub.add_parser("trust", help="trust inspection commands")
    trust_sub = trust_group.add_subparsers(dest="trust_command", required=True)
    tr2 = trust_sub.add_parser("report", help="fold the chain's trust updates")
    tr2.add_argument("ledger", help="exported ledger file (JSONL)")
    tr2.set_defaults(func=cmd_trust_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CidsError as exc:
        return _fail_usage(str(exc))


if __name__ == "__main__":
    sys.exit(main())
