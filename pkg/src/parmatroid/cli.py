"""Command-line runner: ``parmatroid <subcommand> ...``."""
import argparse
import json
import os
import sys

from .algorithms import ALGORITHMS, guaranteed_progress_decomposition, new_decomposition, run_algorithm
from .applications import random_feasible_sequence
from .config import AlgorithmConfig
from .decomposition import remove_small_circuits
from .errors import MatroidError
from .experiment import (ExperimentSpec, plot_data, read_records, run_experiment, summarize,
                         write_outputs, write_summary)
from .instances import load
from .oracle import MatroidView
from .scheduler import RoundLedger


def _config(path):
    if not path:
        return None
    with open(path) as fh:
        return AlgorithmConfig.from_dict(json.load(fh))


def _emit(obj, out, name):
    text = json.dumps(obj, separators=(",", ":"))
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, name), "w") as fh:
            fh.write(text + "\n")
    print(text)


def cmd_find_basis(args):
    view = MatroidView(load(args.matroid))
    res = run_algorithm(args.algo, view, seed=args.seed, config=_config(args.config))
    out = {"algo": args.algo, "seed": args.seed, "basis": list(res.basis),
           "rank": len(res.basis), "valid": True, "ledger": res.ledger.to_dict(),
           "stopReasons": res.stop_histogram(), "accounting": res.accounting}
    if args.trace:
        out["trace"] = [p.to_dict() for p in res.peel_trace]
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "ledger.json"), "w") as fh:
            fh.write(res.ledger.to_json())
    _emit(out, args.out, "result.json")
    return 0


def cmd_decompose(args):
    view = MatroidView(load(args.matroid))
    cfg = _config(args.config) or AlgorithmConfig()
    ledger = RoundLedger(args.seed)
    view, gone = remove_small_circuits(view, cfg.c0, ledger)
    if args.algo == "kps49":
        dec = new_decomposition(view, ledger, cfg.with_(singleton_only=True))
    else:
        dec = guaranteed_progress_decomposition(view, ledger, cfg)
    out = {"stopReason": dec.reason, "preDeleted": len(gone),
           "sets": [{"members": s.members.tolist(), "alpha": s.alpha, "good": s.good} for s in dec.sets],
           "trace": [p.to_dict() for p in dec.records], "ledger": ledger.to_dict()}
    _emit(out, args.out, "decomposition.json")
    return 0


def cmd_sequence(args):
    view = MatroidView(load(args.matroid))
    ledger = RoundLedger(args.seed)
    seq, acct = random_feasible_sequence(view, ledger, finder=args.algo, config=_config(args.config))
    out = seq.to_dict()
    out.update({"ledger": ledger.to_dict(), "accounting": acct})
    _emit(out, args.out, "sequence.json")
    return 0


def cmd_experiment(args):
    with open(args.spec) as fh:
        data = json.load(fh)
    if args.out:
        data["out"] = args.out
    if args.trace:
        data["trace"] = True
    if args.seed is not None:
        data["seeds"] = [args.seed]
    if args.config:
        with open(args.config) as fh:
            data["config"] = json.load(fh)
    spec = ExperimentSpec.parse(data)
    records, failures = run_experiment(spec)
    table = summarize(records)
    if spec.out:
        write_summary(os.path.join(spec.out, "summary.csv"), table)
    for row in table:
        print(json.dumps(row))
    for f in failures:
        print(f"failed: {json.dumps(f)}", file=sys.stderr)
    return 1 if failures else 0


def cmd_summarize(args):
    records = []
    for path in args.records:
        records.extend(read_records(path))
    table = summarize(records)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_summary(os.path.join(args.out, "summary.csv"), table)
        with open(os.path.join(args.out, "plot.json"), "w") as fh:
            json.dump(plot_data(table), fh)
    for row in table:
        print(json.dumps(row))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="parmatroid", description="Low-adaptivity matroid basis finding.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, algo_default="main37"):
        sp.add_argument("--matroid", required=True, help="JSON file or gen:<family>:n=<size>,...")
        sp.add_argument("--algo", default=algo_default, choices=sorted(ALGORITHMS))
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--config", help="JSON file of config overrides")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--trace", action="store_true", help="include peel traces")

    common(sub.add_parser("find-basis", help="compute a basis and its round ledger"))
    common(sub.add_parser("decompose", help="run one decomposition and print its trace"))
    common(sub.add_parser("sequence", help="random feasible sequence"))
    ex = sub.add_parser("experiment", help="run an experiment grid from a JSON spec")
    ex.add_argument("spec")
    ex.add_argument("--seed", type=int)
    ex.add_argument("--config")
    ex.add_argument("--out")
    ex.add_argument("--trace", action="store_true")
    sm = sub.add_parser("summarize", help="rounds vs n table with log-log slopes")
    sm.add_argument("records", nargs="+", help="records.csv or records.jsonl files")
    sm.add_argument("--out")
    return p


COMMANDS = {"find-basis": cmd_find_basis, "decompose": cmd_decompose, "sequence": cmd_sequence,
            "experiment": cmd_experiment, "summarize": cmd_summarize}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (MatroidError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"invalid run: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
