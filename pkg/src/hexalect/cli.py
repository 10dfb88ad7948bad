"""Operator command line: ingest, train, eval, rescore, serve, simulate, synth.

Every subcommand is non-interactive and prints line-delimited JSON on
stdout (plus one human-readable count line for ingest).  Exit codes:
0 ok, 1 validation failure, 2 I/O failure, 3 server unreachable.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import classifier, selection, synthdata
from .classifier import ModelConfig
from .errors import HexalectError, InvalidPayload
from .store import CorpusStore

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_SERVER = 3

MODEL_FILENAME = "model.bin"


def _print(doc: dict) -> None:
    print(json.dumps(doc, sort_keys=True))


def _read_json(path: str) -> dict:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InvalidPayload(f"{path} is not valid JSON: {exc}") from exc


def _store(args) -> CorpusStore:
    return CorpusStore(Path(args.data))


def _model_path(args) -> Path:
    if getattr(args, "model", None):
        return Path(args.model)
    return Path(args.data) / args.family / MODEL_FILENAME


# -- subcommand handlers -------------------------------------------------------


def cmd_ingest(args) -> int:
    store = _store(args)
    known = {f.family_id for f in store.families()}
    if args.family not in known:
        store.register_family(_read_json(args.registry))
    if args.divisions:
        store.load_divisions(args.family, _read_json(args.divisions))
    store.ingest_corpus(Path(args.corpus), args.family)
    view = store.snapshot(args.family)
    print(f"groups: {len(view.groups)}, labels: {len(view.label_set)}")
    return EXIT_OK


def cmd_train(args) -> int:
    store = _store(args)
    view = store.snapshot(args.family)
    if args.autotune:
        result = classifier.autotune(
            view, args.max_bytes, time_budget_s=args.budget,
            max_candidates=args.candidates, seed=args.seed, ratio=args.ratio)
        model, report = result.model, result.report
        candidates = result.candidates_tried
    else:
        config = ModelConfig(seed=args.seed)
        split = classifier.split_train_test(view, ratio=args.ratio,
                                            seed=args.seed)
        model = classifier.train(split.train, config,
                                 tuple(sorted(view.label_set)))
        report = classifier.evaluate(model, split.test, split_seed=args.seed)
        candidates = 1
    blob = classifier.serialize_model(model)
    path = _model_path(args)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(blob)
    _print({
        "model_path": str(path),
        "model_bytes": len(blob),
        "model_hash": model.version,
        "micro_f1": report.micro_f1,
        "macro_f1": report.macro_f1,
        "candidates_tried": candidates,
    })
    return EXIT_OK


def cmd_eval(args) -> int:
    store = _store(args)
    view = store.snapshot(args.family)
    model = classifier.load_model(_model_path(args))
    split = classifier.split_train_test(view, ratio=args.ratio, seed=args.seed)
    report = classifier.evaluate(model, split.test, split_seed=args.seed)
    _print({
        "micro_f1": report.micro_f1,
        "macro_f1": report.macro_f1,
        "test_examples": len(split.test),
        "model_hash": model.version,
    })
    for label in sorted(report.per_class):
        metrics = report.per_class[label]
        _print({
            "label": label,
            "precision": metrics.precision,
            "recall": metrics.recall,
            "f1": metrics.f1,
            "support": metrics.support,
        })
    return EXIT_OK


def cmd_rescore(args) -> int:
    store = _store(args)
    view = store.snapshot(args.family)
    model = classifier.load_model(_model_path(args))
    table = selection.rescore_all(view, model)
    lines = selection.report_lines(table)
    out = Path(args.out) if args.out \
        else Path(args.data) / args.family / "difficulty.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + ("\n" if lines else ""),
                   encoding="utf-8")
    tiers = {"HARD": 0, "NORMAL": 0, "EASY": 0}
    for record in table.records:
        tiers[record.tier] += 1
    _print({"out": str(out), "groups": len(lines), "hard": tiers["HARD"],
            "normal": tiers["NORMAL"], "easy": tiers["EASY"]})
    return EXIT_OK


def cmd_serve(args) -> int:
    from .config import load_config
    from .service import run_server

    run_server(load_config(args.config))
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .simulate import run_simulation

    report = run_simulation(
        args.family, args.rounds, args.seed,
        confirm_accuracy=args.confirm_accuracy, server=args.server,
        data_dir=Path(args.data) if args.data else None, emit=_print)
    _print(report.summary)
    return EXIT_OK


def cmd_synth(args) -> int:
    names = [args.family] if args.family else sorted(synthdata.SPECS)
    for name in names:
        if name not in synthdata.SPECS:
            raise InvalidPayload(f"no bundled family named {name!r}")
        target = synthdata.write_family(Path(args.out), name)
        _print({"family": name, "path": str(target)})
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hexalect",
        description="Dialect-mapping game: corpus, model, and server tooling.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a registry + corpus into a store")
    p.add_argument("--data", required=True, help="store directory")
    p.add_argument("--family", required=True)
    p.add_argument("--registry", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--divisions")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("train", help="train (or autotune) a family's model")
    p.add_argument("--data", required=True)
    p.add_argument("--family", required=True)
    p.add_argument("--autotune", action="store_true")
    p.add_argument("--budget", type=float, default=None,
                   help="autotune time budget in seconds")
    p.add_argument("--candidates", type=int, default=12,
                   help="autotune candidate cap")
    p.add_argument("--max-bytes", type=int, default=2_097_152)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--model", help="output path (default <data>/<family>/model.bin)")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", help="evaluate the stored model on a fresh split")
    p.add_argument("--data", required=True)
    p.add_argument("--family", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--model")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("rescore", help="write the difficulty report")
    p.add_argument("--data", required=True)
    p.add_argument("--family", required=True)
    p.add_argument("--model")
    p.add_argument("--out", help="report path (default <data>/<family>/difficulty.jsonl)")
    p.set_defaults(handler=cmd_rescore)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", help="config path (or HEXALECT_CONFIG env var)")
    p.set_defaults(handler=cmd_serve)

    p = sub.add_parser("simulate", help="play scripted quiz rounds via the API")
    p.add_argument("--family", required=True)
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--confirm-accuracy", type=float, default=0.9)
    p.add_argument("--server", help="base URL of a running service "
                                    "(default: in-process instance)")
    p.add_argument("--data", help="store directory for the in-process instance "
                                  "(default: temporary)")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("synth", help="regenerate the bundled synthetic families")
    p.add_argument("--out", default=str(synthdata.bundled_root()))
    p.add_argument("--family")
    p.set_defaults(handler=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except HexalectError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(json.dumps({"error": "io", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # httpx import is lazy; match by name
        if type(exc).__module__.startswith("httpx"):
            print(json.dumps({"error": "server", "message": str(exc)}),
                  file=sys.stderr)
            return EXIT_SERVER
        raise


if __name__ == "__main__":
    sys.exit(main())
