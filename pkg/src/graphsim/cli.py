"""Operator command line: serve, gen, eval, replay, demo."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from graphsim.core import load_snapshot, plain

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_THRESHOLD = 2



def _print_json(doc) -> None:
    print(json.dumps(plain(doc), indent=2, ensure_ascii=False))


def cmd_serve(args: argparse.Namespace) -> int:
    from graphsim.service import ServiceConfig, serve

    cfg = ServiceConfig.load(args.config)
    if args.host:
        cfg.host = args.host
    if args.port:
        cfg.port = args.port
    serve(cfg)
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    from graphsim.benchgen import CorpusManifest, generate_corpus
    from graphsim.evalkit import TASKS

    if args.manifest:
        manifest = CorpusManifest.from_dict(json.loads(Path(args.manifest).read_text(encoding="utf-8")))
    else:
        manifest = CorpusManifest()
    if args.smoke:
        manifest.counts = {t: (2, 1) for t in TASKS}
    if args.seed is not None:
        manifest.master_seed = args.seed
    corpus = generate_corpus(manifest, args.out, workers=args.workers)
    print(f"wrote {len(corpus.split('train'))} train / {len(corpus.split('test'))} test instances to {args.out}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    from graphsim import evalkit

    truths = evalkit.load_ground_truth(args.ground_truth)
    transcripts = evalkit.load_transcripts(args.transcripts)
    report = evalkit.evaluate(transcripts, truths)
    print(evalkit.format_report(report))
    if args.json:
        Path(args.json).write_text(json.dumps(evalkit.report_document(report), indent=2) + "\n", encoding="utf-8")
    return EXIT_OK if report["threshold"]["deployable"] else EXIT_THRESHOLD


def cmd_replay(args: argparse.Namespace) -> int:
    from graphsim.sandbox import read_log, replay

    report = replay(load_snapshot(args.snapshot), read_log(args.log))
    _print_json(report.to_dict())
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_demo(args: argparse.Namespace) -> int:
    from graphsim import demo

    run = demo.run_restructure_demo if args.which == "restructure" else demo.run_approval_demo
    _, _, trace = run()
    doc = trace.to_document()
    if not args.full:
        doc["decision"].pop("assignment", None)
    _print_json(doc)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphsim", description="graph simulation sandbox")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("serve", help="run the HTTP tool service")
    s.add_argument("--config", help="JSON config file (GRAPHSIM_* env vars override it)")
    s.add_argument("--host")
    s.add_argument("--port", type=int)
    s.set_defaults(fn=cmd_serve)

    g = sub.add_parser("gen", help="generate a benchmark corpus")
    g.add_argument("--manifest", help="manifest JSON; default is 11 tasks x (200 train, 100 test)")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--smoke", action="store_true", help="2 train + 1 test per task")
    g.add_argument("--workers", type=int, default=1)
    g.set_defaults(fn=cmd_gen)

    e = sub.add_parser("eval", help="score transcripts against ground truth")
    e.add_argument("--transcripts", required=True)
    e.add_argument("--ground-truth", required=True, help="ground-truth or corpus split JSONL")
    e.add_argument("--json", help="also write the machine-readable report here")
    e.set_defaults(fn=cmd_eval)

    r = sub.add_parser("replay", help="verify a session log against its snapshot")
    r.add_argument("--snapshot", required=True)
    r.add_argument("--log", required=True)
    r.set_defaults(fn=cmd_replay)

    d = sub.add_parser("demo", help="run a shipped scenario end to end and print the trace")
    d.add_argument("which", nargs="?", choices=["approval", "restructure"], default="approval")
    d.add_argument("--full", action="store_true", help="include the full colour assignment")
    d.set_defaults(fn=cmd_demo)
    return p


def main(argv: list[str] | None = None) -> int:
    from graphsim.errors import GraphSimError

    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except (GraphSimError, ValueError, KeyError, OSError) as exc:
        # json.JSONDecodeError is a ValueError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
