"""``engine`` command line: serve, ingest, ask, eval."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from ..errors import EngineError

DEFAULT_CONFIG = os.environ.get("ENGINE_CONFIG", "engine.yaml")


def _engine(config_path: str):
    from .config import ServiceConfig
    from .engine import Engine

    return Engine(ServiceConfig.load(config_path))


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    engine = _engine(args.config)
    uvicorn.run(create_app(engine), host=engine.config.host, port=engine.config.port)
    return 0


def cmd_ingest(args) -> int:
    engine = _engine(args.config)
    print(json.dumps(engine.ingest(Path(args.deck).read_bytes()), indent=2))
    return 0


def cmd_ask(args) -> int:
    engine = _engine(args.config)
    answers = engine.ask(args.material, args.slide, args.question)
    print(json.dumps(engine.answer_document(args.material, answers), indent=2, ensure_ascii=False))
    return 0 if answers.status != "error" else 1


def cmd_eval(args) -> int:
    from ..evaluation import aggregate, export_report, ingest_records

    report = aggregate(ingest_records(args.records))
    doc, table = export_report(report)
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(table, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="engine", description="Graph RAG engine for slide-deck learning materials")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", default=DEFAULT_CONFIG)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("ingest", help="build and index the EduKG of a deck-v1 file")
    p.add_argument("deck")
    p.add_argument("--config", default=DEFAULT_CONFIG)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("ask", help="answer a free-form question about one slide")
    p.add_argument("--material", required=True)
    p.add_argument("--slide", required=True, type=int)
    p.add_argument("--question", required=True)
    p.add_argument("--config", default=DEFAULT_CONFIG)
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("eval", help="aggregate rubric / accuracy records into per-MOOC report tables")
    p.add_argument("records")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (EngineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
