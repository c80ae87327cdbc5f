"""Walk the fixture learner scenario through the engine and print each step.

Ingest the intro deck, mark "Artificial Intelligence" as not understood on
slide 4, answer the applications question, then ask the tuning question that
needs the related-article fallback. Uses engine.yaml (scripted chat model).

    python scripts/run_scenario.py [--config engine.yaml] [--data-dir DIR]
"""

from __future__ import annotations

import argparse
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from edurag.service import Engine, ServiceConfig

ROOT = Path(__file__).resolve().parents[1]
DECK = ROOT / "fixtures" / "decks" / "intro_ml.json"


def show(engine: Engine, material: str, answers) -> None:
    doc = engine.answer_document(material, answers)
    print(f"  status: {doc['status']}")
    for a in doc["answers"]:
        print(f"  [{a['tier']}] {a['answer_text']}")
        print(f"      {a['citation_url']}")


def run(config: ServiceConfig) -> None:
    engine = Engine(config)
    material = engine.ingest(DECK.read_bytes())
    print(f"ingested {material['material_id']}: {material['slide_count']} slides, "
          f"{material['mc_count']} main concepts, {material['wp_count']} paragraphs")
    mid = material["material_id"]
    concepts = engine.concepts(mid, 4)["main_concepts"]
    print("slide 4 concepts:", ", ".join(c["name"] for c in concepts))
    ai = next(c for c in concepts if c["name"] == "Artificial Intelligence")
    event = engine.mark_dnu("farah", mid, 4, ai["id"])
    print("recommended questions:")
    for q in event["questions"]:
        print(f"  {q['question_id']}  {q['rank_score']:.3f}  {q['text']}")
    pick = next(q for q in event["questions"] if "applications" in q["text"])
    print(f"answer to {pick['text']!r}:")
    show(engine, mid, engine.answer(pick["question_id"]))
    tuning = "What is parameter tuning in Machine Learning?"
    print(f"answer to {tuning!r}:")
    show(engine, mid, engine.ask(mid, 4, tuning))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=str(ROOT / "engine.yaml"))
    parser.add_argument("--data-dir", help="keep state here instead of a temporary directory")
    args = parser.parse_args(argv)
    config = ServiceConfig.load(args.config)
    if args.data_dir:
        run(replace(config, data_dir=args.data_dir))
    else:
        with tempfile.TemporaryDirectory() as tmp:
            run(replace(config, data_dir=tmp))
    return 0


if __name__ == "__main__":
    sys.exit(main())
