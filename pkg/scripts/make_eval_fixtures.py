"""Write the 100-record evaluation fixtures (30 LA / 40 HCI / 30 WT).

rubric.csv   per-question scores; LA and HCI hit the published row means
             exactly, WT uses the nearest means reachable with 30 integer
             scores (its published means are not multiples of 1/30).
verdicts.csv correct/incorrect verdicts: 17/30, 18/40, 10/30.

    python scripts/make_eval_fixtures.py [--out fixtures/eval]
"""

from __future__ import annotations

import argparse
import csv
from fractions import Fraction
from pathlib import Path

from edurag.evaluation import DIMENSIONS, RUBRIC_COLUMNS, synthesize_rubric

ROOT = Path(__file__).resolve().parents[1]

PUBLISHED = {
    "LA": ("2.967", "2.867", "2.967", "3.000", "3.000"),
    "HCI": ("3.000", "2.875", "3.000", "2.725", "2.550"),
    "WT": ("2.969", "2.750", "2.943", "2.875", "2.496"),
}
COUNTS = {"LA": 30, "HCI": 40, "WT": 30}
CORRECT = {"LA": 17, "HCI": 18, "WT": 10}


def nearest_reachable(mean: str, count: int) -> Fraction:
    return Fraction(round(Fraction(mean) * count), count)


def rubric_rows():
    for mooc, values in PUBLISHED.items():
        n = COUNTS[mooc]
        means = {d: nearest_reachable(v, n) for d, v in zip(DIMENSIONS, values)}
        for rec in synthesize_rubric(mooc, means, n, prefix=f"{mooc.lower()}-"):
            yield {"mooc_label": mooc, "question_id": rec.question_id, "dnu_concept": "", **rec.scores}


def verdict_rows():
    for mooc, n in COUNTS.items():
        for i in range(n):
            verdict = "correct" if i < CORRECT[mooc] else "incorrect"
            yield {"mooc_label": mooc, "question_id": f"{mooc.lower()}-{i + 1}", "verdict": verdict}


def write(path: Path, columns, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=ROOT / "fixtures" / "eval")
    args = parser.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    write(args.out / "rubric.csv", RUBRIC_COLUMNS, rubric_rows())
    write(args.out / "verdicts.csv", ("mooc_label", "question_id", "verdict"), verdict_rows())
    print(f"wrote {args.out}/rubric.csv and verdicts.csv")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
