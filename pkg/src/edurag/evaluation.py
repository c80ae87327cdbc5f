"""Aggregation of instructor judgments: rubric means, weighted averages, accuracy.

Arithmetic is exact (``Fraction``) until display; display rounds half away from
zero, 3 decimals for rubric means and 2 for accuracy percentages.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

from .errors import ContractError, EmptyGroupError, ValidationError

DIMENSIONS = ("fluency", "clarity", "conciseness", "rel_slide", "rel_dnuconcept")
DIMENSION_LABELS = {
    "fluency": "Flu.",
    "clarity": "Clar.",
    "conciseness": "Conc.",
    "rel_slide": "Rel_slide",
    "rel_dnuconcept": "Rel_dnuconcept",
}
RUBRIC_COLUMNS = ("mooc_label", "question_id", "dnu_concept") + DIMENSIONS
ACCURACY_COLUMNS = ("mooc_label", "question_id", "verdict")

Number = Union[int, float, Fraction, Decimal, str]


def exact(x: Number) -> Fraction:
    """Floats go through their shortest repr, so 2.967 means 2967/1000."""
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def round_half_up(x: Number, places: int) -> Decimal:
    f = exact(x)
    value = Decimal(f.numerator) / Decimal(f.denominator)
    return value.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class QgRubricRecord:
    mooc_label: str
    question_id: str
    scores: Mapping[str, int]
    dnu_concept: str = ""


@dataclass(frozen=True)
class QaAccuracyRecord:
    mooc_label: str
    question_id: str
    verdict: str  # correct | incorrect

    @property
    def correct(self) -> bool:
        return self.verdict == "correct"


@dataclass
class RecordSet:
    rubric: list[QgRubricRecord] = field(default_factory=list)
    accuracy: list[QaAccuracyRecord] = field(default_factory=list)

    def moocs(self) -> list[str]:
        labels = [r.mooc_label for r in self.rubric] + [r.mooc_label for r in self.accuracy]
        return list(dict.fromkeys(labels))

    def __len__(self) -> int:
        return len(self.rubric) + len(self.accuracy)


def validate_records(records: Iterable[QgRubricRecord | QaAccuracyRecord]) -> RecordSet:
    out = RecordSet()
    seen: set[tuple[str, str, str]] = set()
    for i, rec in enumerate(records):
        kind = "rubric" if isinstance(rec, QgRubricRecord) else "accuracy"
        key = (kind, rec.mooc_label, rec.question_id)
        if key in seen:
            raise ValidationError(f"record {i}: duplicate question id {rec.question_id!r} in {rec.mooc_label!r}")
        seen.add(key)
        if not rec.mooc_label or not rec.question_id:
            raise ValidationError(f"record {i}: mooc_label and question_id are required")
        if isinstance(rec, QgRubricRecord):
            for dim in DIMENSIONS:
                score = rec.scores.get(dim)
                if isinstance(score, bool) or score not in (1, 2, 3):
                    raise ValidationError(f"record {i}: {dim} score {score!r} is outside 1..3")
            out.rubric.append(rec)
        else:
            if rec.verdict not in ("correct", "incorrect"):
                raise ValidationError(f"record {i}: verdict must be correct|incorrect, got {rec.verdict!r}")
            out.accuracy.append(rec)
    return out


def synthesize_rubric(mooc: str, means: Mapping[str, Number], count: int, prefix: str = "q") -> list[QgRubricRecord]:
    """``count`` integer-scored records whose per-dimension means are exactly ``means``.

    Scores start at 3 and the deficit is taken out one point at a time from the
    front (3 -> 2, then 2 -> 1), so the result is deterministic.
    """
    if count < 1:
        raise ContractError("count must be >= 1")
    columns: dict[str, list[int]] = {}
    for dim in DIMENSIONS:
        total = exact(means[dim]) * count
        if total.denominator != 1 or not count <= total <= 3 * count:
            raise ValidationError(f"{dim} mean {means[dim]} is not reachable with {count} integer scores")
        deficit = 3 * count - int(total)
        col = [3] * count
        for i in range(deficit):
            col[i % count] -= 1
        columns[dim] = col
    return [
        QgRubricRecord(mooc, f"{prefix}{i + 1}", {d: columns[d][i] for d in DIMENSIONS})
        for i in range(count)
    ]


def _int_score(raw: str, i: int, dim: str) -> int:
    try:
        return int(raw.strip())
    except (ValueError, AttributeError):
        raise ValidationError(f"record {i}: {dim} score {raw!r} is not an integer") from None


def parse_records(text: str) -> RecordSet:
    """Delimited text with a header row; rubric and verdict columns may both appear."""
    try:
        dialect = csv.Sniffer().sniff(text.splitlines()[0] if text.strip() else "", delimiters=",;\t")
    except csv.Error:
        dialect = csv.excel
    reader = csv.DictReader(io.StringIO(text), dialect=dialect)
    header = set(reader.fieldnames or ())
    has_rubric = set(DIMENSIONS) <= header
    has_verdict = "verdict" in header
    if not {"mooc_label", "question_id"} <= header or not (has_rubric or has_verdict):
        raise ValidationError(f"unrecognized header {sorted(header)}; expected {RUBRIC_COLUMNS} or {ACCURACY_COLUMNS}")
    records: list[QgRubricRecord | QaAccuracyRecord] = []
    for i, row in enumerate(reader):
        label, qid = (row.get("mooc_label") or "").strip(), (row.get("question_id") or "").strip()
        if has_rubric and any((row.get(d) or "").strip() for d in DIMENSIONS):
            scores = {d: _int_score(row.get(d) or "", i, d) for d in DIMENSIONS}
            records.append(QgRubricRecord(label, qid, scores, (row.get("dnu_concept") or "").strip()))
        if has_verdict and (row.get("verdict") or "").strip():
            records.append(QaAccuracyRecord(label, qid, row["verdict"].strip().lower()))
    return validate_records(records)


def ingest_records(path: str | Path) -> RecordSet:
    return parse_records(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class DimensionMeans:
    mooc_label: str
    count: int
    means: dict[str, Fraction]

    @property
    def average(self) -> Fraction:
        return sum(self.means.values(), Fraction(0)) / len(self.means)

    def rounded(self) -> dict[str, Decimal]:
        out = {d: round_half_up(v, 3) for d, v in self.means.items()}
        out["average"] = round_half_up(self.average, 3)
        return out


def dimension_means(records: Sequence[QgRubricRecord], mooc: str) -> DimensionMeans:
    group = [r for r in records if r.mooc_label == mooc]
    if not group:
        raise EmptyGroupError(f"no rubric records for {mooc!r}")
    means = {d: Fraction(sum(r.scores[d] for r in group), len(group)) for d in DIMENSIONS}
    return DimensionMeans(mooc, len(group), means)


def weighted_average(
    per_mooc_means: Mapping[str, Mapping[str, Number]],
    weights: Mapping[str, Number],
) -> dict[str, Fraction]:
    """Per-dimension sum(mean * weight) / sum(weight). Exact; round for display."""
    if set(per_mooc_means) != set(weights):
        raise ContractError(f"mooc sets differ: {sorted(per_mooc_means)} vs {sorted(weights)}")
    if not weights:
        raise EmptyGroupError("nothing to average")
    w = {m: exact(v) for m, v in weights.items()}
    if any(v <= 0 for v in w.values()):
        raise ContractError("weights must be positive")
    dims = list(next(iter(per_mooc_means.values())))
    if any(list(means) != dims for means in per_mooc_means.values()):
        raise ContractError("every mooc must report the same dimensions")
    total = sum(w.values(), Fraction(0))
    return {d: sum((exact(per_mooc_means[m][d]) * w[m] for m in w), Fraction(0)) / total for d in dims}


@dataclass(frozen=True)
class Accuracy:
    mooc_label: str
    correct: int
    total: int

    @property
    def percent(self) -> Decimal:
        return round_half_up(Fraction(100 * self.correct, self.total), 2)


def accuracy(records: Sequence[QaAccuracyRecord], mooc: str | None = None) -> Accuracy:
    """Accuracy of one MOOC, or of every record pooled when ``mooc`` is None."""
    group = [r for r in records if mooc is None or r.mooc_label == mooc]
    if not group:
        raise EmptyGroupError(f"no verdict records for {mooc!r}")
    return Accuracy(mooc or "overall", sum(r.correct for r in group), len(group))


@dataclass
class AggregateReport:
    rubric_rows: list[DimensionMeans]
    rubric_weighted: dict[str, Fraction] | None
    accuracy_rows: list[Accuracy]
    accuracy_overall: Accuracy | None


def aggregate(records: RecordSet) -> AggregateReport:
    if not len(records):
        raise EmptyGroupError("no records to aggregate")
    rubric_moocs = list(dict.fromkeys(r.mooc_label for r in records.rubric))
    rows = [dimension_means(records.rubric, m) for m in rubric_moocs]
    weighted = None
    if rows:
        weighted = weighted_average({r.mooc_label: r.means for r in rows}, {r.mooc_label: r.count for r in rows})
    acc_moocs = list(dict.fromkeys(r.mooc_label for r in records.accuracy))
    acc_rows = [accuracy(records.accuracy, m) for m in acc_moocs]
    overall = accuracy(records.accuracy) if acc_rows else None
    return AggregateReport(rows, weighted, acc_rows, overall)


def _fmt(d: Decimal) -> str:
    return format(d, "f")


def export_report(report: AggregateReport) -> tuple[dict, str]:
    """Machine-readable document plus a plain-text rendering of both tables."""
    if not report.rubric_rows and not report.accuracy_rows:
        raise EmptyGroupError("refusing to export an empty report")
    doc: dict = {}
    lines: list[str] = []
    if report.rubric_rows:
        weighted = {d: round_half_up(v, 3) for d, v in report.rubric_weighted.items()}
        weighted["average"] = round_half_up(sum(report.rubric_weighted.values(), Fraction(0)) / len(DIMENSIONS), 3)
        doc["question_generation"] = {
            "moocs": [
                {"mooc_label": r.mooc_label, "count": r.count, **{k: float(v) for k, v in r.rounded().items()}}
                for r in report.rubric_rows
            ],
            "weighted_average": {k: float(v) for k, v in weighted.items()},
        }
        head = ["MOOCs"] + [DIMENSION_LABELS[d] for d in DIMENSIONS] + ["Avg."]
        body = [[r.mooc_label] + [_fmt(v) for v in r.rounded().values()] for r in report.rubric_rows]
        body.append(["Weighted Avg."] + [_fmt(weighted[d]) for d in DIMENSIONS] + [_fmt(weighted["average"])])
        lines += _table(head, body)
    if report.accuracy_rows:
        ov = report.accuracy_overall
        doc["question_answering"] = {
            "moocs": [
                {"mooc_label": a.mooc_label, "percent": float(a.percent), "correct": a.correct, "total": a.total}
                for a in report.accuracy_rows
            ],
            "weighted_average": {"percent": float(ov.percent), "correct": ov.correct, "total": ov.total},
        }
        head = ["MOOCs", "Accuracy (%)", "Correct / Total"]
        body = [[a.mooc_label, _fmt(a.percent), f"{a.correct}/{a.total}"] for a in report.accuracy_rows]
        body.append(["Weighted Average", _fmt(ov.percent), f"{ov.correct}/{ov.total}"])
        if lines:
            lines.append("")
        lines += _table(head, body)
    return doc, "\n".join(lines) + "\n"


def _table(head: list[str], body: list[list[str]]) -> list[str]:
    widths = [max(len(row[i]) for row in [head] + body) for i in range(len(head))]
    rule = "+" + "+".join("-" * (w + 2) for w in widths) + "+"

    def fmt(row):
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        return "| " + " | ".join(cells) + " |"

    out = [rule, fmt(head), rule]
    for row in body:
        out += [fmt(row), rule]
    return out


def write_report(report: AggregateReport, out: str | Path) -> str:
    doc, text = export_report(report)
    Path(out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return text
