"""Agreement between predicted levels and human labels, across thresholds.

Metrics are computed in plain Python from 2x2 (optionally 3x2) counts; the
test suite checks every formula against an independent naive-loop oracle.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from .corpus import HumanLabel, Level
from .errors import EmptyAfterFilter, EmptyMatrix, MissingLabel
from .pipeline import classify

DEFAULT_THRESHOLDS = (1, 2, 3, 4)


class FilterPolicy(str, Enum):
    EXCLUDE_INCORRECT = "exclude_incorrect"
    INCLUDE_ALL = "include_all"


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts indexed (gold, predicted); mm = gold multistructural predicted
    multistructural, and so on. im/ir hold gold-incorrect rows under the
    include_all policy (incorrect is never predicted, so there is no third
    column)."""

    mm: int = 0
    mr: int = 0
    rm: int = 0
    rr: int = 0
    im: int = 0
    ir: int = 0

    @property
    def n(self) -> int:
        return self.mm + self.mr + self.rm + self.rr + self.im + self.ir


def build_confusion(
    pairs: Sequence[tuple[HumanLabel, Level]],
    policy: FilterPolicy = FilterPolicy.EXCLUDE_INCORRECT,
) -> ConfusionMatrix:
    cells = {"mm": 0, "mr": 0, "rm": 0, "rr": 0, "im": 0, "ir": 0}
    for label, level in pairs:
        if label == HumanLabel.INCORRECT:
            if policy == FilterPolicy.EXCLUDE_INCORRECT:
                continue
            gold = "i"
        elif label == HumanLabel.MULTISTRUCTURAL_CORRECT:
            gold = "m"
        else:
            gold = "r"
        pred = "m" if level == Level.MULTISTRUCTURAL else "r"
        cells[gold + pred] += 1
    matrix = ConfusionMatrix(**cells)
    if matrix.n == 0:
        raise EmptyAfterFilter("no labeled pairs left to score")
    return matrix


def _marginals(m: ConfusionMatrix) -> tuple[dict[str, int], dict[str, int]]:
    rows = {"m": m.mm + m.mr, "r": m.rm + m.rr, "i": m.im + m.ir}
    cols = {"m": m.mm + m.rm + m.im, "r": m.mr + m.rr + m.ir, "i": 0}
    return rows, cols


def cohen_kappa(m: ConfusionMatrix) -> tuple[float, float, float]:
    """Chance-corrected agreement: returns (kappa, p_o, p_e)."""
    if m.n == 0:
        raise EmptyMatrix("cannot compute kappa on an empty matrix")
    n = m.n
    p_o = (m.mm + m.rr) / n
    rows, cols = _marginals(m)
    p_e = sum(rows[c] * cols[c] for c in ("m", "r", "i")) / (n * n)
    if p_e >= 1.0:
        # Both raters stuck to one identical class; agreement is either
        # perfect or chance cannot be corrected for.
        return (1.0 if p_o == 1.0 else 0.0), p_o, p_e
    kappa = (p_o - p_e) / (1.0 - p_e)
    return kappa, p_o, p_e


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


def _prf_for(m: ConfusionMatrix, positive: Level) -> tuple[PRF, list[str]]:
    if positive == Level.MULTISTRUCTURAL:
        tp, fp, fn = m.mm, m.rm + m.im, m.mr
    else:
        tp, fp, fn = m.rr, m.mr + m.ir, m.rm
    warnings = []
    if tp + fp == 0:
        warnings.append(f"no predicted {positive.value}; precision set to 0")
        precision = 0.0
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        warnings.append(f"no gold {positive.value}; recall set to 0")
        recall = 0.0
    else:
        recall = tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return PRF(precision, recall, f1), warnings


def prf(
    m: ConfusionMatrix, positive_class: Level = Level.MULTISTRUCTURAL
) -> tuple[PRF, dict[Level, PRF], PRF]:
    """Precision/recall/F1 for the positive class, per class, and macro."""
    if m.n == 0:
        raise EmptyMatrix("cannot compute precision/recall on an empty matrix")
    per_class = {level: _prf_for(m, level)[0] for level in Level}
    macro = PRF(
        precision=sum(p.precision for p in per_class.values()) / len(per_class),
        recall=sum(p.recall for p in per_class.values()) / len(per_class),
        f1=sum(p.f1 for p in per_class.values()) / len(per_class),
    )
    return per_class[positive_class], per_class, macro


@dataclass(frozen=True)
class MetricSet:
    p_o: float
    p_e: float
    kappa: float
    precision: float
    recall: float
    f1: float
    per_class: dict[Level, PRF]
    macro: PRF
    positive_class: Level
    warnings: tuple[str, ...] = ()


def compute_metrics(
    m: ConfusionMatrix, positive_class: Level = Level.MULTISTRUCTURAL
) -> MetricSet:
    kappa, p_o, p_e = cohen_kappa(m)
    warnings: list[str] = []
    if p_e >= 1.0:
        warnings.append("degenerate marginals: both raters used a single class")
    headline, per_class, macro = prf(m, positive_class)
    for level in Level:
        warnings.extend(_prf_for(m, level)[1])
    return MetricSet(
        p_o=p_o,
        p_e=p_e,
        kappa=kappa,
        precision=headline.precision,
        recall=headline.recall,
        f1=headline.f1,
        per_class=per_class,
        macro=macro,
        positive_class=positive_class,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class EvalRow:
    threshold: int
    matrix: ConfusionMatrix
    metrics: MetricSet


@dataclass(frozen=True)
class EvalReport:
    policy: FilterPolicy
    positive_class: Level
    rows: tuple[EvalRow, ...]
    corpus: str = ""  # descriptor for logs; not serialized


class _CountRecord:
    """Duck-typed view over a result row dict from a results JSONL file."""

    __slots__ = ("response_id", "raw_count", "post_count", "question_id")

    def __init__(self, response_id: str, raw_count: int, post_count: int, question_id: str = ""):
        self.response_id = response_id
        self.raw_count = raw_count
        self.post_count = post_count
        self.question_id = question_id


def records_from_rows(rows: Sequence[dict]) -> tuple[list[_CountRecord], dict[str, HumanLabel]]:
    """Extract count records (skipping failure rows) and any embedded labels."""
    records: list[_CountRecord] = []
    labels: dict[str, HumanLabel] = {}
    for row in rows:
        if "error" in row:
            continue
        records.append(
            _CountRecord(
                row["response_id"],
                row["raw_count"],
                row["post_count"],
                row.get("question_id", ""),
            )
        )
        if row.get("human_label"):
            labels[row["response_id"]] = HumanLabel(row["human_label"])
    return records, labels


def group_by_question(records: Sequence[_CountRecord]) -> dict[str, list[_CountRecord]]:
    """Partition records by question for per-question reports (pooled is the
    default; this backs the opt-in grouping flag)."""
    grouped: dict[str, list[_CountRecord]] = {}
    for record in records:
        grouped.setdefault(record.question_id, []).append(record)
    return dict(sorted(grouped.items()))


def sweep(
    results: Sequence,
    labels: Mapping[str, HumanLabel],
    thresholds: Sequence[int] = DEFAULT_THRESHOLDS,
    use_post_counts: bool = True,
    positive_class: Level = Level.MULTISTRUCTURAL,
    policy: FilterPolicy = FilterPolicy.EXCLUDE_INCORRECT,
    corpus: str = "",
) -> EvalReport:
    """Reclassify stored counts at each threshold and score against labels.

    No backend calls happen here; flipping use_post_counts to False scores the
    raw (pre-rule) counts so rule impact can be reported side by side.
    """
    joined: list[tuple[HumanLabel, int]] = []
    for result in results:
        response_id = result.response_id
        if response_id not in labels:
            raise MissingLabel(response_id)
        count = result.post_count if use_post_counts else result.raw_count
        joined.append((labels[response_id], count))

    rows = []
    for t in sorted(set(thresholds)):
        pairs = [(label, classify(count, t)) for label, count in joined]
        matrix = build_confusion(pairs, policy)
        rows.append(EvalRow(threshold=t, matrix=matrix, metrics=compute_metrics(matrix, positive_class)))
    return EvalReport(policy=policy, positive_class=positive_class, rows=tuple(rows), corpus=corpus)


# --- report serialization ----------------------------------------------------

def _matrix_cells(report: EvalReport, matrix: ConfusionMatrix) -> dict:
    cells = {"mm": matrix.mm, "mr": matrix.mr, "rm": matrix.rm, "rr": matrix.rr}
    if report.policy == FilterPolicy.INCLUDE_ALL:
        cells["im"] = matrix.im
        cells["ir"] = matrix.ir
    return cells


def report_to_json(report: EvalReport) -> str:
    obj = {
        "policy": report.policy.value,
        "positive_class": report.positive_class.value,
        "rows": [
            {
                "threshold": row.threshold,
                "matrix": _matrix_cells(report, row.matrix),
                "agreement": row.metrics.p_o,
                "kappa": row.metrics.kappa,
                "p_o": row.metrics.p_o,
                "p_e": row.metrics.p_e,
                "precision": row.metrics.precision,
                "recall": row.metrics.recall,
                "f1": row.metrics.f1,
                "macro_f1": row.metrics.macro.f1,
            }
            for row in report.rows
        ],
    }
    return json.dumps(obj, indent=2) + "\n"


def report_to_csv(report: EvalReport) -> str:
    headers = ["threshold", "mm", "mr", "rm", "rr"]
    if report.policy == FilterPolicy.INCLUDE_ALL:
        headers += ["im", "ir"]
    headers += ["agreement", "kappa", "p_o", "p_e", "precision", "recall", "f1", "macro_f1"]
    lines = [",".join(headers)]
    for row in report.rows:
        cells = _matrix_cells(report, row.matrix)
        values = [row.threshold, *cells.values()]
        values += [
            row.metrics.p_o,
            row.metrics.kappa,
            row.metrics.p_o,
            row.metrics.p_e,
            row.metrics.precision,
            row.metrics.recall,
            row.metrics.f1,
            row.metrics.macro.f1,
        ]
        lines.append(",".join(str(v) for v in values))
    return "\n".join(lines) + "\n"
