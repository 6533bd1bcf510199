"""Chunk-vote aggregation, classification metrics, per-descriptor breakdowns.

Document verdicts come from a majority vote over chunk predictions; an even
split resolves to dismissal (label 0), mirroring the dominant class of the
corpus.  A score-sum tie-break is available as an alternative for callers
that trust the classifier's confidences.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ValidationError
from .lexicon import Lexicon
from .matcher import DescriptorMatch
from .preprocess import doc_id_of

log = logging.getLogger(__name__)

TIE_BREAKS = ("majority_class", "score_sum")


@dataclass(frozen=True)
class PredictionRecord:
    unit_id: str
    predicted: int
    scores: tuple[float, float] | None = None

    def __post_init__(self):
        if self.predicted not in (0, 1):
            raise ValidationError(f"prediction for {self.unit_id!r} must be 0 or 1")
        if self.scores is not None:
            if len(self.scores) != 2 or any(not 0.0 <= s <= 1.0 for s in self.scores):
                raise ValidationError(f"scores for {self.unit_id!r} must be two values in [0, 1]")
            object.__setattr__(self, "scores", (float(self.scores[0]), float(self.scores[1])))


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts with class 0 as the positive class."""

    tp0: int
    fn0: int
    fp0: int
    tn0: int

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "ConfusionMatrix":
        tp0 = fn0 = fp0 = tn0 = 0
        for predicted, true in pairs:
            if true == 0:
                if predicted == 0:
                    tp0 += 1
                else:
                    fn0 += 1
            else:
                if predicted == 0:
                    fp0 += 1
                else:
                    tn0 += 1
        return cls(tp0, fn0, fp0, tn0)

    @property
    def total(self) -> int:
        return self.tp0 + self.fn0 + self.fp0 + self.tn0


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    per_class: dict[int, ClassMetrics]
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    total_support: int


def _safe_div(num: float, den: float, what: str) -> float:
    if den == 0:
        log.warning("%s undefined (zero denominator); reported as 0", what)
        return 0.0
    return num / den


def aggregate_votes(
    chunk_predictions: Sequence[PredictionRecord],
    tie_break: str = "majority_class",
) -> dict[str, PredictionRecord]:
    """Document verdicts from chunk predictions, keyed by doc_id.

    ``majority_class`` resolves even splits to 0 (dismissal); ``score_sum``
    compares summed class scores instead, still falling back to 0 on an exact
    tie.  The result is invariant under permutation of the chunk list.
    """
    if tie_break not in TIE_BREAKS:
        raise ValidationError(f"unknown tie_break {tie_break!r}")
    grouped: dict[str, list[PredictionRecord]] = {}
    for record in chunk_predictions:
        grouped.setdefault(doc_id_of(record.unit_id), []).append(record)

    verdicts: dict[str, PredictionRecord] = {}
    for doc_id in sorted(grouped):
        records = grouped[doc_id]
        if not records:
            raise ValidationError(f"document {doc_id!r} has no chunk predictions")
        votes = [0, 0]
        score_sums = [0.0, 0.0]
        have_scores = True
        for r in records:
            votes[r.predicted] += 1
            if r.scores is None:
                have_scores = False
            else:
                score_sums[0] += r.scores[0]
                score_sums[1] += r.scores[1]
        if tie_break == "score_sum":
            if not have_scores:
                raise ValidationError(f"document {doc_id!r}: score_sum tie-break needs scores on every chunk")
            verdict = 1 if score_sums[1] > score_sums[0] else 0
        else:
            verdict = 1 if votes[1] > votes[0] else 0
        scores: tuple[float, float] | None = None
        if have_scores:
            total = score_sums[0] + score_sums[1]
            if total > 0:
                scores = (score_sums[0] / total, score_sums[1] / total)
        verdicts[doc_id] = PredictionRecord(unit_id=doc_id, predicted=verdict, scores=scores)
    return verdicts


def classification_report(pairs: Sequence[tuple[int, int]]) -> MetricsReport:
    """Per-class precision/recall/F1/support with macro and weighted averages.

    ``pairs`` are (predicted, true) labels.  Undefined ratios (empty class or
    no predictions for a class) are reported as 0 with a diagnostic.
    """
    if not pairs:
        raise ValidationError("classification_report needs at least one pair")
    cm = ConfusionMatrix.from_pairs(pairs)
    per_class: dict[int, ClassMetrics] = {}
    for label in (0, 1):
        if label == 0:
            tp, fn, fp = cm.tp0, cm.fn0, cm.fp0
        else:
            tp, fn, fp = cm.tn0, cm.fp0, cm.fn0
        support = tp + fn
        precision = _safe_div(tp, tp + fp, f"precision[{label}]")
        recall = _safe_div(tp, support, f"recall[{label}]")
        f1 = _safe_div(2 * precision * recall, precision + recall, f"f1[{label}]")
        per_class[label] = ClassMetrics(precision, recall, f1, support)

    total = cm.total
    accuracy = (cm.tp0 + cm.tn0) / total
    m0, m1 = per_class[0], per_class[1]

    def weighted(v0: float, v1: float) -> float:
        return (v0 * m0.support + v1 * m1.support) / total

    return MetricsReport(
        per_class=per_class,
        accuracy=accuracy,
        macro_precision=(m0.precision + m1.precision) / 2,
        macro_recall=(m0.recall + m1.recall) / 2,
        macro_f1=(m0.f1 + m1.f1) / 2,
        weighted_precision=weighted(m0.precision, m1.precision),
        weighted_recall=weighted(m0.recall, m1.recall),
        weighted_f1=weighted(m0.f1, m1.f1),
        total_support=total,
    )


def weighted_average(values: Sequence[float], supports: Sequence[int]) -> float:
    """Support-weighted mean, e.g. for reconstructing a weighted F1."""
    if len(values) != len(supports) or not values:
        raise ValidationError("values and supports must be equal-length and non-empty")
    total = sum(supports)
    if total == 0:
        raise ValidationError("total support must be positive")
    return sum(v * s for v, s in zip(values, supports)) / total


@dataclass(frozen=True)
class DescriptorOutcome:
    descriptor: str
    language: str
    correct: int
    wrong: int

    @property
    def total(self) -> int:
        return self.correct + self.wrong


def per_descriptor_performance(
    verdicts: Mapping[str, int],
    truths: Mapping[str, int],
    matches: Iterable[DescriptorMatch],
    lexicon: Lexicon,
    language: str | None = None,
) -> list[DescriptorOutcome]:
    """Correct/wrong verdict counts for documents containing each descriptor.

    A document counts once per descriptor no matter how many occurrences it
    holds.  Only documents present in ``verdicts`` participate.  Sorted by
    total documents descending, then surface.
    """
    containing: dict[tuple[str, str], set[str]] = {}
    for match in matches:
        d = lexicon.get(match.descriptor_id)
        if language is not None and d.language != language:
            continue
        doc_id = doc_id_of(match.unit_id)
        if doc_id not in verdicts:
            continue
        containing.setdefault((d.surface, d.language), set()).add(doc_id)

    rows: list[DescriptorOutcome] = []
    for (surface, lang), doc_ids in containing.items():
        correct = wrong = 0
        for doc_id in doc_ids:
            if doc_id not in truths:
                raise ValidationError(f"no true label for document {doc_id!r}")
            if verdicts[doc_id] == truths[doc_id]:
                correct += 1
            else:
                wrong += 1
        rows.append(DescriptorOutcome(surface, lang, correct, wrong))
    rows.sort(key=lambda r: (-r.total, r.descriptor, r.language))
    return rows
