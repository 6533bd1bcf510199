"""Attribution-export analysis: top-k membership and sign consistency.

The toolkit does not compute attributions; it consumes per-word attribution
exports and asks two questions.  Does a descriptor's word rank among the k
highest-attribution words of its unit?  And is the attribution sign of a
descriptor consistently oriented toward the dismissal label across its
occurrences?
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import SchemaError, ValidationError
from .lexicon import Lexicon
from .matcher import Candidate, DescriptorMatcher, MatchOptions, resolve_overlaps


@dataclass(frozen=True)
class AttributionRecord:
    """Per-unit word attributions exported by a classifier run."""

    unit_id: str
    predicted: int
    true_label: int
    attribution_target: int
    words: tuple[str, ...]
    attributions: tuple[float, ...]

    def __post_init__(self):
        import unicodedata

        object.__setattr__(
            self, "words", tuple(unicodedata.normalize("NFC", w) for w in self.words)
        )
        if self.predicted not in (0, 1) or self.true_label not in (0, 1):
            raise ValidationError(f"{self.unit_id!r}: labels must be 0 or 1")
        if self.attribution_target not in (0, 1):
            raise ValidationError(f"{self.unit_id!r}: attribution_target must be 0 or 1")
        if len(self.words) != len(self.attributions):
            raise ValidationError(
                f"{self.unit_id!r}: {len(self.words)} words vs {len(self.attributions)} attributions"
            )
        if any(not -1.0 <= a <= 1.0 for a in self.attributions):
            raise ValidationError(f"{self.unit_id!r}: attributions must lie in [-1, 1]")


@dataclass(frozen=True)
class TopKReport:
    descriptor: str
    k: int
    occurrences_in_topk: int
    occurrences_total: int
    by_cell: dict[tuple[int, int], tuple[int, int]]
    """(predicted, true_label) -> (in_topk, total) breakdown."""


@dataclass(frozen=True)
class ConsistencyReport:
    descriptor: str
    count_positive_toward_dismissal: int
    count_negative_toward_dismissal: int
    occurrences_total: int
    consistency: float
    flagged: bool


def load_attributions(path: str | Path) -> list[AttributionRecord]:
    """Parse an attributions JSONL file, rejecting malformed rows loudly.

    Every bad line (unparseable JSON, missing keys, length mismatch, values
    out of range) is collected and reported with its line number.
    """
    path = Path(path)
    records: list[AttributionRecord] = []
    bad_lines: list[int] = []
    messages: list[str] = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                record = AttributionRecord(
                    unit_id=row["unit_id"],
                    predicted=row["predicted"],
                    true_label=row["true_label"],
                    attribution_target=row["attribution_target"],
                    words=tuple(row["words"]),
                    attributions=tuple(float(a) for a in row["attributions"]),
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError, ValidationError) as exc:
                bad_lines.append(line_no)
                messages.append(f"line {line_no}: {exc}")
                continue
            records.append(record)
    if bad_lines:
        raise SchemaError("; ".join(messages), path=str(path), lines=bad_lines)
    return records


@dataclass(frozen=True)
class _Occurrence:
    record: AttributionRecord
    surface: str
    word_indices: tuple[int, ...]
    attribution: float
    """Summed attribution of the matched words."""


def _word_offsets(words: Sequence[str]) -> list[int]:
    offsets = []
    at = 0
    for w in words:
        offsets.append(at)
        at += len(w) + 1  # single-space join
    return offsets


def find_occurrences(
    records: Iterable[AttributionRecord],
    lexicon: Lexicon,
    options: MatchOptions | None = None,
) -> list[_Occurrence]:
    """Descriptor occurrences inside the exported word sequences.

    All lexicon languages are matched at once (the export does not carry a
    language); identical spans found under several languages collapse to one
    occurrence per surface, and overlaps resolve exactly as in text matching.
    """
    options = options or MatchOptions()
    languages = sorted({d.language for d in lexicon})
    matchers = [DescriptorMatcher(lexicon, lang, options) for lang in languages]
    occurrences: list[_Occurrence] = []
    for record in records:
        if not record.words:
            continue
        text = " ".join(record.words)
        offsets = _word_offsets(record.words)
        seen: set[tuple[int, int, str]] = set()
        merged: list[Candidate] = []
        for matcher in matchers:
            for cand in matcher.candidates(text):
                key = (cand.start, cand.end, cand.descriptor.surface)
                if key not in seen:
                    seen.add(key)
                    merged.append(cand)
        if options.overlap_policy == "longest_match_wins":
            merged = resolve_overlaps(merged)
        merged.sort(key=lambda c: (c.start, c.end, c.descriptor.surface))
        for cand in merged:
            first = bisect_right(offsets, cand.start) - 1
            last = bisect_right(offsets, cand.end - 1) - 1
            indices = tuple(range(first, last + 1))
            occurrences.append(
                _Occurrence(
                    record=record,
                    surface=cand.descriptor.surface,
                    word_indices=indices,
                    attribution=sum(record.attributions[i] for i in indices),
                )
            )
    return occurrences


def _ranks(attributions: Sequence[float]) -> list[int]:
    """rank[i] = position of word i when sorted by attribution descending.

    Equal attributions rank in word order, so ranking is deterministic.
    """
    order = sorted(range(len(attributions)), key=lambda i: (-attributions[i], i))
    ranks = [0] * len(attributions)
    for rank, i in enumerate(order):
        ranks[i] = rank
    return ranks


def topk_membership(
    records: Sequence[AttributionRecord],
    lexicon: Lexicon,
    ks: Iterable[int],
    options: MatchOptions | None = None,
) -> list[TopKReport]:
    """Per-descriptor counts of occurrences whose words reach the top k.

    An occurrence is in the top k when any of its matched words ranks
    strictly below k; multi-word descriptors therefore count once per locus.
    Reports are emitted per (descriptor, k), sorted by descriptor then k.
    """
    ks = sorted(set(ks))
    if not ks:
        raise ValidationError("ks must be non-empty")
    if any(k < 1 for k in ks):
        raise ValidationError("every k must be at least 1")
    occurrences = find_occurrences(records, lexicon, options)
    rank_cache: dict[int, list[int]] = {}
    tally: dict[tuple[str, int], dict[tuple[int, int], list[int]]] = {}
    for occ in occurrences:
        ranks = rank_cache.get(id(occ.record))
        if ranks is None:
            ranks = rank_cache[id(occ.record)] = _ranks(occ.record.attributions)
        best = min(ranks[i] for i in occ.word_indices)
        cell = (occ.record.predicted, occ.record.true_label)
        for k in ks:
            cells = tally.setdefault((occ.surface, k), {})
            in_top, total = cells.get(cell, (0, 0))
            cells[cell] = (in_top + (1 if best < k else 0), total + 1)

    reports = []
    for (surface, k), cells in sorted(tally.items()):
        in_top = sum(v[0] for v in cells.values())
        total = sum(v[1] for v in cells.values())
        reports.append(
            TopKReport(
                descriptor=surface,
                k=k,
                occurrences_in_topk=in_top,
                occurrences_total=total,
                by_cell=dict(sorted(cells.items())),
            )
        )
    return reports


def consistency_report(
    records: Sequence[AttributionRecord],
    lexicon: Lexicon,
    min_occurrences: int = 10,
    consistency_threshold: float = 0.8,
    options: MatchOptions | None = None,
) -> list[ConsistencyReport]:
    """Directional consistency of descriptor attributions toward dismissal.

    Each occurrence's attribution is re-expressed toward label 0: positive
    values computed against target 0 stay positive, values computed against
    target 1 flip sign.  Consistency is the dominant direction's share of all
    occurrences; descriptors with at least ``min_occurrences`` occurrences
    and consistency at or above the threshold are flagged.
    """
    occurrences = find_occurrences(records, lexicon, options)
    per_surface: dict[str, list[int]] = {}
    for occ in occurrences:
        toward0 = occ.attribution if occ.record.attribution_target == 0 else -occ.attribution
        slot = per_surface.setdefault(occ.surface, [0, 0, 0])  # pos, neg, total
        if toward0 > 0:
            slot[0] += 1
        elif toward0 < 0:
            slot[1] += 1
        slot[2] += 1

    reports = []
    for surface in sorted(per_surface):
        pos, neg, total = per_surface[surface]
        consistency = max(pos, neg) / total if total else 0.0
        reports.append(
            ConsistencyReport(
                descriptor=surface,
                count_positive_toward_dismissal=pos,
                count_negative_toward_dismissal=neg,
                occurrences_total=total,
                consistency=consistency,
                flagged=total >= min_occurrences and consistency >= consistency_threshold,
            )
        )
    return reports
