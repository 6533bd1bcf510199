"""Document model, sentence splitting, token counting, and chunking.

Token counting is pluggable because the toolkit must run without the
downstream model's tokenizer: ``whitespace_words`` counts words,
``words_times_factor`` scales the word count by a configurable ratio
(default 512/300, the budget-to-word-limit ratio), and ``external_counts``
looks counts up from a precomputed per-unit file.  The run manifest records
which mode produced any given set of units.
"""

from __future__ import annotations

import math
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ExternalCountMissError, ValidationError

CORPUS_LANGUAGES = ("de", "fr", "it")
SPLITS = ("train", "validation", "test")
UNIT_KINDS = ("summary", "chunk", "whole")

#: Documents counted above this many tokens are split into chunks; shorter
#: ones pass through whole.  Sits just under the 512-token budget so whole
#: documents survive the downstream special tokens.
SPLIT_THRESHOLD = 510

DEFAULT_FACTOR = 512 / 300


@dataclass(frozen=True)
class Document:
    """A labeled court-fact text."""

    id: str
    text: str
    label: int
    language: str
    split: str = "train"

    def __post_init__(self):
        object.__setattr__(self, "text", unicodedata.normalize("NFC", self.text))
        if not self.text.strip():
            raise ValidationError(f"document {self.id!r} has empty text")
        if self.label not in (0, 1):
            raise ValidationError(f"document {self.id!r}: label must be 0 or 1, got {self.label!r}")
        if self.language not in CORPUS_LANGUAGES:
            raise ValidationError(f"document {self.id!r}: unknown language {self.language!r}")
        if self.split not in SPLITS:
            raise ValidationError(f"document {self.id!r}: unknown split {self.split!r}")


@dataclass(frozen=True)
class AnalysisUnit:
    """The budget-respecting text actually analyzed: summary, chunk, or whole fact."""

    unit_id: str
    doc_id: str
    index: int
    kind: str
    text: str
    label: int
    token_count: int
    word_count: int

    def __post_init__(self):
        if self.kind not in UNIT_KINDS:
            raise ValidationError(f"unit {self.unit_id!r}: unknown kind {self.kind!r}")
        if self.label not in (0, 1):
            raise ValidationError(f"unit {self.unit_id!r}: label must be 0 or 1")
        if self.unit_id != f"{self.doc_id}#{self.index}":
            raise ValidationError(f"unit id {self.unit_id!r} must be doc_id#index")


def unit_id_of(doc_id: str, index: int) -> str:
    return f"{doc_id}#{index}"


def doc_id_of(unit_id: str) -> str:
    return unit_id.rsplit("#", 1)[0]


@dataclass(frozen=True)
class TokenCounterConfig:
    mode: str = "whitespace_words"
    factor: float = DEFAULT_FACTOR
    budget: int = 512
    chunk_word_limit: int = 300
    external_counts: Mapping[str, int] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.mode not in ("whitespace_words", "words_times_factor", "external_counts"):
            raise ValidationError(f"unknown token counter mode {self.mode!r}")
        if self.factor <= 0:
            raise ValidationError("factor must be positive")
        if self.budget <= 0:
            raise ValidationError("budget must be positive")
        if self.chunk_word_limit <= 0:
            raise ValidationError("chunk_word_limit must be positive")
        if self.mode == "external_counts" and self.external_counts is None:
            raise ValidationError("external_counts mode needs a counts table")


def count_tokens(text: str, config: TokenCounterConfig, key: str | None = None) -> int:
    """Token count of ``text`` under the configured counter.

    ``key`` (a unit or document id) is only consulted in ``external_counts``
    mode, where a missing entry is an error rather than a silent zero.
    """
    words = len(text.split())
    if config.mode == "whitespace_words":
        return words
    if config.mode == "words_times_factor":
        return math.ceil(words * config.factor) if words else 0
    assert config.external_counts is not None
    if key is None or key not in config.external_counts:
        raise ExternalCountMissError(f"no external token count for key {key!r}")
    return config.external_counts[key]


# ---------------------------------------------------------------------------
# Sentence splitting
# ---------------------------------------------------------------------------

# Dotted abbreviations that never terminate a sentence, even before an
# uppercase word or a digit.  Multi-dot forms ("z.B.") are matched on their
# final dot; earlier dots never split because no whitespace follows them.
ABBREVIATIONS: dict[str, frozenset[str]] = {
    "de": frozenset(
        {
            "Abs.", "Art.", "Ziff.", "Bst.", "lit.", "Nr.", "S.", "E.", "Rz.",
            "vgl.", "z.B.", "bzw.", "ca.", "u.a.", "d.h.", "inkl.", "evtl.",
            "Dr.", "Prof.", "Erw.", "Urk.", "act.", "Fr.", "resp.", "i.V.m.",
            "sog.", "gem.", "betr.", "insb.",
        }
    ),
    "fr": frozenset(
        {
            "art.", "Art.", "al.", "ch.", "let.", "cf.", "p.ex.", "n.", "no.",
            "p.", "pp.", "M.", "MM.", "Mme.", "consid.", "éd.", "vol.", "ss.",
            "resp.", "env.",
        }
    ),
    "it": frozenset(
        {
            "art.", "Art.", "cpv.", "n.", "pag.", "cfr.", "lett.", "consid.",
            "p.es.", "es.", "sig.", "Sig.", "dott.", "Dott.", "ecc.", "vol.",
            "segg.", "risp.", "ca.",
        }
    ),
    "en": frozenset({"e.g.", "i.e.", "etc.", "Mr.", "Mrs.", "Dr.", "No.", "p.", "vs."}),
}

_TERMINATORS = frozenset(".!?")
_OPENERS = "([{\"'«„‚‹"


def _token_before(text: str, dot_index: int) -> frozenset[str]:
    """Candidate abbreviation tokens ending at ``dot_index``.

    Besides the whitespace-delimited token, the part after an elision
    apostrophe is offered too, so "l'art." matches the listed "art.".
    """
    start = dot_index
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    token = text[start : dot_index + 1].lstrip(_OPENERS)
    variants = {token}
    for apostrophe in ("'", "’"):
        if apostrophe in token:
            variants.add(token.rsplit(apostrophe, 1)[1])
    return frozenset(variants)


def _is_ordinal(token: str) -> bool:
    # "3." in "am 3. Januar" or "Art. 5 Ziff. 1." enumerations: one or two
    # digits before the dot are read as ordinals, longer runs (years, BGE page
    # numbers) as genuine sentence ends.
    return token.endswith(".") and token[:-1].isdigit() and 1 <= len(token) - 1 <= 2


def split_sentences(text: str, language: str) -> list[str]:
    """Rule-based sentence segmentation.

    A sentence ends at ``.``, ``!`` or ``?`` followed by whitespace and an
    uppercase letter or digit, unless the terminator closes a known
    abbreviation for the language or a short ordinal number ("am 3. Januar").
    Concatenating the result reconstructs the input modulo inter-sentence
    whitespace.
    """
    if language not in ABBREVIATIONS:
        raise ValidationError(f"unknown language code {language!r}")
    abbreviations = ABBREVIATIONS[language]
    sentences: list[str] = []
    n = len(text)
    start = 0
    i = 0
    while i < n:
        ch = text[i]
        if ch in _TERMINATORS:
            # only the last terminator of a run ("?!", "...") can split
            if i + 1 < n and text[i + 1] in _TERMINATORS:
                i += 1
                continue
            j = i + 1
            while j < n and text[j].isspace():
                j += 1
            follows_ws = j > i + 1
            next_starts = j < n and (text[j].isupper() or text[j].isdigit())
            if follows_ws and next_starts:
                is_protected = False
                if ch == ".":
                    tokens = _token_before(text, i)
                    is_protected = bool(tokens & abbreviations) or any(
                        _is_ordinal(t) for t in tokens
                    )
                if not is_protected:
                    sentence = text[start : i + 1].strip()
                    if sentence:
                        sentences.append(sentence)
                    start = j
                    i = j
                    continue
        i += 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


# ---------------------------------------------------------------------------
# Chunking
# ---------------------------------------------------------------------------

def chunk_document(
    doc: Document,
    config: TokenCounterConfig,
    split_threshold: int = SPLIT_THRESHOLD,
) -> list[AnalysisUnit]:
    """Split an over-budget document into fixed-word-count chunks.

    Documents counted at or under ``split_threshold`` tokens pass through as
    a single ``whole`` unit.  Longer ones are packed greedily into
    consecutive, non-overlapping chunks of exactly ``chunk_word_limit`` words
    (the final chunk may be shorter); no word is ever split and document
    order is preserved, so joining the chunks with single spaces reproduces
    the whitespace-normalized document.
    """
    total = count_tokens(doc.text, config, key=doc.id)
    words = doc.text.split()
    if total <= split_threshold:
        uid = unit_id_of(doc.id, 0)
        return [
            AnalysisUnit(
                unit_id=uid,
                doc_id=doc.id,
                index=0,
                kind="whole",
                text=doc.text,
                label=doc.label,
                token_count=total,
                word_count=len(words),
            )
        ]
    limit = config.chunk_word_limit
    units = []
    for index, at in enumerate(range(0, len(words), limit)):
        chunk_words = words[at : at + limit]
        chunk_text = " ".join(chunk_words)
        uid = unit_id_of(doc.id, index)
        units.append(
            AnalysisUnit(
                unit_id=uid,
                doc_id=doc.id,
                index=index,
                kind="chunk",
                text=chunk_text,
                label=doc.label,
                token_count=count_tokens(chunk_text, config, key=uid),
                word_count=len(chunk_words),
            )
        )
    return units


def overflowing(units: Iterable[AnalysisUnit], budget: int) -> list[str]:
    """Unit ids whose token count exceeds the budget (recorded, not re-split)."""
    return [u.unit_id for u in units if u.token_count > budget]


def load_external_counts(path: str | Path) -> dict[str, int]:
    """Read a JSONL token-count table keyed by unit_id or doc_id."""
    import json

    table: dict[str, int] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                key = row.get("unit_id") or row.get("doc_id")
                count = row["token_count"]
            except (json.JSONDecodeError, KeyError, TypeError):
                raise ValidationError(f"{path}:{line_no}: bad token-count row") from None
            if not isinstance(key, str) or not isinstance(count, int) or count < 0:
                raise ValidationError(f"{path}:{line_no}: bad token-count row")
            table[key] = count
    return table


_SENTENCE_WS = re.compile(r"\s+")


def normalized_words(text: str) -> str:
    """Whitespace-normalized text, for lossless-chunking comparisons."""
    return _SENTENCE_WS.sub(" ", text).strip()
