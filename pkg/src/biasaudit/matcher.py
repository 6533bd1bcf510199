"""Whole-word descriptor matching.

Descriptor surfaces and candidate texts are segmented into word tokens with
the same rule, so multi-word phrases ("en danger", "non protetti") and
punctuated surfaces ("deaf-mute") match as contiguous token sequences whose
separators agree with the surface: whitespace separators match any whitespace
run, any other separator must match verbatim.  A surface never matches inside
a larger word, so German compounds ("Opferhilfe") do not inflate counts.

Matching is case-sensitive by default: capitalized German nouns ("Opfer")
and lowercase adjectives ("berechtigt") are distinct tokens, and no diacritic
folding is applied ("menacé" != "menace").  Both behaviours are options, not
hard-coded policy.
"""

from __future__ import annotations

import re
import unicodedata
from array import array
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import ValidationError
from .kernels import scan_phrases
from .lexicon import LANGUAGES, Descriptor, Lexicon

OVERLAP_POLICIES = ("longest_match_wins", "report_all")

_WS_RUN = re.compile(r"\s+")


@dataclass(frozen=True)
class MatchOptions:
    case_sensitive: bool = True
    unicode_word_boundaries: bool = True
    overlap_policy: str = "longest_match_wins"

    def __post_init__(self):
        if self.overlap_policy not in OVERLAP_POLICIES:
            raise ValidationError(f"unknown overlap_policy {self.overlap_policy!r}")


@dataclass(frozen=True)
class DescriptorMatch:
    """One descriptor occurrence inside a unit text."""

    descriptor_id: str
    unit_id: str
    char_span: tuple[int, int]
    word_index: int


class Candidate(NamedTuple):
    start_word: int
    n_words: int
    start: int
    end: int
    descriptor: Descriptor


def word_pattern(options: MatchOptions) -> re.Pattern[str]:
    flags = 0 if options.unicode_word_boundaries else re.ASCII
    return re.compile(r"\w+", flags)


def word_tokens(text: str, options: MatchOptions) -> list[str]:
    """The word tokens of ``text`` under the active segmentation rule."""
    return word_pattern(options).findall(text)


def _norm_gap(gap: str) -> str:
    return _WS_RUN.sub(" ", gap)


def _fold(word: str, options: MatchOptions) -> str:
    return word if options.case_sensitive else word.casefold()


def resolve_overlaps(candidates: list[Candidate]) -> list[Candidate]:
    """Keep only the longest of overlapping candidates (ties: earliest start).

    Equal-length, equal-start ties are broken by surface then id so results
    are deterministic.  Non-overlapping candidates are never discarded.
    """
    ordered = sorted(
        candidates,
        key=lambda c: (-c.n_words, -(c.end - c.start), c.start_word, c.descriptor.surface, c.descriptor.id),
    )
    kept: list[Candidate] = []
    claimed: list[tuple[int, int]] = []
    for cand in ordered:
        lo, hi = cand.start_word, cand.start_word + cand.n_words
        if any(lo < c_hi and c_lo < hi for c_lo, c_hi in claimed):
            continue
        claimed.append((lo, hi))
        kept.append(cand)
    return kept


class DescriptorMatcher:
    """Reusable matcher for one (lexicon, language, options) triple.

    Building interns every surface into integer word/separator ids once; each
    ``candidates`` call then reduces to an integer scan (the compiled kernel
    when available).  Instances are immutable after construction and safe to
    share across worker threads.
    """

    def __init__(self, lexicon: Lexicon, language: str, options: MatchOptions | None = None):
        if language not in LANGUAGES:
            raise ValidationError(f"unknown language code {language!r}")
        self.language = language
        self.options = options or MatchOptions()
        self._word_re = word_pattern(self.options)

        word_vocab: dict[str, int] = {}
        gap_vocab: dict[str, int] = {}
        flat: list[int] = []
        offsets: list[int] = [0]
        phrase_meta: list[tuple[Descriptor, int]] = []
        first_words: list[int] = []

        for d in lexicon.in_language(language):
            toks = [(m.group(), m.start(), m.end()) for m in self._word_re.finditer(d.surface)]
            if not toks:
                continue  # surface has no word tokens; it can never occur as words
            ids: list[int] = []
            for j, (word, start, end) in enumerate(toks):
                key = _fold(word, self.options)
                ids.append(word_vocab.setdefault(key, len(word_vocab)))
                if j + 1 < len(toks):
                    gap = _norm_gap(d.surface[end : toks[j + 1][1]])
                    ids.append(gap_vocab.setdefault(gap, len(gap_vocab)))
            first_words.append(ids[0])
            flat.extend(ids)
            offsets.append(len(flat))
            phrase_meta.append((d, len(toks)))

        self._word_vocab = word_vocab
        self._gap_vocab = gap_vocab
        self._unknown_word = len(word_vocab)
        self._unknown_gap = len(gap_vocab)
        self._phrase_meta = phrase_meta
        self._ph_flat = array("i", flat)
        self._ph_off = array("i", offsets)

        buckets: list[list[int]] = [[] for _ in range(self._unknown_word + 1)]
        for idx, first in enumerate(first_words):
            buckets[first].append(idx)
        cand_off = array("i", [0])
        cand_list = array("i")
        for bucket in buckets:
            cand_list.extend(bucket)
            cand_off.append(len(cand_list))
        self._cand_off = cand_off
        self._cand_list = cand_list

    def candidates(self, text: str) -> list[Candidate]:
        """All whole-word occurrences, before any overlap resolution."""
        if not unicodedata.is_normalized("NFC", text):
            text = unicodedata.normalize("NFC", text)
        toks = [(m.group(), m.start(), m.end()) for m in self._word_re.finditer(text)]
        if not toks or not self._phrase_meta:
            return []
        flat = array("i")
        append = flat.append
        for j, (word, start, end) in enumerate(toks):
            append(self._word_vocab.get(_fold(word, self.options), self._unknown_word))
            if j + 1 < len(toks):
                gap = _norm_gap(text[end : toks[j + 1][1]])
                append(self._gap_vocab.get(gap, self._unknown_gap))
        hits = scan_phrases(flat, len(toks), self._ph_flat, self._ph_off, self._cand_off, self._cand_list)
        out = []
        for word_idx, phrase_idx in hits:
            descriptor, n_words = self._phrase_meta[phrase_idx]
            start = toks[word_idx][1]
            end = toks[word_idx + n_words - 1][2]
            out.append(Candidate(word_idx, n_words, start, end, descriptor))
        return out

    def match(self, text: str, unit_id: str = "") -> list[DescriptorMatch]:
        cands = self.candidates(text)
        if self.options.overlap_policy == "longest_match_wins":
            cands = resolve_overlaps(cands)
        cands.sort(key=lambda c: (c.start, c.end, c.descriptor.surface, c.descriptor.id))
        return [
            DescriptorMatch(
                descriptor_id=c.descriptor.id,
                unit_id=unit_id,
                char_span=(c.start, c.end),
                word_index=c.start_word,
            )
            for c in cands
        ]


def match_descriptors(
    text: str,
    lexicon: Lexicon,
    language: str,
    options: MatchOptions | None = None,
    unit_id: str = "",
) -> list[DescriptorMatch]:
    """One-shot matching; build a :class:`DescriptorMatcher` for corpus runs."""
    return DescriptorMatcher(lexicon, language, options).match(text, unit_id=unit_id)


def match_units(
    units: Iterable,
    lexicon: Lexicon,
    language_of: dict[str, str],
    options: MatchOptions | None = None,
) -> list[DescriptorMatch]:
    """Match every unit, reusing one matcher per language.

    ``language_of`` maps doc_id to its corpus language; units whose document
    is missing from the map raise, since silently skipping them would bias
    every downstream count.
    """
    options = options or MatchOptions()
    matchers: dict[str, DescriptorMatcher] = {}
    out: list[DescriptorMatch] = []
    for unit in units:
        language = language_of.get(unit.doc_id)
        if language is None:
            raise ValidationError(f"no language known for document {unit.doc_id!r}")
        matcher = matchers.get(language)
        if matcher is None:
            matcher = matchers[language] = DescriptorMatcher(lexicon, language, options)
        out.extend(matcher.match(unit.text, unit_id=unit.unit_id))
    return out
