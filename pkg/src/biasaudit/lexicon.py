"""Descriptor lexicon: loading, validation, translation, and expansion.

A lexicon is an immutable collection of descriptors (words or phrases that
reference demographic or personal attributes).  English entries are
``original``; machine-translated forms are ``translated``; manually expanded
plural/gender/synonym forms are ``derived``.  Translated and derived entries
point back to their ancestor through ``base_id``, and every chain of
``base_id`` links must terminate in an original entry.
"""

from __future__ import annotations

import hashlib
import json
import logging
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .errors import (
    DanglingReferenceError,
    DuplicateEntryError,
    LexiconFormatError,
    TranslationError,
)

log = logging.getLogger(__name__)

LANGUAGES = ("en", "de", "fr", "it")
PREFERENCES = ("dispreferred", "reviewed", "no_label")
PROVENANCES = ("original", "translated", "derived")

_TSV_HEADER = ["id", "surface", "language", "axis", "preference", "provenance", "base_id"]
_DERIVATIONS_HEADER = ["base_id", "surface", "language"]


@dataclass(frozen=True)
class Descriptor:
    """One surface form with its demographic axis and provenance."""

    id: str
    surface: str
    language: str
    axis: str
    preference: str
    provenance: str
    base_id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "surface", unicodedata.normalize("NFC", self.surface))
        if not self.surface.strip():
            raise LexiconFormatError(f"descriptor {self.id!r} has an empty surface")
        if self.language not in LANGUAGES:
            raise LexiconFormatError(f"descriptor {self.id!r}: unknown language {self.language!r}")
        if self.preference not in PREFERENCES:
            raise LexiconFormatError(f"descriptor {self.id!r}: unknown preference {self.preference!r}")
        if self.provenance not in PROVENANCES:
            raise LexiconFormatError(f"descriptor {self.id!r}: unknown provenance {self.provenance!r}")
        if self.provenance == "original":
            if self.language != "en":
                raise LexiconFormatError(f"descriptor {self.id!r}: originals must be English")
            if self.base_id:
                raise LexiconFormatError(f"descriptor {self.id!r}: originals carry no base_id")
        elif not self.base_id:
            raise LexiconFormatError(f"descriptor {self.id!r}: {self.provenance} entries need a base_id")


@dataclass(frozen=True)
class Lexicon:
    """Immutable descriptor collection with unique (surface, language) pairs."""

    descriptors: tuple[Descriptor, ...]
    version: str = "unversioned"
    _by_id: Mapping[str, Descriptor] = field(repr=False, compare=False, default=None)  # type: ignore[assignment]

    def __post_init__(self):
        by_id: dict[str, Descriptor] = {}
        seen: dict[tuple[str, str], str] = {}
        for d in self.descriptors:
            if d.id in by_id:
                raise DuplicateEntryError(f"duplicate descriptor id {d.id!r}")
            by_id[d.id] = d
            key = (d.surface, d.language)
            if key in seen:
                raise DuplicateEntryError(
                    f"duplicate (surface, language) pair {key!r} in ids {seen[key]!r} and {d.id!r}",
                    entries=[key],
                )
            seen[key] = d.id
        for d in self.descriptors:
            if d.base_id is not None and d.base_id not in by_id:
                raise DanglingReferenceError(
                    f"descriptor {d.id!r} references unknown base_id {d.base_id!r}"
                )
        # base_id chains must be acyclic and end in an original entry
        for d in self.descriptors:
            seen_ids = {d.id}
            cur = d
            while cur.base_id is not None:
                cur = by_id[cur.base_id]
                if cur.id in seen_ids:
                    raise DanglingReferenceError(f"base_id cycle through {d.id!r}")
                seen_ids.add(cur.id)
            if cur.provenance != "original":
                raise DanglingReferenceError(
                    f"descriptor {d.id!r}: base chain ends in non-original {cur.id!r}"
                )
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.descriptors)

    def __iter__(self):
        return iter(self.descriptors)

    def get(self, descriptor_id: str) -> Descriptor:
        try:
            return self._by_id[descriptor_id]
        except KeyError:
            raise DanglingReferenceError(f"unknown descriptor id {descriptor_id!r}") from None

    def surface_of(self, descriptor_id: str) -> str:
        return self.get(descriptor_id).surface

    def in_language(self, language: str) -> tuple[Descriptor, ...]:
        return tuple(d for d in self.descriptors if d.language == language)

    def originals(self, preference: str | None = None) -> tuple[Descriptor, ...]:
        return tuple(
            d
            for d in self.descriptors
            if d.provenance == "original" and (preference is None or d.preference == preference)
        )

    def root_of(self, descriptor_id: str) -> Descriptor:
        """The original English ancestor of an entry."""
        cur = self.get(descriptor_id)
        while cur.base_id is not None:
            cur = self.get(cur.base_id)
        return cur


def _parse_tsv(path: Path, expected_header: list[str]):
    """Yield (line_no, fields) for a tab-separated file, after header checks."""
    try:
        raw = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise LexiconFormatError("file not found", path=str(path)) from None
    lines = raw.splitlines()
    meta: dict[str, str] = {}
    body_start = 0
    for i, line in enumerate(lines):
        if line.startswith("#"):
            # optional "# key=value" metadata lines before the header
            stripped = line.lstrip("#").strip()
            if "=" in stripped:
                key, _, value = stripped.partition("=")
                meta[key.strip()] = value.strip()
            body_start = i + 1
        else:
            break
    if body_start >= len(lines) or not lines[body_start].strip():
        raise LexiconFormatError("missing header row", path=str(path), line=body_start + 1)
    header = lines[body_start].split("\t")
    if header != expected_header:
        raise LexiconFormatError(
            f"bad header {header!r}, expected {expected_header!r}",
            path=str(path),
            line=body_start + 1,
        )
    rows = []
    for offset, line in enumerate(lines[body_start + 1 :], start=body_start + 2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != len(expected_header):
            raise LexiconFormatError(
                f"expected {len(expected_header)} tab-separated fields, got {len(fields)}",
                path=str(path),
                line=offset,
            )
        rows.append((offset, fields))
    return meta, rows


def load_lexicon(path: str | Path) -> Lexicon:
    """Load and validate a lexicon TSV.

    Duplicate (surface, language) rows, dangling base_id references, and
    malformed rows all raise with the offending line number where one exists.
    """
    path = Path(path)
    meta, rows = _parse_tsv(path, _TSV_HEADER)
    descriptors: list[Descriptor] = []
    seen: dict[tuple[str, str], int] = {}
    for line_no, fields in rows:
        ident, surface, language, axis, preference, provenance, base_id = fields
        try:
            d = Descriptor(
                id=ident,
                surface=surface,
                language=language,
                axis=axis,
                preference=preference,
                provenance=provenance,
                base_id=base_id or None,
            )
        except LexiconFormatError as exc:
            raise LexiconFormatError(str(exc), path=str(path), line=line_no) from None
        key = (d.surface, d.language)
        if key in seen:
            raise DuplicateEntryError(
                f"{path}:{line_no}: duplicate (surface, language) {key!r}, "
                f"first seen on line {seen[key]}",
                entries=[key],
            )
        seen[key] = line_no
        descriptors.append(d)
    version = meta.get("version")
    if version is None:
        digest = hashlib.sha256(path.read_bytes()).hexdigest()[:12]
        version = f"sha256:{digest}"
    return Lexicon(descriptors=tuple(descriptors), version=version)


def save_lexicon(lexicon: Lexicon, path: str | Path) -> None:
    path = Path(path)
    lines = [f"# version={lexicon.version}", "\t".join(_TSV_HEADER)]
    for d in lexicon.descriptors:
        lines.append(
            "\t".join([d.id, d.surface, d.language, d.axis, d.preference, d.provenance, d.base_id or ""])
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TranslationCache:
    """JSONL-backed (source, target_lang) -> translation store.

    Every provider response is appended immediately, so a completed run can
    always be replayed offline.  Single writer by contract.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._entries: dict[tuple[str, str], str] = {}
        if self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line_no, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        row = json.loads(line)
                        key = (row["source"], row["target_lang"])
                        self._entries[key] = row["translation"]
                    except (json.JSONDecodeError, KeyError, TypeError):
                        raise LexiconFormatError(
                            "bad cache row", path=str(self.path), line=line_no
                        ) from None

    def get(self, source: str, target_lang: str) -> str | None:
        return self._entries.get((source, target_lang))

    def put(self, source: str, target_lang: str, translation: str) -> None:
        self._entries[(source, target_lang)] = translation
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(
                json.dumps(
                    {"source": source, "target_lang": target_lang, "translation": translation},
                    ensure_ascii=False,
                )
                + "\n"
            )

    def __len__(self) -> int:
        return len(self._entries)


class HttpTranslationProvider:
    """Minimal client for a DeepL-style translation endpoint.

    The API key comes from the ``BIASAUDIT_TRANSLATE_KEY`` environment
    variable (or is passed explicitly); the endpoint is configurable.  Only
    ``translate_lexicon`` cache misses ever reach the network.
    """

    def __init__(self, endpoint: str, api_key: str | None = None, timeout: float = 30.0):
        import os

        self.endpoint = endpoint
        self.api_key = api_key if api_key is not None else os.environ.get("BIASAUDIT_TRANSLATE_KEY")
        self.timeout = timeout
        if not self.api_key:
            raise TranslationError(
                "no API key: set BIASAUDIT_TRANSLATE_KEY or pass api_key explicitly"
            )

    def translate(self, text: str, target_lang: str) -> str:
        import requests

        try:
            response = requests.post(
                self.endpoint,
                headers={"Authorization": f"DeepL-Auth-Key {self.api_key}"},
                json={"text": [text], "target_lang": target_lang.upper()},
                timeout=self.timeout,
            )
            response.raise_for_status()
            data = response.json()
            return data["translations"][0]["text"]
        except Exception as exc:
            raise TranslationError(f"provider request failed for {text!r}: {exc}") from exc


def translate_lexicon(
    lexicon: Lexicon,
    targets: Iterable[str],
    provider: object | None = None,
    cache: str | Path | TranslationCache | None = None,
) -> Lexicon:
    """Add one translated entry per (original dispreferred descriptor, target).

    Cache hits never touch the provider; misses are answered by
    ``provider.translate`` and written through to the cache.  Re-running with
    a warm cache is a no-op (ids are deterministic and existing ids are kept),
    so the operation is idempotent.
    """
    targets = sorted(set(targets))
    for t in targets:
        if t not in LANGUAGES:
            raise TranslationError(f"unknown target language {t!r}")
    if not targets:
        return lexicon

    cache = cache if isinstance(cache, TranslationCache) else TranslationCache(cache) if cache else None
    existing_ids = {d.id for d in lexicon.descriptors}
    existing_keys = {(d.surface, d.language) for d in lexicon.descriptors}
    added: list[Descriptor] = []

    for original in lexicon.originals(preference="dispreferred"):
        for lang in targets:
            if lang == original.language:
                continue
            new_id = f"{original.id}.{lang}"
            if new_id in existing_ids:
                continue
            translation = cache.get(original.surface, lang) if cache else None
            if translation is None:
                if provider is None:
                    raise TranslationError(
                        f"cache miss for ({original.surface!r}, {lang}) and no provider configured"
                    )
                translation = provider.translate(original.surface, lang)
                if cache is not None:
                    cache.put(original.surface, lang, translation)
            translation = unicodedata.normalize("NFC", translation)
            if not translation.strip():
                raise TranslationError(
                    f"provider returned an empty translation for ({original.surface!r}, {lang})"
                )
            key = (translation, lang)
            if key in existing_keys:
                log.warning(
                    "translation collision: %r already present for %s, skipping %s",
                    translation,
                    lang,
                    new_id,
                )
                continue
            existing_keys.add(key)
            existing_ids.add(new_id)
            added.append(
                Descriptor(
                    id=new_id,
                    surface=translation,
                    language=lang,
                    axis=original.axis,
                    preference=original.preference,
                    provenance="translated",
                    base_id=original.id,
                )
            )
    if not added:
        return lexicon
    return Lexicon(descriptors=lexicon.descriptors + tuple(added), version=lexicon.version)


def add_derived_forms(
    lexicon: Lexicon, derivations: Sequence[tuple[str, str, str]]
) -> Lexicon:
    """Add manually expanded forms (plural, gender, synonyms) as ``derived`` entries.

    Each item is (base_id, surface, language).  Dangling base ids and
    duplicate (surface, language) pairs abort with an itemized report rather
    than being dropped.
    """
    if not derivations:
        return lexicon
    existing_keys = {(d.surface, d.language) for d in lexicon.descriptors}
    counters: dict[str, int] = {}
    added: list[Descriptor] = []
    duplicates: list[tuple[str, str]] = []
    for base_id, surface, language in derivations:
        base = lexicon.get(base_id)  # raises DanglingReferenceError
        surface = unicodedata.normalize("NFC", surface)
        if not surface.strip():
            raise LexiconFormatError(f"empty derived surface for base {base_id!r}")
        key = (surface, language)
        if key in existing_keys:
            duplicates.append(key)
            continue
        existing_keys.add(key)
        counters[base_id] = counters.get(base_id, 0) + 1
        added.append(
            Descriptor(
                id=f"{base_id}.{language}.d{counters[base_id]}",
                surface=surface,
                language=language,
                axis=base.axis,
                preference=base.preference,
                provenance="derived",
                base_id=base_id,
            )
        )
    if duplicates:
        listing = ", ".join(f"({s!r}, {l})" for s, l in duplicates)
        raise DuplicateEntryError(
            f"{len(duplicates)} derivation(s) duplicate existing (surface, language) pairs: {listing}",
            entries=duplicates,
        )
    return Lexicon(descriptors=lexicon.descriptors + tuple(added), version=lexicon.version)


def load_derivations(path: str | Path) -> list[tuple[str, str, str]]:
    """Read a derivations TSV (``base_id  surface  language``)."""
    _, rows = _parse_tsv(Path(path), _DERIVATIONS_HEADER)
    return [(f[0], f[1], f[2]) for _, f in rows]


def bundled_data_path(name: str) -> Path:
    """Path of a data file shipped with the package."""
    return Path(__file__).parent / "data" / name
