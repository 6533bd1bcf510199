import json
from pathlib import Path

import pytest

from biasaudit import (
    AnalysisUnit,
    Document,
    TranslationCache,
    add_derived_forms,
    bundled_data_path,
    load_derivations,
    load_lexicon,
    translate_lexicon,
)

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def base_lexicon():
    return load_lexicon(bundled_data_path("lexicon_v1_1.tsv"))


@pytest.fixture(scope="session")
def full_lexicon(base_lexicon):
    """Bundled originals + cached translations + manual derived forms."""
    cache = TranslationCache(bundled_data_path("translations_cache.jsonl"))
    translated = translate_lexicon(base_lexicon, targets=("de", "fr", "it"), cache=cache)
    return add_derived_forms(translated, load_derivations(bundled_data_path("derivations.tsv")))


@pytest.fixture(scope="session")
def hand_segmented():
    return {
        lang: json.loads((DATA_DIR / f"sentences_{lang}.json").read_text(encoding="utf-8"))
        for lang in ("de", "fr", "it")
    }


def make_unit(unit_id: str, label: int, text: str = "text", kind: str = "chunk") -> AnalysisUnit:
    doc_id, index = unit_id.rsplit("#", 1)
    words = len(text.split())
    return AnalysisUnit(
        unit_id=unit_id,
        doc_id=doc_id,
        index=int(index),
        kind=kind,
        text=text,
        label=label,
        token_count=words,
        word_count=words,
    )


def make_doc(doc_id: str, text: str, label: int = 0, language: str = "de") -> Document:
    return Document(id=doc_id, text=text, label=label, language=language)
