"""Whole-word descriptor matching: examples and structural properties."""

import unicodedata

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biasaudit import DescriptorMatcher, MatchOptions, match_descriptors
from biasaudit.errors import ValidationError
from biasaudit.lexicon import Descriptor, Lexicon
from biasaudit.matcher import word_tokens


def lexicon_of(*surfaces: str, language: str = "fr") -> Lexicon:
    entries = [
        Descriptor(f"en-{i}", s, "en", "characteristics", "dispreferred", "original")
        for i, s in enumerate(surfaces)
    ]
    translated = [
        Descriptor(f"{d.id}.{language}", d.surface, language, d.axis, d.preference, "translated", d.id)
        for d in entries
    ]
    return Lexicon(tuple(entries) + tuple(translated))


def surfaces_of(matches, lexicon):
    return [lexicon.surface_of(m.descriptor_id) for m in matches]


class TestExamples:
    def test_two_plain_words(self):
        lexicon = lexicon_of("victime", "menacée", "en danger")
        matches = match_descriptors("La victime a été menacée", lexicon, "fr")
        assert surfaces_of(matches, lexicon) == ["victime", "menacée"]
        assert [m.word_index for m in matches] == [1, 4]

    def test_compound_does_not_match(self):
        lexicon = lexicon_of("Opfer", language="de")
        assert match_descriptors("Opferhilfe", lexicon, "de") == []

    def test_multi_word_phrase(self):
        lexicon = lexicon_of("en danger", "victime")
        matches = match_descriptors("mise en danger de la victime", lexicon, "fr")
        assert surfaces_of(matches, lexicon) == ["en danger", "victime"]

    def test_unknown_language(self):
        with pytest.raises(ValidationError):
            match_descriptors("text", lexicon_of("x"), "xx")


class TestBoundaryAndCase:
    def test_case_sensitive_by_default(self):
        lexicon = lexicon_of("Opfer", language="de")
        assert match_descriptors("das opfer", lexicon, "de") == []
        assert len(match_descriptors("das Opfer", lexicon, "de")) == 1

    def test_case_insensitive_option(self):
        lexicon = lexicon_of("Opfer", language="de")
        options = MatchOptions(case_sensitive=False)
        assert len(match_descriptors("das opfer", lexicon, "de", options)) == 1

    def test_no_diacritic_folding(self):
        lexicon = lexicon_of("menacé")
        assert match_descriptors("la menace", lexicon, "fr") == []

    def test_punctuation_boundary_matches(self):
        lexicon = lexicon_of("victime")
        matches = match_descriptors("(victime), victime.", lexicon, "fr")
        assert len(matches) == 2

    def test_hyphenated_surface(self):
        lexicon = lexicon_of("sourd-muet")
        assert len(match_descriptors("Il est sourd-muet depuis 2001.", lexicon, "fr")) == 1
        # a broken separator is not the listed surface
        assert match_descriptors("sourd muet", lexicon, "fr") == []

    def test_phrase_gap_must_be_whitespace(self):
        lexicon = lexicon_of("en danger")
        assert match_descriptors("en, danger", lexicon, "fr") == []
        assert len(match_descriptors("en  danger", lexicon, "fr")) == 1
        assert len(match_descriptors("en\ndanger", lexicon, "fr")) == 1

    def test_nfc_normalization_applied(self):
        lexicon = lexicon_of("menacée")
        decomposed = "menacée"
        assert len(match_descriptors(decomposed, lexicon, "fr")) == 1


class TestOverlapPolicy:
    def test_longest_match_wins(self):
        lexicon = lexicon_of("en danger", "danger")
        matches = match_descriptors("mise en danger", lexicon, "fr")
        assert surfaces_of(matches, lexicon) == ["en danger"]

    def test_report_all_keeps_overlaps(self):
        lexicon = lexicon_of("en danger", "danger")
        options = MatchOptions(overlap_policy="report_all")
        matches = match_descriptors("mise en danger", lexicon, "fr", options)
        assert sorted(surfaces_of(matches, lexicon)) == ["danger", "en danger"]

    def test_non_overlapping_survive(self):
        lexicon = lexicon_of("en danger", "danger")
        matches = match_descriptors("le danger, mise en danger", lexicon, "fr")
        assert surfaces_of(matches, lexicon) == ["danger", "en danger"]

    def test_sorted_by_span_start(self):
        lexicon = lexicon_of("victime", "menacée")
        matches = match_descriptors("menacée puis victime puis menacée", lexicon, "fr")
        starts = [m.char_span[0] for m in matches]
        assert starts == sorted(starts)


WORD_POOL = ["victime", "menacé", "menacée", "danger", "tribunal", "recours", "Opfer", "la", "en"]


@st.composite
def random_text(draw):
    words = draw(st.lists(st.sampled_from(WORD_POOL), min_size=0, max_size=30))
    seps = draw(
        st.lists(st.sampled_from([" ", "  ", ", ", ". ", "\n", " - "]), min_size=len(words), max_size=len(words))
    )
    return "".join(w + s for w, s in zip(words, seps))


@pytest.fixture(scope="module")
def property_lexicon():
    return lexicon_of("victime", "menacée", "en danger", "danger")


class TestProperties:
    @given(random_text())
    @settings(max_examples=200, deadline=None)
    def test_deterministic(self, text):
        lexicon = lexicon_of("victime", "menacée", "en danger", "danger")
        first = match_descriptors(text, lexicon, "fr")
        second = match_descriptors(text, lexicon, "fr")
        assert first == second

    @given(random_text(), st.booleans())
    @settings(max_examples=200, deadline=None)
    def test_span_soundness(self, text, case_sensitive):
        lexicon = lexicon_of("victime", "menacée", "en danger", "danger")
        options = MatchOptions(case_sensitive=case_sensitive)
        nfc = unicodedata.normalize("NFC", text)
        for match in match_descriptors(text, lexicon, "fr", options):
            extracted = nfc[match.char_span[0] : match.char_span[1]]
            surface = lexicon.surface_of(match.descriptor_id)
            got = word_tokens(extracted, options)
            want = word_tokens(surface, options)
            if not case_sensitive:
                got = [w.casefold() for w in got]
                want = [w.casefold() for w in want]
            assert got == want

    @given(random_text())
    @settings(max_examples=150, deadline=None)
    def test_monotone_under_report_all(self, text):
        options = MatchOptions(overlap_policy="report_all")
        small = lexicon_of("victime", "en danger")
        large = lexicon_of("victime", "en danger", "danger", "menacée")
        seen_small = {
            (m.char_span, small.surface_of(m.descriptor_id))
            for m in match_descriptors(text, small, "fr", options)
        }
        seen_large = {
            (m.char_span, large.surface_of(m.descriptor_id))
            for m in match_descriptors(text, large, "fr", options)
        }
        assert seen_small <= seen_large


class TestMatcherReuse:
    def test_matcher_is_reusable_and_pure(self, full_lexicon):
        matcher = DescriptorMatcher(full_lexicon, "de")
        text = "Das Opfer ist berechtigt und wurde bedroht."
        first = matcher.match(text, unit_id="u#0")
        second = matcher.match(text, unit_id="u#0")
        assert first == second
        assert {full_lexicon.surface_of(m.descriptor_id) for m in first} == {
            "Opfer", "berechtigt", "bedroht",
        }

    def test_unit_id_carried(self, full_lexicon):
        matcher = DescriptorMatcher(full_lexicon, "fr")
        (match,) = matcher.match("la victime", unit_id="doc9#3")
        assert match.unit_id == "doc9#3"
