"""Binomial significance test: golden values, exact-rational oracle, properties."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biasaudit import (
    BinomialTestResult,
    binomial_lower_tail,
    binomial_upper_tail,
    label_frequencies,
    run_bst,
)
from biasaudit.bst import TestConfig as BstConfig
from biasaudit.bst import format_p_value, format_probability
from biasaudit.errors import DanglingReferenceError, ValidationError
from biasaudit.matcher import DescriptorMatch

from conftest import make_unit


def exact_upper_tail(n: int, k: int, p: float) -> Fraction:
    """Brute-force tail sum in exact rational arithmetic (independent oracle)."""
    fp = Fraction(p)
    q = 1 - fp
    return sum(math.comb(n, j) * fp**j * q ** (n - j) for j in range(k, n + 1))


class TestUpperTail:
    def test_published_dismissal_value(self):
        # the dismissal base rate behind the published tables is 0.7623
        assert binomial_upper_tail(3928, 3132, 0.7623) == pytest.approx(8.363595e-08, rel=1e-3)

    def test_published_approval_values(self):
        assert binomial_upper_tail(144, 63, 0.2377) == pytest.approx(1.094425e-07, rel=1e-3)
        assert binomial_upper_tail(695, 214, 0.2377) == pytest.approx(1.422505e-05, rel=1e-3)

    def test_rounded_null_differs(self):
        # at the coarser 0.762 the same tail is ~6.6e-8; the published value
        # 8.363595e-8 is only reachable with the 4-decimal base rate
        value = binomial_upper_tail(3928, 3132, 0.762)
        assert value == pytest.approx(6.607914e-08, rel=1e-6)
        assert abs(value - 8.363595e-08) / 8.363595e-08 > 0.1

    def test_whole_support_is_one(self):
        assert binomial_upper_tail(17, 0, 0.3) == 1.0

    def test_single_term(self):
        assert binomial_upper_tail(10, 10, 0.5) == pytest.approx(0.5**10, rel=1e-12)

    @pytest.mark.parametrize("n,k,p", [(0, 0, 0.5), (10, -1, 0.5), (10, 11, 0.5), (10, 5, 0.0), (10, 5, 1.0)])
    def test_domain_violations(self, n, k, p):
        with pytest.raises(ValidationError):
            binomial_upper_tail(n, k, p)

    def test_scipy_agreement_large_n(self):
        stats = pytest.importorskip("scipy.stats")
        for n, k, p in [(10**6, 500_800, 0.5), (250_000, 59_000, 0.2377), (3928, 3132, 0.7623)]:
            assert binomial_upper_tail(n, k, p) == pytest.approx(
                float(stats.binom.sf(k - 1, n, p)), rel=1e-9
            )


class TestOracleEquivalence:
    @pytest.mark.parametrize("p", [0.1, 0.2377, 0.5, 0.762])
    def test_all_small_n(self, p):
        for n in range(1, 31):
            for k in range(n + 1):
                got = binomial_upper_tail(n, k, p)
                want = exact_upper_tail(n, k, p)
                assert abs(Fraction(got) - want) <= Fraction(1, 10**12) * want, (n, k, p)


@st.composite
def tail_case(draw):
    n = draw(st.integers(min_value=2, max_value=2000))
    k = draw(st.integers(min_value=1, max_value=n))
    p = draw(st.sampled_from([0.1, 0.2377, 0.5, 0.762]) | st.floats(0.01, 0.99))
    return n, k, p


class TestTailProperties:
    @given(tail_case())
    @settings(max_examples=300, deadline=None)
    def test_monotone_in_k(self, case):
        n, k, p = case
        hi = binomial_upper_tail(n, k - 1, p)
        lo = binomial_upper_tail(n, k, p)
        assert hi >= lo
        # the decrease equals the pmf term at k-1; it is observable in floats
        # whenever that term clears the implementation's relative accuracy
        from biasaudit import kernels

        pmf = kernels.binom_tail(n, k - 1, k - 1, p)
        if lo > 1e-300 and pmf > hi * 1e-9:
            assert hi > lo

    @given(tail_case())
    @settings(max_examples=300, deadline=None)
    def test_complement_identity(self, case):
        n, k, p = case
        assert binomial_upper_tail(n, k, p) + binomial_lower_tail(n, k - 1, p) == pytest.approx(
            1.0, abs=1e-9
        )

    @given(tail_case())
    @settings(max_examples=200, deadline=None)
    def test_bounds(self, case):
        n, k, p = case
        assert 0.0 <= binomial_upper_tail(n, k, p) <= 1.0


class TestLabelFrequencies:
    def test_published_base_rate(self):
        units = [make_unit(f"d{i}#0", 0) for i in range(45_516)]
        units += [make_unit(f"a{i}#0", 1) for i in range(59_709 - 45_516)]
        pi0, pi1 = label_frequencies(units)
        assert pi0 == pytest.approx(0.7623, abs=5e-5)
        assert pi1 == pytest.approx(0.2377, abs=5e-5)

    def test_degenerate_and_even(self):
        assert label_frequencies([make_unit("a#0", 0)]) == (1.0, 0.0)
        assert label_frequencies([make_unit("a#0", 0), make_unit("b#0", 1)]) == (0.5, 0.5)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            label_frequencies([])


def _planted(full_lexicon, surface, language, n, k0, start=0):
    """n matches of one descriptor, k0 of them in label-0 units."""
    descriptor = next(
        d for d in full_lexicon if d.surface == surface and d.language == language
    )
    units, matches = {}, []
    for i in range(n):
        uid = f"{surface}-{start + i}#0"
        units[uid] = make_unit(uid, 0 if i < k0 else 1)
        matches.append(DescriptorMatch(descriptor.id, uid, (0, 1), 0))
    return units, matches


class TestRunBst:
    def test_published_dismissal_row(self, full_lexicon):
        units, matches = _planted(full_lexicon, "victime", "fr", 3928, 3132)
        config = BstConfig(pi0_dismissal=0.7623, pi0_approval=0.2377)
        (result,) = run_bst(matches, units, config, full_lexicon)
        assert result.token == "victime"
        assert (result.total_count, result.count0, result.count1) == (3928, 3132, 796)
        assert format_probability(result.prob0) == "0.797352"
        assert result.p_value0 == pytest.approx(8.363595e-08, rel=1e-3)
        assert result.biased_toward == "dismissal"

    def test_published_approval_row(self, full_lexicon):
        units, matches = _planted(full_lexicon, "en danger", "fr", 695, 481)
        config = BstConfig(pi0_dismissal=0.7623, pi0_approval=0.2377)
        (result,) = run_bst(matches, units, config, full_lexicon)
        assert result.p_value1 == pytest.approx(1.422505e-05, rel=1e-3)
        assert result.biased_toward == "approval"

    def test_min_count_excludes(self, full_lexicon):
        units, matches = _planted(full_lexicon, "Opfer", "de", 4, 4)
        config = BstConfig(pi0_dismissal=0.5, min_count=5)
        assert run_bst(matches, units, config, full_lexicon) == []

    def test_count_conservation_and_order(self, full_lexicon):
        units_a, matches_a = _planted(full_lexicon, "Opfer", "de", 30, 20)
        units_b, matches_b = _planted(full_lexicon, "bedroht", "de", 50, 25, start=100)
        units = {**units_a, **units_b}
        results = run_bst(matches_a + matches_b, units, BstConfig(pi0_dismissal=0.5), full_lexicon)
        assert [r.token for r in results] == ["bedroht", "Opfer"]  # by count desc
        assert sum(r.total_count for r in results) == len(matches_a) + len(matches_b)

    def test_label_swap_symmetry(self, full_lexicon):
        units, matches = _planted(full_lexicon, "Opfer", "de", 40, 28)
        config = BstConfig(pi0_dismissal=0.762, pi0_approval=0.2377)
        (result,) = run_bst(matches, units, config, full_lexicon)
        flipped_units = {
            uid: make_unit(uid, 1 - u.label) for uid, u in units.items()
        }
        swapped = BstConfig(pi0_dismissal=0.2377, pi0_approval=0.762)
        (mirror,) = run_bst(matches, flipped_units, swapped, full_lexicon)
        assert (mirror.p_value0, mirror.p_value1) == (result.p_value1, result.p_value0)
        assert (mirror.count0, mirror.count1) == (result.count1, result.count0)

    def test_unit_dedupe_mode(self, full_lexicon):
        descriptor = next(d for d in full_lexicon if d.surface == "Opfer")
        units = {f"u{i}#0": make_unit(f"u{i}#0", 0) for i in range(6)}
        matches = [
            DescriptorMatch(descriptor.id, uid, (0, 1), 0) for uid in units for _ in range(3)
        ]
        occurrences = run_bst(matches, units, BstConfig(pi0_dismissal=0.5, min_count=1), full_lexicon)
        deduped = run_bst(
            matches, units, BstConfig(pi0_dismissal=0.5, min_count=1, count_mode="units"), full_lexicon
        )
        assert occurrences[0].total_count == 18
        assert deduped[0].total_count == 6

    def test_pi0_computed_from_population(self, full_lexicon):
        units, matches = _planted(full_lexicon, "Opfer", "de", 10, 8)
        extra = {f"x{i}#0": make_unit(f"x{i}#0", i % 2) for i in range(90)}
        population = {**units, **extra}
        results = run_bst(matches, population, BstConfig(), full_lexicon)
        # population is 53 zeros / 47 ones; tail must use that base rate
        zeros = sum(1 for u in population.values() if u.label == 0)
        expected = binomial_upper_tail(10, 8, zeros / len(population))
        assert results[0].p_value0 == expected

    def test_dangling_unit_rejected(self, full_lexicon):
        descriptor = next(d for d in full_lexicon if d.surface == "Opfer")
        match = DescriptorMatch(descriptor.id, "ghost#0", (0, 1), 0)
        with pytest.raises(DanglingReferenceError):
            run_bst([match], {}, BstConfig(pi0_dismissal=0.5), full_lexicon)


class TestResultInvariants:
    def test_counts_must_sum(self):
        with pytest.raises(ValidationError):
            BinomialTestResult(
                token="x", total_count=5, count0=2, count1=2,
                prob0=0.4, prob1=0.6, p_value0=0.5, p_value1=0.5,
            )

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            BstConfig(pi0_dismissal=1.5)
        with pytest.raises(ValidationError):
            BstConfig(alpha=0.0)
        with pytest.raises(ValidationError):
            BstConfig(min_count=0)
        with pytest.raises(ValidationError):
            BstConfig(count_mode="bogus")


class TestReportFormatting:
    @pytest.mark.parametrize(
        "value,expected",
        [
            (8.363595e-08, "8.363595e-08"),
            (1.356222e-02, "1.356222e-02"),
            (0.989308, "0.989308"),
            (1.0, "1.000000"),
            (6.981606e-02, "6.981606e-02"),
        ],
    )
    def test_p_value_rendering(self, value, expected):
        assert format_p_value(value) == expected

    def test_probability_rendering(self):
        assert format_probability(3132 / 3928) == "0.797352"
        assert format_probability(796 / 3928) == "0.202648"
