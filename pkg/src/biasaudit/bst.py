"""Exact one-sided binomial significance testing of descriptor-label counts.

For every descriptor surface with enough occurrences, two upper-tail tests
are run: the dismissal count against the dismissal base rate and the
approval count against the approval base rate.  A p-value below alpha marks
the descriptor as biased toward that label.  Base rates default to the label
frequencies of the supplied unit population and can be overridden to an
externally estimated pair.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from . import kernels
from .errors import DanglingReferenceError, ValidationError
from .lexicon import Lexicon
from .matcher import DescriptorMatch
from .preprocess import AnalysisUnit

log = logging.getLogger(__name__)

COUNT_MODES = ("occurrences", "units")


@dataclass(frozen=True)
class TestConfig:
    """Null-hypothesis probabilities, significance level, and counting policy.

    ``pi0_dismissal``/``pi0_approval`` left as None are filled from the unit
    population at test time. ``count_mode="units"`` deduplicates multiple
    occurrences of a descriptor within one unit (sensitivity analysis);
    the default counts every occurrence.
    """

    pi0_dismissal: float | None = None
    pi0_approval: float | None = None
    alpha: float = 0.1
    min_count: int = 5
    count_mode: str = "occurrences"

    def __post_init__(self):
        for name in ("pi0_dismissal", "pi0_approval"):
            value = getattr(self, name)
            if value is not None and not 0.0 < value < 1.0:
                raise ValidationError(f"{name} must lie strictly between 0 and 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError("alpha must lie strictly between 0 and 1")
        if self.min_count < 1:
            raise ValidationError("min_count must be at least 1")
        if self.count_mode not in COUNT_MODES:
            raise ValidationError(f"unknown count_mode {self.count_mode!r}")


@dataclass(frozen=True)
class BinomialTestResult:
    token: str
    total_count: int
    count0: int
    count1: int
    prob0: float
    prob1: float
    p_value0: float
    p_value1: float
    biased_toward: str | None = None

    def __post_init__(self):
        if self.count0 + self.count1 != self.total_count:
            raise ValidationError(f"{self.token!r}: counts must sum to total")


def label_frequencies(units: Sequence[AnalysisUnit]) -> tuple[float, float]:
    """(dismissal share, approval share) of a unit population."""
    if not units:
        raise ValidationError("label_frequencies needs a non-empty unit population")
    zeros = sum(1 for u in units if u.label == 0)
    n = len(units)
    return zeros / n, (n - zeros) / n


def _check_tail_args(n: int, k: int, p: float) -> None:
    if n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    if not 0 <= k <= n:
        raise ValidationError(f"k must lie in [0, n], got k={k!r}, n={n!r}")
    if not 0.0 < p < 1.0:
        raise ValidationError(f"p must lie strictly between 0 and 1, got {p!r}")


def binomial_upper_tail(n: int, k: int, p: float) -> float:
    """P(X >= k) for X ~ Binomial(n, p), computed exactly in log space."""
    _check_tail_args(n, k, p)
    return kernels.binom_tail(n, k, n, p)


def binomial_lower_tail(n: int, k: int, p: float) -> float:
    """P(X <= k) for X ~ Binomial(n, p)."""
    _check_tail_args(n, k, p)
    return kernels.binom_tail(n, 0, k, p)


def run_bst(
    matches: Iterable[DescriptorMatch],
    units: Mapping[str, AnalysisUnit],
    config: TestConfig,
    lexicon: Lexicon,
) -> list[BinomialTestResult]:
    """Per-descriptor two-sided battery of one-sided upper-tail tests.

    Counts are keyed by descriptor surface (the token the reports show), each
    occurrence inheriting its unit's label.  Descriptors below ``min_count``
    are skipped.  Results are ordered by total count descending, then surface.
    """
    pi0 = config.pi0_dismissal
    pi1 = config.pi0_approval
    if pi0 is None and pi1 is None:
        pi0, pi1 = label_frequencies(list(units.values()))
    elif pi0 is None:
        pi0 = 1.0 - pi1
    elif pi1 is None:
        pi1 = 1.0 - pi0
    if not 0.0 < pi0 < 1.0 or not 0.0 < pi1 < 1.0:
        raise ValidationError("degenerate label distribution: both labels must occur")

    counts: dict[str, list[int]] = {}
    seen_units: set[tuple[str, str]] = set()
    for match in matches:
        unit = units.get(match.unit_id)
        if unit is None:
            raise DanglingReferenceError(f"match references unknown unit {match.unit_id!r}")
        surface = lexicon.surface_of(match.descriptor_id)
        if config.count_mode == "units":
            key = (surface, match.unit_id)
            if key in seen_units:
                continue
            seen_units.add(key)
        slot = counts.setdefault(surface, [0, 0])
        slot[unit.label] += 1

    results: list[BinomialTestResult] = []
    for surface, (k0, k1) in counts.items():
        n = k0 + k1
        if n < config.min_count:
            continue
        p_value0 = binomial_upper_tail(n, k0, pi0)
        p_value1 = binomial_upper_tail(n, k1, pi1)
        biased: str | None = None
        if p_value0 < config.alpha and p_value1 < config.alpha:
            biased = "dismissal" if p_value0 <= p_value1 else "approval"
            log.warning(
                "descriptor %r significant for both labels (p0=%.3g, p1=%.3g); keeping %s",
                surface, p_value0, p_value1, biased,
            )
        elif p_value0 < config.alpha:
            biased = "dismissal"
        elif p_value1 < config.alpha:
            biased = "approval"
        results.append(
            BinomialTestResult(
                token=surface,
                total_count=n,
                count0=k0,
                count1=k1,
                prob0=k0 / n,
                prob1=k1 / n,
                p_value0=p_value0,
                p_value1=p_value1,
                biased_toward=biased,
            )
        )
    results.sort(key=lambda r: (-r.total_count, r.token))
    return results


def format_probability(value: float) -> str:
    return f"{value:.6f}"


def format_p_value(value: float) -> str:
    """Scientific notation below 0.1, plain 6-decimal form otherwise.

    Matches the layout of the published result tables bit for bit.
    """
    return f"{value:.6e}" if value < 0.1 else f"{value:.6f}"
