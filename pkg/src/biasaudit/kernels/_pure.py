"""Pure-Python kernels.

Reference implementations of the two hot loops (binomial tail summation and
phrase scanning).  The compiled module in ``_native.pyx`` mirrors these
signatures exactly; correctness tests run against both backends.
"""

from __future__ import annotations

from math import exp, lgamma, log, log1p

BACKEND = "pure"

# Terms smaller than this fraction of the running sum cannot move the result
# at the guaranteed 1e-9 relative accuracy, even over 10**6 additions.
_TERM_CUTOFF = 1e-18


def binom_tail(n: int, k_lo: int, k_hi: int, p: float) -> float:
    """Sum of C(n,j) * p^j * (1-p)^(n-j) for j in [k_lo, k_hi].

    Terms are evaluated in log space via lgamma and accumulated outward from
    the largest term with compensated (Kahan) summation, so the result keeps
    ~1e-9 relative accuracy up to n = 10**6.  The binomial pmf is unimodal in
    j, which both makes the largest-term-first order well defined and lets the
    walk stop early once terms fall below the cutoff.
    """
    if k_lo < 0:
        k_lo = 0
    if k_hi > n:
        k_hi = n
    if k_lo > k_hi:
        return 0.0
    if k_lo == 0 and k_hi == n:
        return 1.0

    logp = log(p)
    logq = log1p(-p)
    lg_n1 = lgamma(n + 1)

    def log_term(j: int) -> float:
        return lg_n1 - lgamma(j + 1) - lgamma(n - j + 1) + j * logp + (n - j) * logq

    mode = int((n + 1) * p)
    j_top = min(max(mode, k_lo), k_hi)
    log_top = log_term(j_top)

    total = 1.0  # the j_top term, as a ratio to itself
    comp = 0.0

    def add(value: float) -> None:
        nonlocal total, comp
        y = value - comp
        t = total + y
        comp = (t - total) - y
        total = t

    j = j_top + 1
    while j <= k_hi:
        r = exp(log_term(j) - log_top)
        add(r)
        if r < total * _TERM_CUTOFF:
            break
        j += 1
    j = j_top - 1
    while j >= k_lo:
        r = exp(log_term(j) - log_top)
        add(r)
        if r < total * _TERM_CUTOFF:
            break
        j -= 1

    value = exp(log_top + log(total))
    if value > 1.0:
        return 1.0
    if value < 0.0:
        return 0.0
    return value


def scan_phrases(text_flat, n_words: int, ph_flat, ph_off, cand_off, cand_list):
    """Find phrase occurrences in an interleaved word/gap id sequence.

    ``text_flat`` holds ``2*n_words - 1`` ids: word ids at even positions and
    gap ids at odd positions.  Phrases are encoded the same way in ``ph_flat``
    with CSR offsets ``ph_off``.  ``cand_off``/``cand_list`` map a first-word
    id to the phrases starting with it.  Returns (word_index, phrase_index)
    pairs in scan order.
    """
    out = []
    if n_words <= 0:
        return out
    flat_len = 2 * n_words - 1
    for i in range(n_words):
        w = text_flat[2 * i]
        base = 2 * i
        for t in range(cand_off[w], cand_off[w + 1]):
            ph = cand_list[t]
            a = ph_off[ph]
            length = ph_off[ph + 1] - a
            if base + length > flat_len:
                continue
            ok = True
            for j in range(1, length):
                if text_flat[base + j] != ph_flat[a + j]:
                    ok = False
                    break
            if ok:
                out.append((i, ph))
    return out
