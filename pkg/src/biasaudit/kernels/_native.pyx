# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: binomial tail summation and phrase scanning.

Mirrors ``_pure`` exactly; see that module for the algorithm notes.
"""

from libc.math cimport exp, lgamma, log, log1p

BACKEND = "native"

cdef double _TERM_CUTOFF = 1e-18


cdef inline double _log_term(long n, long j, double logp, double logq, double lg_n1) nogil:
    return lg_n1 - lgamma(j + 1.0) - lgamma(n - j + 1.0) + j * logp + (n - j) * logq


def binom_tail(long n, long k_lo, long k_hi, double p):
    """Sum of C(n,j) * p^j * (1-p)^(n-j) for j in [k_lo, k_hi]."""
    cdef double logp, logq, lg_n1, log_top, total, comp, r, y, t, value
    cdef long mode, j_top, j

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
    lg_n1 = lgamma(n + 1.0)

    mode = <long>((n + 1) * p)
    j_top = mode
    if j_top < k_lo:
        j_top = k_lo
    if j_top > k_hi:
        j_top = k_hi
    log_top = _log_term(n, j_top, logp, logq, lg_n1)

    total = 1.0
    comp = 0.0

    j = j_top + 1
    while j <= k_hi:
        r = exp(_log_term(n, j, logp, logq, lg_n1) - log_top)
        y = r - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if r < total * _TERM_CUTOFF:
            break
        j += 1
    j = j_top - 1
    while j >= k_lo:
        r = exp(_log_term(n, j, logp, logq, lg_n1) - log_top)
        y = r - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if r < total * _TERM_CUTOFF:
            break
        j -= 1

    value = exp(log_top + log(total))
    if value > 1.0:
        return 1.0
    if value < 0.0:
        return 0.0
    return value


def scan_phrases(int[::1] text_flat, long n_words, int[::1] ph_flat,
                 int[::1] ph_off, int[::1] cand_off, int[::1] cand_list):
    """Find phrase occurrences in an interleaved word/gap id sequence."""
    cdef long i, base, t, a, length, j, flat_len
    cdef int w, ph
    cdef bint ok
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
                out.append((i, <long>ph))
    return out
