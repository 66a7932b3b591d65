"""Numba kernels for the odd-only segmented sieve.

Flags index odd numbers: ``flags[i]`` stands for ``seg_lo + 2*i``.  Multiples
of 3, 5, 7, 11 and 13 are removed by copying a precomputed wheel pattern, the
remaining base primes are crossed off with per-prime offsets that persist
from one segment to the next.
"""

import numpy as np
from numba import njit

from ._dd import dd_add, dd_add_d, dd_log, dd_mul_d, two_prod

WHEEL_PRIMES = (3, 5, 7, 11, 13)
WHEEL_PERIOD = 3 * 5 * 7 * 11 * 13  # in odd-index units

_BIG = 2.0 ** 900


def _make_pattern():
    idx = np.arange(WHEEL_PERIOD, dtype=np.int64)
    n = 2 * idx + 1
    keep = np.ones(WHEEL_PERIOD, dtype=np.uint8)
    for p in WHEEL_PRIMES:
        keep[n % p == 0] = 0
    return keep


PATTERN = _make_pattern()


@njit(cache=True)
def init_offsets(lo, hi, base):
    """First odd multiple index (relative to odd ``lo``) for each base prime.

    Returns the offsets and the number of base primes with ``p*p < hi``.
    Base primes in the wheel are skipped (offset set past any segment).
    """
    nb = 0
    while nb < base.shape[0] and base[nb] * base[nb] < hi:
        nb += 1
    offsets = np.empty(nb, dtype=np.int64)
    for j in range(nb):
        p = base[j]
        if p <= 13:
            offsets[j] = -1
            continue
        start = p * p
        if start < lo:
            r = lo % p
            start = lo if r == 0 else lo + (p - r)
            if start % 2 == 0:
                start += p
        offsets[j] = (start - lo) // 2
    return offsets, nb


@njit(cache=True)
def fill_segment(flags, seg_lo, n, base, offsets, nb, pattern):
    """Sieve ``n`` odd entries starting at odd ``seg_lo`` into ``flags``.

    ``offsets`` are relative to ``seg_lo`` on entry and to ``seg_lo + 2n``
    on exit.
    """
    period = pattern.shape[0]
    k = ((seg_lo - 1) // 2) % period
    i = 0
    while i < n:
        m = min(n - i, period - k)
        flags[i:i + m] = pattern[k:k + m]
        i += m
        k = 0
    for j in range(nb):
        off = offsets[j]
        if off < 0:
            continue
        p = base[j]
        while off < n:
            flags[off] = 0
            off += p
        offsets[j] = off - n
    # repair the wheel primes themselves and the number 1
    if seg_lo < 15:
        for q in (3, 5, 7, 11, 13):
            if q >= seg_lo and q < seg_lo + 2 * n:
                flags[(q - seg_lo) // 2] = 1
        if seg_lo == 1:
            flags[0] = 0


@njit(cache=True, nogil=True)
def count_theta(lo, hi, base, seg_odd, pattern):
    """Count odd primes in [lo, hi) and sum their logs in double-double.

    ``lo`` must be odd.  Logs are taken of running double-double products
    of up to ~2**900, so only one ``dd_log`` is needed per ~20 primes.
    """
    offsets, nb = init_offsets(lo, hi, base)
    flags = np.empty(seg_odd, dtype=np.uint8)
    count = 0
    th = 0.0
    tl = 0.0
    ph = 1.0
    pl = 0.0
    s = lo
    while s < hi:
        n = min(seg_odd, (hi - s + 1) // 2)
        fill_segment(flags, s, n, base, offsets, nb, pattern)
        for i in range(n):
            if flags[i]:
                count += 1
                ph, pl = dd_mul_d(ph, pl, float(s + 2 * i))
                if ph > _BIG:
                    lh, ll = dd_log(ph, pl)
                    th, tl = dd_add(th, tl, lh, ll)
                    ph = 1.0
                    pl = 0.0
        s += 2 * n
    if ph != 1.0 or pl != 0.0:
        lh, ll = dd_log(ph, pl)
        th, tl = dd_add(th, tl, lh, ll)
    return count, th, tl


@njit(cache=True, nogil=True)
def count_only(lo, hi, base, seg_odd, pattern):
    offsets, nb = init_offsets(lo, hi, base)
    flags = np.empty(seg_odd, dtype=np.uint8)
    count = 0
    s = lo
    while s < hi:
        n = min(seg_odd, (hi - s + 1) // 2)
        fill_segment(flags, s, n, base, offsets, nb, pattern)
        for i in range(n):
            count += flags[i]
        s += 2 * n
    return count


@njit(cache=True, nogil=True)
def list_primes(lo, hi, base, seg_odd, pattern, capacity):
    """All odd primes in [lo, hi) (``lo`` odd) as an int64 array."""
    offsets, nb = init_offsets(lo, hi, base)
    flags = np.empty(seg_odd, dtype=np.uint8)
    out = np.empty(capacity, dtype=np.int64)
    c = 0
    s = lo
    while s < hi:
        n = min(seg_odd, (hi - s + 1) // 2)
        fill_segment(flags, s, n, base, offsets, nb, pattern)
        for i in range(n):
            if flags[i]:
                out[c] = s + 2 * i
                c += 1
        s += 2 * n
    return out[:c]


@njit(cache=True)
def theta_cumulative_direct(primes, start_hi, start_lo):
    """Running theta after each prime with one full dd log per prime."""
    m = primes.shape[0]
    out_hi = np.empty(m, dtype=np.float64)
    out_lo = np.empty(m, dtype=np.float64)
    th = start_hi
    tl = start_lo
    for i in range(m):
        lh, ll = dd_log(float(primes[i]), 0.0)
        th, tl = dd_add(th, tl, lh, ll)
        out_hi[i] = th
        out_lo[i] = tl
    return out_hi, out_lo


_ANCHOR_EVERY = 4096
_CHAIN_MAX_T = 2.0 ** -12


@njit(cache=True, nogil=True)
def theta_cumulative(primes, start_hi, start_lo):
    """Running theta after each prime, as (hi, lo) arrays.

    log p_i is carried forward as log p_{i-1} + log1p(gap/p_{i-1}), with the
    first three series terms in double-double; a full ``dd_log`` is taken
    every ``_ANCHOR_EVERY`` primes and whenever gap/p is not small.
    """
    m = primes.shape[0]
    out_hi = np.empty(m, dtype=np.float64)
    out_lo = np.empty(m, dtype=np.float64)
    th = start_hi
    tl = start_lo
    lh = 0.0
    ll = 0.0
    prev = 0.0
    since = _ANCHOR_EVERY
    for i in range(m):
        p = float(primes[i])
        if since >= _ANCHOR_EVERY or (p - prev) > _CHAIN_MAX_T * prev:
            lh, ll = dd_log(p, 0.0)
            since = 0
        else:
            g = p - prev
            t = g / prev
            qh, ql = two_prod(t, prev)
            tlo = ((g - qh) - ql) / prev
            # -t^2/2 in double-double, higher terms in binary64
            sh, sl = two_prod(t, t)
            sl += 2.0 * t * tlo
            rest = t * t * t * (1.0 / 3.0 - t * (0.25 - t * 0.2))
            ch, cl = dd_add(t, tlo, -0.5 * sh, -0.5 * sl)
            ch, cl = dd_add_d(ch, cl, rest)
            lh, ll = dd_add(lh, ll, ch, cl)
            since += 1
        prev = p
        th, tl = dd_add(th, tl, lh, ll)
        out_hi[i] = th
        out_lo[i] = tl
    return out_hi, out_lo


@njit(cache=True, nogil=True)
def recip_cumulative(primes, start_hi, start_lo):
    """Running sum of 1/p after each prime (double-double reciprocals)."""
    m = primes.shape[0]
    out_hi = np.empty(m, dtype=np.float64)
    out_lo = np.empty(m, dtype=np.float64)
    sh = start_hi
    sl = start_lo
    for i in range(m):
        p = float(primes[i])
        r = 1.0 / p
        qh, ql = two_prod(r, p)
        e = ((1.0 - qh) - ql) / p
        sh, sl = dd_add(sh, sl, r, e)
        out_hi[i] = sh
        out_lo[i] = sl
    return out_hi, out_lo


@njit(cache=True)
def dd_sum_terms(terms, start_hi, start_lo):
    sh = start_hi
    sl = start_lo
    for t in terms:
        sh, sl = dd_add_d(sh, sl, t)
    return sh, sl


@njit(cache=True)
def dd_cumsum_terms(terms, start_hi, start_lo):
    m = terms.shape[0]
    out_hi = np.empty(m, dtype=np.float64)
    out_lo = np.empty(m, dtype=np.float64)
    sh = start_hi
    sl = start_lo
    for i in range(m):
        sh, sl = dd_add_d(sh, sl, terms[i])
        out_hi[i] = sh
        out_lo[i] = sl
    return out_hi, out_lo
