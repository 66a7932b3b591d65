"""Double-double arithmetic kernels (numba).

A double-double value is an unevaluated pair ``hi + lo`` of binary64 numbers
with ``|lo| <= ulp(hi)/2``.  Only the handful of operations needed for prime
sums are provided: error-free transforms, add, multiply, ``exp`` and ``log``.
"""

import math
from fractions import Fraction

import numpy as np
from numba import njit

_SPLITTER = 134217729.0  # 2**27 + 1

LN2_HI = 0.6931471805599453
LN2_LO = 2.3190468138462996e-17


def _dd_from_fraction(q):
    hi = float(q)
    lo = float(q - Fraction(hi))
    return hi, lo


# 1/n! for n = 0..12 as double-double pairs
_INV_FACT = np.array(
    [_dd_from_fraction(Fraction(1, math.factorial(n))) for n in range(13)],
    dtype=np.float64,
)


@njit(inline="always")
def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(inline="always")
def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@njit(inline="always")
def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


@njit(inline="always")
def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(inline="always")
def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e += t
    s, e = quick_two_sum(s, e)
    e += f
    return quick_two_sum(s, e)


@njit(inline="always")
def dd_add_d(ah, al, b):
    s, e = two_sum(ah, b)
    e += al
    return quick_two_sum(s, e)


@njit(inline="always")
def dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e += ah * bl + al * bh
    return quick_two_sum(p, e)


@njit(inline="always")
def dd_mul_d(ah, al, b):
    p, e = two_prod(ah, b)
    e += al * b
    return quick_two_sum(p, e)


@njit(cache=True)
def dd_exp(y):
    """exp(y) as a double-double, for a binary64 argument with |y| < 700."""
    k = np.floor(y / LN2_HI + 0.5)
    kh, kl = dd_mul_d(LN2_HI, LN2_LO, k)
    rh, rl = dd_add(y, 0.0, -kh, -kl)
    # s = r / 1024, exact scaling
    sh = rh * 0.0009765625
    sl = rl * 0.0009765625
    # expm1(s) by Horner on 1/n!, n = 1..10
    ph = _INV_FACT[10, 0]
    pl = _INV_FACT[10, 1]
    for n in range(9, 0, -1):
        ph, pl = dd_mul(ph, pl, sh, sl)
        ph, pl = dd_add(ph, pl, _INV_FACT[n, 0], _INV_FACT[n, 1])
    eh, el = dd_mul(ph, pl, sh, sl)
    # (1 + e)^2 - 1 = 2e + e^2, ten times
    for _ in range(10):
        qh, ql = dd_mul(eh, el, eh, el)
        eh, el = dd_add(2.0 * eh, 2.0 * el, qh, ql)
    rh, rl = dd_add_d(eh, el, 1.0)
    scale = 2.0 ** k
    return rh * scale, rl * scale


@njit(cache=True)
def dd_log(ah, al):
    """Natural log of a positive double-double."""
    y = np.log(ah)
    eh, el = dd_exp(y)
    dh, dl = dd_add(ah, al, -eh, -el)
    return two_sum(y, (dh + dl) / eh)


@njit(cache=True)
def dd_sum(values):
    """Compensated sum of a float64 array; returns (hi, lo)."""
    sh = 0.0
    sl = 0.0
    for v in values:
        sh, sl = dd_add_d(sh, sl, v)
    return sh, sl


def to_fraction(hi, lo):
    return Fraction(hi) + Fraction(lo)
