"""Independent reference implementations used only by the tests."""

import math

import mpmath
import numpy as np


def eratosthenes(n):
    """Primes <= n from a plain bytearray sieve (no shared code with the package)."""
    if n < 2:
        return np.empty(0, dtype=np.int64)
    flags = bytearray([1]) * (n + 1)
    flags[0] = flags[1] = 0
    for i in range(2, math.isqrt(n) + 1):
        if flags[i]:
            flags[i * i :: i] = bytes(len(range(i * i, n + 1, i)))
    return np.frombuffer(bytes(flags), dtype=np.uint8).nonzero()[0].astype(np.int64)


def is_prime(n):
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = math.isqrt(n)
    f = 3
    while f <= r:
        if n % f == 0:
            return False
        f += 2
    return True


def brute_pi(n):
    return sum(1 for m in range(2, int(n) + 1) if is_prime(m))


def mp_li(x, dps=30):
    with mpmath.workdps(dps):
        return mpmath.li(mpmath.mpf(x))


def pv_li_quadrature(x, eps=1e-4, dps=30):
    """li(x) for x > 1 by quadrature with a symmetric excision around t = 1.

    Near t = 1 the integrand is 1/s + 1/2 - s/12 + s^2/24 + ... with s = t - 1;
    odd powers cancel over the symmetric window, which leaves eps + eps^3/36.
    """
    with mpmath.workdps(dps):
        f = lambda t: 1 / mpmath.log(t)
        left = mpmath.quad(f, [0, 1 - eps])
        right = mpmath.quad(f, [1 + eps, 2, x] if x > 2 else [1 + eps, x])
        return left + right + eps + eps**3 / 36


def theta_naive(primes):
    with mpmath.workdps(40):
        return mpmath.fsum(mpmath.log(int(p)) for p in primes)


def mobius_naive(n):
    r, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            r = -r
        p += 1
    return -r if m > 1 else r
