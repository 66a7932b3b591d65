"""Analytic comparison functions: Ei / li, zeta at integers, Moebius, the
Gram series R(x), the fluctuation Delta(x) and Moebius-li tails.

li is evaluated as Ei(log x): power series for |z| <= 40, the asymptotic
series beyond, and the E1 continued fraction for negative arguments.  The
principal value at t = 1 is thus handled analytically.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit, vectorize
from scipy import integrate as _spi

from .errors import DomainError, TableCoverageError

EULER_GAMMA = 0.57721566490153286061
SERIES_CUTOFF = 40.0


# ---------------------------------------------------------------------------
# Ei and li


@njit(cache=True)
def _e1_pos(x):
    # E1(x) for x > 0
    if x <= 1.0:
        s = 0.0
        term = 1.0
        n = 1
        while True:
            term *= -x / n
            d = term / n
            s += d
            if abs(d) < 1e-18 * abs(s) or n > 200:
                break
            n += 1
        return -EULER_GAMMA - math.log(x) - s
    # modified Lentz on the continued fraction
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        de = c * d
        h *= de
        if abs(de - 1.0) < 1e-17:
            break
    return h * math.exp(-x)


@njit(cache=True)
def _ei_scalar(z):
    if z == 0.0:
        return -np.inf
    if z < 0.0:
        return -_e1_pos(-z)
    if z <= SERIES_CUTOFF:
        s = 0.0
        term = 1.0
        n = 1
        while True:
            term *= z / n
            d = term / n
            s += d
            if d < 1e-18 * s and n > z:
                break
            n += 1
        return EULER_GAMMA + math.log(z) + s
    # asymptotic, stopped at the smallest term
    s = 1.0
    term = 1.0
    k = 1
    while k < z:
        nt = term * k / z
        if nt > term:
            break
        term = nt
        s += term
        if term < 1e-18:
            break
        k += 1
    return math.exp(z) / z * s


@vectorize(["float64(float64)"], cache=True)
def _ei_vec(z):
    return _ei_scalar(z)


def ei(z):
    """Exponential integral Ei(z) (principal value for z > 0)."""
    if np.ndim(z) == 0:
        return float(_ei_scalar(float(z)))
    return _ei_vec(np.asarray(z, dtype=np.float64))


def li(x):
    """Logarithmic integral li(x) = PV int_0^x dt/log t, as Ei(log x).

    Raises:
        DomainError: for x <= 0 or x == 1.
    """
    if np.ndim(x) == 0:
        x = float(x)
        if x <= 0.0 or x == 1.0:
            raise DomainError(f"li undefined at x={x}")
        return float(_ei_scalar(math.log(x)))
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0) or np.any(x == 1.0):
        raise DomainError("li undefined at x <= 0 or x == 1")
    return _ei_vec(np.log(x))


def li_from_log(L):
    """li(e^L); accepts arrays.  Overflows past L ~ 709, see ``log_li_from_log``."""
    return ei(L)


def log_li_from_log(L, terms=None):
    """log li(e^L) for large L via the asymptotic series, plus a truncation estimate.

    Returns ``(log_value, rel_err)`` where ``rel_err`` is twice the first
    omitted term relative to the partial sum.  Meant for L >= 50; at smaller
    L it falls back to the direct value with rel_err 0.
    """
    L = float(L)
    if L < 50.0:
        return math.log(li_from_log(L)), 0.0
    if terms is None:
        terms = int(min(L, 60))
    s = 1.0
    term = 1.0
    for k in range(1, terms):
        term *= k / L
        s += term
    omitted = term * terms / L
    return L - math.log(L) + math.log(s), 2.0 * omitted / s


def log_li_excess_from_log(L):
    """log of li(e^L) - e^L/L, again from the asymptotic series (L >= 50)."""
    L = float(L)
    if L < 50.0:
        return math.log(li_from_log(L) - math.exp(L) / L)
    s = 0.0
    term = 1.0
    for k in range(1, int(min(L, 60))):
        term *= k / L
        s += term
    return L - math.log(L) + math.log(s)


def li_over_x_enclosure(t=None, log_t=None):
    """Lower and upper bounds for li(t)/t.

    lower = sum_{k=1..6} (k-1)!/log^k t, valid for t >= 565; upper =
    1.003/log t, valid for t >= e^500 and returned as None below that.
    Pass ``log_t`` instead of ``t`` for arguments beyond float range.

    Raises:
        DomainError: if t < 565.
    """
    if log_t is None:
        if t is None:
            raise TypeError("need t or log_t")
        log_t = math.log(t)
    L = float(log_t)
    if L < math.log(565.0):
        raise DomainError("lower enclosure needs t >= 565")
    lower = math.fsum(math.factorial(k - 1) / L**k for k in range(1, 7))
    upper = 1.003 / L if L >= 500.0 else None
    return lower, upper


# ---------------------------------------------------------------------------
# Moebius


def mobius(n: int) -> int:
    """Moebius function by trial-division factorisation."""
    if n < 1:
        raise DomainError("mobius needs n >= 1")
    sign = 1
    for p in (2, 3):
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            sign = -sign
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            if n % p == 0:
                n //= p
                if n % p == 0:
                    return 0
                sign = -sign
        f += 6
    if n > 1:
        sign = -sign
    return sign


@lru_cache(maxsize=8)
def mobius_range(n_max: int) -> np.ndarray:
    """mu(0..n_max) as an int8 array (mu[0] = 0)."""
    mu = np.ones(n_max + 1, dtype=np.int8)
    mu[0] = 0
    flags = np.ones(n_max + 1, dtype=bool)
    for p in range(2, n_max + 1):
        if flags[p]:
            flags[p * p :: p] = False
            mu[p::p] *= -1
            mu[p * p :: p * p] = 0
    mu.setflags(write=False)
    return mu


# ---------------------------------------------------------------------------
# zeta at integers


@lru_cache(maxsize=None)
def zeta_minus_one(k: int) -> float:
    """zeta(k) - 1 for integer k >= 2, accurate in the relative sense.

    Direct sum over n < 1000 plus an Euler-Maclaurin tail.
    """
    if k < 2:
        raise DomainError("zeta_int needs k >= 2")
    N = 1000
    terms = [float(n) ** -k for n in range(2, N)]
    Nf = float(N)
    tail = [
        Nf ** (1 - k) / (k - 1),
        0.5 * Nf**-k,
        k * Nf ** (-k - 1) / 12.0,
        -k * (k + 1) * (k + 2) * Nf ** (-k - 3) / 720.0,
    ]
    return math.fsum(terms + tail)


def zeta_int(k: int) -> float:
    """Riemann zeta at an integer k >= 2."""
    return 1.0 + zeta_minus_one(k)


# ---------------------------------------------------------------------------
# Gram series R(x)


def gram_series(L, max_terms=10_000):
    """1 + sum_k L^k/(k! k zeta(k+1)).  Returns (value, n_terms, converged)."""
    terms = [1.0]
    t = 1.0
    k = 0
    biggest = 1.0
    converged = False
    while k < max_terms:
        k += 1
        t *= L / k
        term = t / (k * zeta_int(k + 1))
        terms.append(term)
        biggest = max(biggest, abs(term))
        if k > abs(L) and abs(term) < 1e-18 * biggest:
            converged = True
            break
    return math.fsum(terms), k, converged


def riemann_R(x):
    """Riemann's R(x) by the Gram series (x > 0)."""
    if x <= 0:
        raise DomainError("R needs x > 0")
    value, n, ok = gram_series(math.log(x))
    if not ok:
        warnings.warn(f"Gram series not converged after {n} terms", RuntimeWarning)
    return value


def _mobius_li_partial(L, k, N):
    """sum_{n=k..N} mu(n)/n li(e^{L/n})."""
    if N < k:
        return 0.0
    mu = mobius_range(N)
    n = np.arange(k, N + 1)
    m = mu[k : N + 1].astype(np.float64)
    nz = m != 0
    vals = m[nz] / n[nz] * _ei_vec(L / n[nz].astype(np.float64))
    return math.fsum(vals.tolist())


def _mobius_li_tail(L, N):
    """sum_{n>N} mu(n)/n li(e^{L/n}), N >= 2L, via the Ei power series.

    Uses sum mu(n)/n = 0, sum mu(n) log n / n = -1 and sum mu(n)/n^s = 1/zeta(s)
    for the low orders; higher orders are summed directly past N.
    """
    mu = mobius_range(N).astype(np.float64)
    n = np.arange(N + 1, dtype=np.float64)
    n[0] = 1.0
    head = slice(1, N + 1)
    t0 = -math.fsum((mu[head] / n[head]).tolist())
    t1 = -1.0 - math.fsum((mu[head] * np.log(n[head]) / n[head]).tolist())
    parts = [(EULER_GAMMA + math.log(L)) * t0, -t1]
    # orders j = 1..4 by subtraction from 1/zeta(j+1)
    coef = 1.0
    for j in range(1, 5):
        coef *= L / j
        partial = math.fsum((mu[head] / n[head] ** (j + 1)).tolist())
        tail_j = 1.0 / zeta_int(j + 1) - partial
        parts.append(coef / j * tail_j)
    # higher orders directly over (N, M]
    M = 64 * N
    mu2 = mobius_range(M)[N + 1 :].astype(np.float64)
    n2 = np.arange(N + 1, M + 1, dtype=np.float64)
    keep = mu2 != 0
    mu2, n2 = mu2[keep], n2[keep]
    base = mu2 / n2
    ratio = L / n2
    pw = ratio**4
    for j in range(5, 400):
        pw = pw * ratio
        # sum mu(n)/n (L/n)^j / (j * j!)
        term = math.fsum((base * pw).tolist()) / j / math.gamma(j + 1.0)
        parts.append(term)
        if abs(term) < 1e-20 and (L / (N + 1)) ** j / math.gamma(j + 1.0) < 1e-20:
            break
    return math.fsum(parts)


def _split_point(L, k):
    return max(k, int(math.ceil(2.0 * L)) + 1, 200)


def mobius_li_sum(L, k=1):
    """f_k(e^L) = sum_{n>=k} mu(n)/n li(e^{L/n}), the full infinite tail."""
    N = _split_point(L, k)
    return math.fsum([_mobius_li_partial(L, k, N), _mobius_li_tail(L, N)])


def riemann_R_mobius(x):
    """R(x) in Moebius form sum mu(n)/n li(x^{1/n}), independent of the Gram series."""
    if x <= 1:
        raise DomainError("Moebius form needs x > 1")
    return mobius_li_sum(math.log(x), 1)


def mobius_li_tail(x, k, method="exact"):
    """f_k(x) = sum_{n>=k} mu(n)/n li(x^{1/n}).

    Args:
        x: argument, x >= 2.
        k: first index, k >= 2.
        method: ``"exact"`` sums the whole infinite tail (terms past a split
            point via the Ei power series); ``"truncated"`` stops at
            n_max = floor(log2 x), skipping terms whose argument x^{1/n} is
            below 2.  The truncated form drops a non-negligible remainder of
            order 0.1 and is not monotone in x.
    """
    if x < 2:
        raise DomainError("f_k needs x >= 2")
    if k < 2:
        raise DomainError("f_k needs k >= 2")
    L = math.log(x)
    if method == "exact":
        return mobius_li_sum(L, k)
    if method == "truncated":
        n_max = int(math.floor(L / math.log(2.0)))
        return _mobius_li_partial(L, k, n_max) if n_max >= k else 0.0
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Delta(x)


def pi0(x, pi_x, x_is_prime):
    """Half-corrected count: pi(x) - 1/2 at primes, pi(x) otherwise."""
    return pi_x - 0.5 if x_is_prime else float(pi_x)


def riesel_gohl_g(x):
    """R(x) - 1/log x + arctan(pi/log x)/pi."""
    L = math.log(x)
    return riemann_R(x) - 1.0 / L + math.atan(math.pi / L) / math.pi


def delta(x, pi0_x):
    """Normalised fluctuation (pi0(x) - R(x) + 1/log x - arctan(pi/log x)/pi) log x / sqrt x."""
    if x < 2:
        raise DomainError("delta needs x >= 2")
    L = math.log(x)
    return (pi0_x - riesel_gohl_g(x)) * L / math.sqrt(x)


@dataclass(frozen=True)
class DeltaTable:
    """Rows (x_lo, x_hi, delta_min, delta_max), sorted and non-overlapping."""

    x_lo: np.ndarray
    x_hi: np.ndarray
    delta_min: np.ndarray
    delta_max: np.ndarray

    def __post_init__(self):
        if not (len(self.x_lo) == len(self.x_hi) == len(self.delta_min) == len(self.delta_max)):
            raise ValueError("column lengths differ")
        if np.any(self.x_hi < self.x_lo):
            raise ValueError("row with x_hi < x_lo")
        if np.any(self.x_lo[1:] < self.x_hi[:-1]):
            raise ValueError("rows overlap or are unsorted")
        if np.any(self.delta_max < self.delta_min):
            raise ValueError("delta_max < delta_min")

    @classmethod
    def from_rows(cls, rows):
        a = np.array(rows, dtype=np.float64).reshape(-1, 4)
        return cls(a[:, 0], a[:, 1], a[:, 2], a[:, 3])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            need = {"x_lo", "x_hi", "delta_min", "delta_max"}
            if reader.fieldnames is None or not need <= set(reader.fieldnames):
                raise ValueError("DeltaTable CSV needs header x_lo,x_hi,delta_min,delta_max")
            rows = [(float(r["x_lo"]), float(r["x_hi"]), float(r["delta_min"]), float(r["delta_max"])) for r in reader]
        return cls.from_rows(rows)

    def extremes(self, a, b):
        """(min, max) of Delta over rows meeting [a, b]; [a, b] must be covered."""
        i0 = int(np.searchsorted(self.x_hi, a, side="left"))
        i1 = int(np.searchsorted(self.x_lo, b, side="right"))
        if i0 >= i1 or self.x_lo[i0] > a:
            raise TableCoverageError(f"no Delta data covering [{a}, {b}]")
        for i in range(i0, i1 - 1):
            if self.x_lo[i + 1] > self.x_hi[i]:
                raise TableCoverageError(f"gap in Delta table between {self.x_hi[i]} and {self.x_lo[i + 1]}")
        if self.x_hi[i1 - 1] < b:
            raise TableCoverageError(f"Delta table ends at {self.x_hi[i1 - 1]} < {b}")
        return float(self.delta_min[i0:i1].min()), float(self.delta_max[i0:i1].max())


def pi_li_enclosure_via_delta(x, table: DeltaTable):
    """Bounds on pi(x) - li(x) from tabulated extremes of Delta at x.

    upper = -li(sqrt x)/2 - li(x^(1/3))/3 + sqrt(x)/log(x) * Delta_max, for x >= 2000;
    lower = sum_{n=2..5} mu(n)/n li(x^(1/n)) + sqrt(x)/log(x) * Delta_min,
    for x >= 10326 (None for smaller x).
    """
    if x < 2000:
        raise DomainError("upper enclosure needs x >= 2000")
    dmin, dmax = table.extremes(x, x)
    scale = math.sqrt(x) / math.log(x)
    upper = -li(x**0.5) / 2 - li(x ** (1.0 / 3.0)) / 3 + scale * dmax
    lower = None
    if x >= 10_326:
        s = math.fsum(mobius(n) / n * li(x ** (1.0 / n)) for n in range(2, 6))
        lower = s + scale * dmin
    return lower, upper


def theta_enclosure_via_delta(x, delta_x, table: DeltaTable, c1, c2):
    """Delta-based theta bounds for x >= 10326 with caller-supplied constants.

    The two additive constants are not given numerically in the source of
    these inequalities, so callers pass ``c1`` (lower) and ``c2`` (upper).
    The max of Delta is taken over [2000, x], the min over [10236, x].
    """
    if x < 10_326:
        raise DomainError("needs x >= 10326")
    _, dmax = table.extremes(2000, x)
    dmin, _ = table.extremes(10_236, x)
    r = math.sqrt(x)
    l2 = li(r)
    l5 = li(x**0.2)
    L = math.log(x)
    base = x + (delta_x - 1.0) * r - x ** (1.0 / 3.0)
    lower = base - dmax * l2 - l5 * L / 5 + c1
    upper = base - dmin * l2 + l5 * L / 5 - x**0.2 + c2
    return lower, upper


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-30
    max_depth: int = 200

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be non-negative")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


DEFAULT_QUAD = QuadratureSpec()


def integrate(f, a, b, spec: QuadratureSpec = DEFAULT_QUAD, points=None):
    """Adaptive Gauss-Kronrod integral of ``f`` over [a, b]; returns (value, abserr)."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", _spi.IntegrationWarning)
        try:
            return _spi.quad(f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_depth, points=points)
        except _spi.IntegrationWarning:
            pass
    # retry without escalation and report whatever accuracy was reached
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _spi.IntegrationWarning)
        val, err = _spi.quad(f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_depth, points=points)
    warnings.warn(f"quadrature on [{a}, {b}] reached only abserr={err:.3g}", RuntimeWarning)
    return val, err
