"""Mertens-type prime sums and products with explicit tail control."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import _sieve_kernels as K
from ..analytic import li_from_log
from ..bounds import EtaBound, catalog
from ..errors import DomainError, TruncationTailTooLarge
from ..sieve import HighPrecisionSum, Sieve
from .identities import B_REF, E_REF, EULER_GAMMA, PrimeTable
from .report import MertensEstimate

N0 = 1_757_126_630_797
ETA3 = 0.024334


def _dd(terms) -> HighPrecisionSum:
    if len(terms) == 0:
        return HighPrecisionSum()
    h, l = K.dd_sum_terms(np.ascontiguousarray(terms, dtype=np.float64), 0.0, 0.0)
    return HighPrecisionSum.of(h, l)


def _log1m_plus(y):
    """log(1 - y) + y without cancellation for small y."""
    y = np.asarray(y, dtype=np.float64)
    small = y < 1e-3
    ys = np.where(small, y, 0.0)
    series = -(ys**2 / 2 + ys**3 / 3 + ys**4 / 4 + ys**5 / 5 + ys**6 / 6)
    return np.where(small, series, np.log1p(-np.where(small, 0.0, y)) + y)


def _default_X(x):
    return max(10.0 * x, 1e8)


# ---------------------------------------------------------------------------
# envelopes for A1 and A3


def a1_envelope(x):
    """(lower, upper, name) for A1(x): the eta-3 form above N0, else the classical 1/(2 log^2 x)."""
    L = math.log(x)
    if x >= N0:
        f = ETA3 / (3 * L**3) * (1 + 15 / (4 * L))
        return -f, f, "eta3"
    h = 1 / (2 * L * L)
    # the upper side of the classical bound needs x >= 286
    return -h, (h if x >= 286 else math.inf), "classical"


def a3_envelope(x):
    """(lower, upper, name) for A3(x): the eta-3 form above N0, else the classical 1/(2 log x)."""
    L = math.log(x)
    if x >= N0:
        f = ETA3 / (2 * L * L) * (1 + 2 / L)
        return -f, f, "eta3"
    h = 1 / (2 * L)
    return -h, (h if x >= 319 else math.inf), "classical"


def _eta_bounds():
    return [e.bound for e in catalog() if isinstance(e.bound, EtaBound)]


def _tail_width(eta: EtaBound, x, n):
    L = math.log(x)
    return eta.eta / (x ** (n - 1) * L ** (eta.k + 1)) * (1 + n / (n - 1))


def _best_eta(x, n):
    """Catalog EtaBound valid at x with the narrowest prime-power tail enclosure."""
    ok = [b for b in _eta_bounds() if x >= max(b.x1, 1.0 + 1e-12)]
    if not ok:
        raise DomainError(f"no |theta - x| bound in the catalog is valid at x={x}")
    return min(ok, key=lambda b: _tail_width(b, x, n))


def rh_tail_width(x, n):
    """Half width of the prime-power tail enclosure that holds under RH (x >= 599)."""
    if x < 599:
        raise DomainError("the RH-form enclosure needs x >= 599")
    return 1 / (8 * math.pi * x ** (n - 0.5)) * (1 + 2 * n / (2 * n - 1)) * (math.log(x) + 2 / (2 * n - 1))


def s_main_term(x, terms=60):
    """sum_{n >= 1} li(x^-n)/(n + 1), the smooth part of S(x)."""
    L = math.log(x)
    out = 0.0
    for n in range(1, terms + 1):
        t = float(li_from_log(-n * L)) / (n + 1)
        out += t
        if abs(t) < 1e-30:
            break
    return out


def s_width(eta: EtaBound, x):
    """Half width around ``s_main_term`` for S(x) given an EtaBound valid at x."""
    L = math.log(x)
    return eta.eta / L ** (eta.k + 1) * ((x + 1) * math.log(x / (x - 1)) - 1)


# ---------------------------------------------------------------------------
# prime-power tails


@dataclass
class PrimePowerTail:
    """``sum_{p > x} p^-n`` from a finite sum to ``X_max`` plus an analytic tail.

    ``enclosure`` is the interval ``-li(x^{1-n}) +- half_width`` from the
    supplied EtaBound; ``rh_half_width`` is the same under RH.
    """

    x: float
    n: int
    X_max: float
    truncated: float
    tail_estimate: float
    tail_error: float
    value: float
    li_term: float
    half_width: float
    eta: EtaBound | None
    rh_half_width: float | None = None

    @property
    def enclosure(self):
        return (self.li_term - self.half_width, self.li_term + self.half_width)

    @property
    def contained(self):
        lo, hi = self.enclosure
        return lo - self.tail_error <= self.value <= hi + self.tail_error


def prime_power_tail(x, n, sieve=None, X_max=None, *, eta: EtaBound | None = None, tol=None, table=None) -> PrimePowerTail:
    """``sum_{p > x} p^-n`` with its enclosure around ``-li(x^{1-n})``.

    Raises:
        TruncationTailTooLarge: if the error of the analytic part beyond
            ``X_max`` exceeds ``tol``.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    if x <= 1:
        raise DomainError("x must exceed 1")
    X = float(X_max) if X_max is not None else _default_X(x)
    if X <= x:
        raise DomainError("X_max must exceed x")
    tab = table or PrimeTable.build(int(X), sieve)
    P = tab.primes
    i0, i1 = int(tab.index(x)), int(tab.index(X))
    truncated = math.fsum((P[i0:i1].astype(np.float64) ** -float(n)).tolist())
    LX = math.log(X)
    tail_est = -float(li_from_log((1 - n) * LX))
    tail_err = _tail_width(_best_eta(X, n), X, n)
    if tol is not None and tail_err > tol:
        raise TruncationTailTooLarge(f"tail beyond {X:.3g} known only to {tail_err:.3g} > {tol:.3g}")
    eta = eta or _best_eta(x, n)
    if x < max(eta.x1, 1.0 + 1e-12):
        raise DomainError(f"the supplied EtaBound holds only from x={eta.x1}")
    return PrimePowerTail(
        x=float(x), n=int(n), X_max=X, truncated=truncated, tail_estimate=tail_est, tail_error=tail_err,
        value=truncated + tail_est, li_term=-float(li_from_log((1 - n) * math.log(x))),
        half_width=_tail_width(eta, x, n), eta=eta,
        rh_half_width=rh_tail_width(x, n) if x >= 599 else None,
    )


# ---------------------------------------------------------------------------
# S(x) and the estimates


def s_value(x, table: PrimeTable, X):
    """S(x) from the primes in (x, X] plus the smooth part beyond X; returns (value, error)."""
    P = table.primes
    i0, i1 = int(table.index(x)), int(table.index(X))
    part = float(_dd(_log1m_plus(1.0 / P[i0:i1].astype(np.float64))))
    eta = _best_eta(X, 2)
    return part + s_main_term(X), s_width(eta, X)


def _a1(table: PrimeTable, x):
    i = int(table.index(x))
    recip = 1.0 / table.primes[:i].astype(np.float64)
    s = _dd(recip)
    return s, float(s - math.log(math.log(x)) - B_REF)


def mertens_estimate(x, sieve=None, *, X_max=None) -> MertensEstimate:
    """Partial sums of 1/p and log p/p up to x and the constants they estimate.

    ``B_hat`` subtracts the midpoint of the A1 envelope in force and
    ``B_err`` is its half width; ``E_hat`` likewise with A3.
    """
    x = int(x)
    if x < 2:
        raise DomainError("x must be >= 2")
    X = float(X_max) if X_max is not None else _default_X(x)
    tab = PrimeTable.build(int(X), sieve)
    P = tab.primes[: int(tab.index(x))].astype(np.float64)
    sum_recip = _dd(1.0 / P)
    sum_logp = _dd(np.log(P) / P)
    L = math.log(x)
    A1 = float(sum_recip - math.log(L) - B_REF)
    A3 = float(sum_logp - L - E_REF)
    prod = math.exp(float(_dd(np.log1p(-1.0 / P))))
    A2 = math.exp(-EULER_GAMMA) / L - prod
    lo1, hi1, name1 = a1_envelope(x)
    lo3, hi3, name3 = a3_envelope(x)
    mid1 = 0.5 * (lo1 + hi1) if math.isfinite(hi1) else 0.0
    mid3 = 0.5 * (lo3 + hi3) if math.isfinite(hi3) else 0.0
    B_hat = float(sum_recip - math.log(L)) - mid1
    E_hat = float(sum_logp - L) - mid3
    B_err = max(abs(lo1 - mid1), abs(hi1 - mid1))
    E_err = max(abs(lo3 - mid3), abs(hi3 - mid3))
    S, _ = s_value(x, tab, X)
    S_bounds = (-1.02 / ((x - 1) * L), 0.0)
    return MertensEstimate(
        x=x, sum_recip=sum_recip, sum_logp=sum_logp, A1=A1, A2=A2, A3=A3, B_hat=B_hat, E_hat=E_hat,
        B_err=B_err, E_err=E_err, S=S, S_bounds=S_bounds, envelope=f"A1:{name1} A3:{name3}",
    )


def a1_values(xs, sieve=None):
    """A1(x) = sum_{p <= x} 1/p - log log x - B at each x (vectorized)."""
    xs = np.asarray(xs, dtype=np.float64)
    if np.any(xs <= 1):
        raise DomainError("A1 needs x > 1")
    sieve = sieve or Sieve()
    P = sieve.primes(2, int(xs.max()) + 1)
    h, l = K.recip_cumulative(P, 0.0, 0.0)
    pref = np.concatenate(([0.0], h + l))
    idx = np.searchsorted(P, np.floor(xs), side="right")
    return pref[idx] - np.log(np.log(xs)) - B_REF


# ---------------------------------------------------------------------------
# products


@dataclass
class MertensProducts:
    """Products over p <= x of (1 - 1/p), (1 + 1/p) and (1 - 1/p^2).

    ``envelopes`` maps a name to ``(lower, upper, applicable)`` for the
    (1 - 1/p) product, and ``plus_envelopes`` likewise for (1 + 1/p).
    ``identity_residual`` compares ``e^gamma log x prod(1 - 1/p)`` with
    ``exp(-S - A1)``; ``split_residual`` compares the (1 + 1/p) product with
    the quotient of the other two.
    """

    x: int
    minus: float
    plus: float
    minus_sq: float
    S: float
    A1: float
    identity_residual: float
    split_residual: float
    envelopes: dict = field(default_factory=dict)
    plus_envelopes: dict = field(default_factory=dict)

    def within(self, name):
        lo, hi, ok = self.envelopes[name]
        return ok and lo < self.minus < hi


def mertens_products(x, sieve=None, *, X_max=None) -> MertensProducts:
    x = int(x)
    if x < 2:
        raise DomainError("x must be >= 2")
    X = float(X_max) if X_max is not None else _default_X(x)
    tab = PrimeTable.build(int(X), sieve)
    P = tab.primes[: int(tab.index(x))].astype(np.float64)
    r = 1.0 / P
    log_minus = float(_dd(np.log1p(-r)))
    log_plus = float(_dd(np.log1p(r)))
    log_sq = float(_dd(np.log1p(-(r * r))))
    minus, plus, minus_sq = math.exp(log_minus), math.exp(log_plus), math.exp(log_sq)
    _, A1 = _a1(tab, x)
    S, _ = s_value(x, tab, X)
    L = math.log(x)
    lhs = math.exp(EULER_GAMMA) * L * minus
    rhs = math.exp(-S - A1)
    base = math.exp(-EULER_GAMMA) / L
    c = 1.02 / ((x - 1) * L)
    env = {"classical": (base * (1 - 1 / (2 * L * L)), base * (1 + 1 / (2 * L * L)), x >= 285)}
    f = ETA3 / (3 * L**3) * (1 + 15 / (4 * L))
    env["eta3"] = (base * math.exp(-f), base * math.exp(f + c), x >= N0)
    k = 6 * math.exp(EULER_GAMMA) / math.pi**2 * L
    plus_env = {"eta3": (k * math.exp(-f - c), k * (1 + 1 / x) * math.exp(f), x >= N0)}
    return MertensProducts(
        x=x, minus=minus, plus=plus, minus_sq=minus_sq, S=S, A1=A1,
        identity_residual=abs(lhs / rhs - 1), split_residual=abs(plus / (minus_sq / minus) - 1),
        envelopes=env, plus_envelopes=plus_env,
    )
