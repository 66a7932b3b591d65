"""Residuals of the integral identities linking pi, theta and prime sums.

Integrals of a step function against a weight with a known antiderivative
``W`` are summed exactly piece by piece, ``sum_i S_i (W(p_{i+1}) - W(p_i))``.
Differences of ``W`` at consecutive primes are formed from ``log1p(gap/p)``
so that they do not cancel.  Integrals ``int_x^oo`` are cut at ``X_max``;
the part beyond is bounded with the smallest |theta(y) - y| envelope from
the catalog that is valid on each stretch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import _sieve_kernels as K
from ..analytic import DEFAULT_QUAD, QuadratureSpec, integrate, li, li_from_log
from ..bounds import EtaBound, RhStyleBound, catalog
from ..errors import DomainError, TruncationTailTooLarge
from ..sieve import Sieve, theta_error_bound

B_REF = 0.2614972128476427837554268386
E_REF = -1.332582275733220881765828776
EULER_GAMMA = 0.57721566490153286061

IDENTITIES = ("eq1.7", "eq2.2", "eq6.1", "eq7.2", "eq6.8")


@dataclass
class IdentityResidual:
    """``lhs - rhs`` for one identity at one x.

    For identities with an integral to infinity, ``rhs`` uses the integral
    up to ``X_max`` and ``tail_bound`` bounds what was cut off, while
    ``truncated_residual`` compares both sides of the identity written
    exactly between x and ``X_max`` (so it should be rounding level).
    """

    which: str
    x: float
    lhs: float
    rhs: float
    residual: float
    relative: float
    X_max: float | None = None
    tail_bound: float = 0.0
    truncated_residual: float | None = None

    @property
    def consistent(self):
        return abs(self.residual) <= self.tail_bound + 1e-9 * max(1.0, abs(self.lhs))

    def to_dict(self):
        return dict(self.__dict__, consistent=self.consistent)


# ---------------------------------------------------------------------------
# prime tables


@dataclass
class PrimeTable:
    """Primes up to ``limit`` with theta after each one (double-double)."""

    limit: int
    primes: np.ndarray
    theta_hi: np.ndarray
    theta_lo: np.ndarray

    @classmethod
    def build(cls, limit, sieve: Sieve | None = None):
        sieve = sieve or Sieve()
        P = sieve.primes(2, int(limit) + 1)
        # theta_cumulative wants odd primes only for its chain; 2 is fine as the first anchor
        th, tl = K.theta_cumulative(P, 0.0, 0.0)
        return cls(int(limit), P, th, tl)

    def index(self, x):
        """Number of primes <= x (vectorized)."""
        return np.searchsorted(self.primes, np.floor(np.asarray(x, dtype=np.float64)), side="right")

    def theta(self, x):
        m = self.index(x)
        out = np.where(m > 0, self.theta_hi[np.maximum(m - 1, 0)] + self.theta_lo[np.maximum(m - 1, 0)], 0.0)
        return out


def _dlog(p, q):
    """log q - log p for consecutive primes, from log1p."""
    return np.log1p((q - p) / p)


def _cumsum_dd(terms):
    h, l = K.dd_cumsum_terms(np.ascontiguousarray(terms, dtype=np.float64), 0.0, 0.0)
    return h + l


def _prefix(terms):
    """prefix[i] = sum of terms[:i] (compensated)."""
    out = np.zeros(terms.size + 1)
    if terms.size:
        out[1:] = _cumsum_dd(terms)
    return out


def _theta_float(tab):
    return tab.theta_hi + tab.theta_lo


# ---------------------------------------------------------------------------
# |theta(y) - y| envelopes for the cut-off tails


def theta_error_envelope(y):
    """Smallest catalog bound for |theta(y) - y| valid at y (vectorized)."""
    y = np.asarray(y, dtype=np.float64)
    best = np.full(y.shape, np.inf)
    L = np.log(y)
    for e in catalog():
        b = e.bound
        if isinstance(b, EtaBound):
            ok = y >= max(b.x1, 1.0 + 1e-12)
            best = np.where(ok, np.minimum(best, b.eta * y / L**b.k), best)
        elif isinstance(b, RhStyleBound) and b.kind == "theta":
            ok = (y >= b.x_lo) & (y <= b.x_hi)
            best = np.where(ok, np.minimum(best, np.sqrt(y) * L**2 / (8 * math.pi)), best)
    return best


def _log_envelope_u(u):
    """log of ``theta_error_envelope(e^u)``, safe for large u."""
    best = math.inf
    for e in catalog():
        b = e.bound
        if isinstance(b, EtaBound):
            if u >= math.log(max(b.x1, 1.0 + 1e-12)):
                best = min(best, math.log(b.eta) + u - b.k * math.log(u))
        elif isinstance(b, RhStyleBound) and b.kind == "theta":
            if math.log(b.x_lo) <= u <= math.log(b.x_hi):
                best = min(best, u / 2 + 2 * math.log(u) - math.log(8 * math.pi))
    return best


def _tail_breaks():
    pts = []
    for e in catalog():
        b = e.bound
        if isinstance(b, EtaBound):
            pts.append(math.log(max(b.x1, 1.0 + 1e-12)))
        elif isinstance(b, RhStyleBound):
            pts += [math.log(b.x_lo), math.log(b.x_hi)]
    return sorted(set(pts))


def theta_tail_integral(log_weight_u, X, quad: QuadratureSpec = DEFAULT_QUAD):
    """Bound for ``int_X^oo |theta(y) - y| w(y) dy``.

    ``log_weight_u(u)`` is ``log(w(e^u) e^u)``, the weight after the change
    of variable ``y = e^u``, kept in log form so huge u cannot overflow.
    """
    a = math.log(X)
    f = lambda u: math.exp(_log_envelope_u(u) + log_weight_u(u))
    total = 0.0
    lo = a
    for b in [u for u in _tail_breaks() if u > a] + [math.inf]:
        total += integrate(f, lo, b, quad)[0]
        lo = b
    return total


# ---------------------------------------------------------------------------
# the identities


def _li_over_t_integral(xs, quad):
    """int_2^x li(t)/t dt for sorted xs, integrated in u = log t."""
    out = np.empty(len(xs))
    acc = 0.0
    prev = math.log(2.0)
    for i, x in enumerate(xs):
        u = math.log(x)
        if u > prev:
            acc += integrate(lambda v: float(li_from_log(v)), prev, u, quad)[0]
            prev = u
        out[i] = acc
    return out


def _eq17(tab, xs):
    P = tab.primes.astype(np.float64)
    th = _theta_float(tab)
    L = np.log(P)
    # theta_i (1/L_i - 1/L_{i+1})
    d = _dlog(P[:-1], P[1:])
    pre = _prefix(th[:-1] * d / (L[:-1] * L[1:]))
    out = []
    for x in xs:
        m = int(tab.index(x))
        lx = math.log(x)
        pm = P[m - 1]
        last = th[m - 1] * math.log1p((x - pm) / pm) / (math.log(pm) * lx)
        integral = pre[m - 1] + last
        rhs = th[m - 1] / lx + integral
        out.append(IdentityResidual("eq1.7", x, float(m), rhs, m - rhs, abs(m - rhs) / m))
    return out


def _eq22(tab, xs, quad):
    P = tab.primes.astype(np.float64)
    th = _theta_float(tab)
    counts = np.arange(1, P.size + 1, dtype=np.float64)
    pre = _prefix(counts[:-1] * _dlog(P[:-1], P[1:]))
    order = np.argsort(xs)
    li_int = np.empty(len(xs))
    li_int[order] = _li_over_t_integral([xs[i] for i in order], quad)
    li2 = float(li(2.0))
    out = []
    for x, I in zip(xs, li_int):
        m = int(tab.index(x))
        pm = P[m - 1]
        pi_int = pre[m - 1] + m * math.log1p((x - pm) / pm)
        lx = math.log(x)
        lix = float(li(x))
        rhs = x - 2 + li2 * math.log(2.0) + (m - lix) * lx - (pi_int - I)
        lhs = th[m - 1]
        out.append(IdentityResidual("eq2.2", x, lhs, rhs, lhs - rhs, abs(lhs - rhs) / lhs))
    return out


def _sum_between(tab, x, X, terms):
    i0, i1 = int(tab.index(x)), int(tab.index(X))
    return math.fsum(terms[i0:i1].tolist())


def _eq61(tab, x, X, quad):
    # A1(x) = (theta(x) - x)/(x log x) - int_x^oo (theta(y) - y)(1 + log y)/(y^2 log^2 y) dy
    P = tab.primes.astype(np.float64)
    th = _theta_float(tab)
    i0, i1 = int(tab.index(x)), int(tab.index(X))
    recip = 1.0 / P
    A1x = math.fsum(recip[:i0].tolist()) - math.log(math.log(x)) - B_REF
    # theta part: W(y) = -1/(y log y); sum over pieces [x, p_i0+1), ..., [p_i1, X]
    knots = np.concatenate(([x], P[i0:i1], [X]))
    vals = np.concatenate(([th[i0 - 1]], th[i0:i1]))
    a, b = knots[:-1], knots[1:]
    La, Lb = np.log(a), np.log(b)
    # 1/(a La) - 1/(b Lb) = ((b - a) Lb + a log1p((b-a)/a)) / (a b La Lb)
    dW = ((b - a) * Lb + a * np.log1p((b - a) / a)) / (a * b * La * Lb)
    theta_part = math.fsum((vals * dW).tolist())
    # y part: int (1 + log y)/(y log^2 y) dy = log log y - 1/log y
    Lx, LX = math.log(x), math.log(X)
    y_part = (math.log(LX) - 1 / LX) - (math.log(Lx) - 1 / Lx)
    thx = th[i0 - 1]
    rhs = (thx - x) / (x * Lx) - (theta_part - y_part)
    tail = theta_tail_integral(lambda u: math.log1p(u) - u - 2 * math.log(u), X, quad)
    # exact between x and X: A1(x) - A1(X) = boundary terms - int_x^X
    thX = th[i1 - 1]
    A1X = A1x + math.fsum(recip[i0:i1].tolist()) - (math.log(LX) - math.log(Lx))
    trunc = (A1x - A1X) - ((thx - x) / (x * Lx) - (thX - X) / (X * LX) - (theta_part - y_part))
    return IdentityResidual("eq6.1", x, A1x, rhs, A1x - rhs, abs(A1x - rhs) / max(abs(A1x), 1e-300), X, tail, trunc)


def _eq72(tab, x, X, quad):
    # A3(x) = (theta(x) - x)/x - int_x^oo (theta(y) - y)/y^2 dy
    P = tab.primes.astype(np.float64)
    th = _theta_float(tab)
    i0, i1 = int(tab.index(x)), int(tab.index(X))
    lp = np.log(P) / P
    A3x = math.fsum(lp[:i0].tolist()) - math.log(x) - E_REF
    knots = np.concatenate(([x], P[i0:i1], [X]))
    vals = np.concatenate(([th[i0 - 1]], th[i0:i1]))
    a, b = knots[:-1], knots[1:]
    dW = (b - a) / (a * b)
    theta_part = math.fsum((vals * dW).tolist())
    y_part = math.log(X / x)
    thx, thX = th[i0 - 1], th[i1 - 1]
    rhs = (thx - x) / x - (theta_part - y_part)
    tail = theta_tail_integral(lambda u: -u, X, quad)
    A3X = A3x + math.fsum(lp[i0:i1].tolist()) - math.log(X / x)
    trunc = (A3x - A3X) - ((thx - x) / x - (thX - X) / X - (theta_part - y_part))
    return IdentityResidual("eq7.2", x, A3x, rhs, A3x - rhs, abs(A3x - rhs) / max(abs(A3x), 1e-300), X, tail, trunc)


def _eq68(tab, x, X, n, quad):
    # sum_{p > x} p^-n = -theta(x)/(x^n log x) + int_x^oo (1 + n log y) theta(y)/(y^{n+1} log^2 y) dy
    P = tab.primes.astype(np.float64)
    th = _theta_float(tab)
    i0, i1 = int(tab.index(x)), int(tab.index(X))
    knots = np.concatenate(([x], P[i0:i1], [X]))
    vals = np.concatenate(([th[i0 - 1]], th[i0:i1]))
    a, b = knots[:-1], knots[1:]
    La, Lb = np.log(a), np.log(b)
    # a^-n/La - b^-n/Lb, written without cancellation
    r = np.log1p((b - a) / a)
    dW = (np.expm1(n * r) * Lb + r) / (b**n * La * Lb)
    integral = math.fsum((vals * dW).tolist())
    thx, thX = th[i0 - 1], th[i1 - 1]
    Lx, LX = math.log(x), math.log(X)
    lhs_trunc = math.fsum((P[i0:i1] ** -float(n)).tolist())
    rhs_trunc = -thx / (x**n * Lx) + integral
    # beyond X: sum_{p > X} p^-n ~ -li(X^{1-n}), and the rhs tail equals it by the same identity
    tail_est = -float(li_from_log((1 - n) * LX))
    lhs = lhs_trunc + tail_est
    rhs = rhs_trunc + thX / (X**n * LX) + tail_est
    tail = theta_tail_integral(lambda u: math.log1p(n * u) - n * u - 2 * math.log(u), X, quad) + \
        float(theta_error_envelope(np.array([X]))[0]) / (X**n * LX)
    trunc = lhs_trunc - (rhs_trunc + thX / (X**n * LX))
    return IdentityResidual("eq6.8", x, lhs, rhs, lhs - rhs, abs(lhs - rhs) / max(abs(lhs), 1e-300), X, tail, trunc)


def identity_residuals(which, xs, sieve=None, quad: QuadratureSpec = DEFAULT_QUAD, *, X_max=None, n=2, max_tail=None):
    """Residuals of one identity at several x, sharing a single prime table.

    Raises:
        TruncationTailTooLarge: when ``max_tail`` is given and exceeded.
    """
    if which not in IDENTITIES:
        raise DomainError(f"unknown identity {which!r}; expected one of {IDENTITIES}")
    xs = [float(v) for v in np.atleast_1d(xs)]
    if min(xs) < 2:
        raise DomainError("identities are checked for x >= 2")
    sieve = sieve or Sieve()
    if which in ("eq1.7", "eq2.2"):
        tab = PrimeTable.build(int(max(xs)), sieve)
        return _eq17(tab, xs) if which == "eq1.7" else _eq22(tab, xs, quad)
    Xs = [X_max if X_max is not None else max(10 * x, 1e8) for x in xs]
    if any(X <= x for X, x in zip(Xs, xs)):
        raise DomainError("X_max must exceed x")
    tab = PrimeTable.build(int(max(Xs)), sieve)
    out = []
    for x, X in zip(xs, Xs):
        if which == "eq6.1":
            r = _eq61(tab, x, X, quad)
        elif which == "eq7.2":
            r = _eq72(tab, x, X, quad)
        else:
            r = _eq68(tab, x, X, n, quad)
        if max_tail is not None and r.tail_bound > max_tail:
            raise TruncationTailTooLarge(f"{which} at x={x}: tail bound {r.tail_bound:.3g} > {max_tail:.3g}")
        out.append(r)
    return out


def identity_residual(which, x, sieve=None, quad: QuadratureSpec = DEFAULT_QUAD, **kw) -> IdentityResidual:
    """Residual of one identity at one x; see ``identity_residuals``."""
    return identity_residuals(which, [x], sieve, quad, **kw)[0]
