"""Prime-jump sweeps and crossing search.

Between consecutive primes the step functions pi, theta and "next prime
after x" are constant, so an inequality between one of them and a continuous
envelope ``f`` only has to be checked once per inter-prime piece, against the
extreme value of ``f`` on the closed piece.  For envelopes ``x R(log x)`` the
extremes sit at the piece ends or at the (finitely many, exactly located)
turning points and poles of ``f``, so no monotonicity assumption is needed.

A piece passes when its margin exceeds ten times the evaluation error
(envelope rounding plus theta accumulation error), fails when the margin is
below minus that amount, and is inconclusive in between.
"""

from __future__ import annotations

import decimal
import math
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .. import _sieve_kernels as K
from ..bounds import EtaBound, GapBound, RationalLogBound, RhStyleBound, SeriesLogBound
from ..errors import DomainError, NoCrossingInRange, NonMonotoneBound
from ..sieve import HighPrecisionSum, Sieve, theta_error_bound
from .report import CrossingResult, VerificationReport, Witness

BLOCK_SPAN = 1 << 24  # integers per block; must be even
MARGIN_FACTOR = 10.0
EPS = 2.0**-52

_SENSES = ("upper", "lower", "gap")


@dataclass
class Check:
    """One inequality against a step function: ``S < f`` (upper), ``S > f``
    (lower) or ``S <= f`` (gap, with S the next prime)."""

    envelope: object
    sense: str
    label: str = ""

    def __post_init__(self):
        if self.sense not in _SENSES:
            raise ValueError(f"sense must be one of {_SENSES}")


@dataclass
class _Pieces:
    left: np.ndarray
    right: np.ndarray
    s: np.ndarray
    s_err: float


# ---------------------------------------------------------------------------
# piece generation


def _cuts(x_lo, x_hi, span):
    first = (int(math.floor(x_lo)) // span + 1) * span
    inner = list(range(first, int(math.ceil(x_hi)), span))
    inner = [c for c in inner if x_lo < c < x_hi]
    return [x_lo] + inner + [x_hi]


def _next_prime_after(sieve, n):
    w = 4096
    while True:
        p = sieve.primes(n + 1, n + 1 + w)
        if p.size:
            return int(p[0])
        w *= 2


def _fetch(sieve, quantity, a, b):
    """Primes in (a, b] with local theta partial sums and the next prime after b."""
    P = sieve.primes(int(math.floor(a)) + 1, int(math.floor(b)) + 1)
    cum = None
    if quantity == "theta" and P.size:
        cum = K.theta_cumulative(P, 0.0, 0.0)
    nxt = _next_prime_after(sieve, int(math.floor(b))) if quantity == "nextprime" else None
    return P, cum, nxt


def _ordered_map(fn, items, workers):
    if workers <= 1:
        for it in items:
            yield fn(*it)
        return
    with ThreadPoolExecutor(max_workers=workers) as ex:
        pending = deque()
        for it in items:
            pending.append(ex.submit(fn, *it))
            if len(pending) >= 2 * workers:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()


def _shift(hi, lo, c: HighPrecisionSum):
    # (hi + lo) + c rounded to binary64, elementwise
    s = hi + c.hi
    bb = s - hi
    e = (hi - (s - bb)) + (c.hi - bb)
    return s + (e + lo + c.lo)


def _pieces(sieve, quantity, x_lo, x_hi, span=BLOCK_SPAN, descending=False):
    """Yield the inter-prime pieces of [x_lo, x_hi] block by block.

    Each piece ``[left, right)`` carries the constant value ``s`` of the step
    function on it.  Blocks come in ascending order unless ``descending``;
    pieces inside a block are always ascending.
    """
    cuts = _cuts(x_lo, x_hi, span)
    spans = list(zip(cuts[:-1], cuts[1:]))
    if descending:
        spans = spans[::-1]
        pi_c, th_c = sieve.state_at(int(math.floor(x_hi))) if quantity != "nextprime" else (0, None)
    else:
        pi_c, th_c = sieve.state_at(int(math.floor(x_lo))) if quantity != "nextprime" else (0, None)
    items = [(sieve, quantity, a, b) for a, b in spans]
    for (a, b), (P, cum, nxt) in zip(spans, _ordered_map(_fetch, items, max(1, sieve.workers))):
        n = P.size
        if descending:
            pi_a = pi_c - n
            th_a = th_c - HighPrecisionSum.of(cum[0][-1], cum[1][-1]) if (quantity == "theta" and n) else th_c
        else:
            pi_a, th_a = pi_c, th_c
        Pf = P.astype(np.float64)
        left = np.concatenate(([float(a)], Pf))
        right = np.concatenate((Pf, [float(b)]))
        if quantity == "pi":
            s = (pi_a + np.arange(n + 1)).astype(np.float64)
            err = 0.0
            pi_b, th_b = pi_a + n, None
        elif quantity == "theta":
            tp = _shift(cum[0], cum[1], th_a) if n else np.empty(0)
            s = np.concatenate(([float(th_a)], tp))
            pi_b = pi_a + n
            th_b = th_a + HighPrecisionSum.of(cum[0][-1], cum[1][-1]) if n else th_a
            err = theta_error_bound(max(b, 2.0), pi_b) + 2 * EPS * abs(float(s[-1]))
        else:
            s = np.concatenate((Pf, [float(nxt)]))
            err = 0.0
            pi_b, th_b = 0, None
        if descending:
            pi_c, th_c = pi_a, th_a
        else:
            pi_c, th_c = pi_b, th_b
        yield _Pieces(left, right, s, err)


# ---------------------------------------------------------------------------
# evaluation


def _special_points(env, x_lo, x_hi):
    crit = np.asarray(env.critical_points(x_lo, x_hi), dtype=np.float64)
    poles = np.asarray(env.poles(x_lo, x_hi), dtype=np.float64)
    return crit, poles


def _evaluate(check, pcs: _Pieces, crit, poles):
    """Per-piece margin, extremal point, extreme envelope value and tolerance."""
    env, sense = check.envelope, check.sense
    left, right = pcs.left, pcs.right
    fl = env.value(left)
    fr = env.value(right)
    if sense == "lower":
        take = fl >= fr
    else:
        take = fl <= fr
    ext = np.where(take, fl, fr)
    at = np.where(take, left, right)
    lo0, hi0 = left[0], right[-1]
    extra = 0
    for c in crit[(crit >= lo0) & (crit <= hi0)]:
        j = min(max(int(np.searchsorted(left, c, side="right")) - 1, 0), left.size - 1)
        fc = float(env.value(np.array([c]))[0])
        extra += 1
        if (sense == "lower" and fc > ext[j]) or (sense != "lower" and fc < ext[j]):
            ext[j] = fc
            at[j] = c
    finite = np.ones(left.size, dtype=bool)
    for p in poles[(poles >= lo0) & (poles <= hi0)]:
        j = min(max(int(np.searchsorted(left, p, side="right")) - 1, 0), left.size - 1)
        ext[j] = math.inf if sense == "lower" else -math.inf
        at[j] = p
        finite[j] = False
        extra += 1
    margin = (pcs.s - ext) if sense == "lower" else (ext - pcs.s)
    safe_at = np.where(finite, at, left)
    tol = MARGIN_FACTOR * (np.where(finite, env.abs_err(safe_at), 0.0) + pcs.s_err)
    return margin, at, ext, tol, 2 * left.size + extra


def _clean_range(x_lo, x_hi):
    x_lo, x_hi = float(x_lo), float(x_hi)
    if not x_hi > x_lo:
        raise DomainError("need x_hi > x_lo")
    if x_lo < 1:
        raise DomainError("ranges start at x >= 1")
    if x_lo == 1.0:
        # log 1 = 0; start just inside (1, x_hi]
        x_lo = math.nextafter(1.0, 2.0)
    return x_lo, x_hi


def _sweep(checks, quantity, x_lo, x_hi, sieve, ineq_id, granularity):
    t0 = time.perf_counter()
    x_lo, x_hi = _clean_range(x_lo, x_hi)
    sieve = sieve or Sieve()
    specials = [_special_points(c.envelope, x_lo, x_hi) for c in checks]
    min_margin, argmin = math.inf, None
    witness = None
    n_bad = n_unsure = points = 0
    for pcs in _pieces(sieve, quantity, x_lo, x_hi):
        for check, (crit, poles) in zip(checks, specials):
            margin, at, ext, tol, npts = _evaluate(check, pcs, crit, poles)
            points += npts
            j = int(np.argmin(margin))
            if margin[j] < min_margin:
                min_margin, argmin = float(margin[j]), float(at[j])
            bad = margin < -tol
            unsure = ~bad & (margin <= tol)
            n_bad += int(bad.sum())
            n_unsure += int(unsure.sum())
            if witness is None and bad.any():
                i = int(np.argmax(bad))
                note = check.label or check.sense
                witness = Witness(float(at[i]), float(pcs.s[i]), float(ext[i]), note)
    status = "counterexample" if n_bad else ("inconclusive" if n_unsure else "verified")
    return VerificationReport(ineq_id, x_lo, x_hi, status, min_margin, argmin, witness, granularity,
                              time.perf_counter() - t0, points, n_bad, n_unsure)


_PI_NOTE = "pi against the envelope extreme on every inter-prime piece (ends, turning points, poles)"


def _bound_id(b, ineq_id):
    return ineq_id or getattr(b, "id", "") or "inline"


def sweep_pi_upper(b, x_lo, x_hi, sieve=None, *, ineq_id=None, require_monotone=False):
    """Check pi(x) < f(x) for every real x in [x_lo, x_hi].

    Raises:
        NonMonotoneBound: only with ``require_monotone`` and a bound that is
            not increasing on the range.
    """
    if b.direction != "upper":
        raise DomainError("bound is not an upper bound")
    if require_monotone and not b.is_increasing(x_lo, x_hi):
        raise NonMonotoneBound(f"{_bound_id(b, ineq_id)} is not increasing on [{x_lo}, {x_hi}]")
    return _sweep([Check(b, "upper")], "pi", x_lo, x_hi, sieve, _bound_id(b, ineq_id), _PI_NOTE)


def sweep_pi_lower(b, x_lo, x_hi, sieve=None, *, ineq_id=None, require_monotone=False):
    """Check pi(x) > g(x) for every real x in [x_lo, x_hi]; on an increasing
    piece this is pi(p_n) > g(p_{n+1})."""
    if b.direction != "lower":
        raise DomainError("bound is not a lower bound")
    if require_monotone and not b.is_increasing(x_lo, x_hi):
        raise NonMonotoneBound(f"{_bound_id(b, ineq_id)} is not increasing on [{x_lo}, {x_hi}]")
    return _sweep([Check(b, "lower")], "pi", x_lo, x_hi, sieve, _bound_id(b, ineq_id), _PI_NOTE)


def _eta_checks(eta: EtaBound, side):
    if side not in ("lower", "upper", "both"):
        raise ValueError("side must be lower, upper or both")
    checks = []
    if side in ("lower", "both"):
        checks.append(Check(eta.lower_envelope(), "lower", "theta > x - eta x/log^k x"))
    if side in ("upper", "both"):
        checks.append(Check(eta.upper_envelope(), "upper", "theta < x + eta x/log^k x"))
    return checks


def sweep_theta(eta: EtaBound, x_lo=None, x_hi=None, sieve=None, side="both", *, ineq_id=None):
    """Check |theta(x) - x| < eta x/log^k x (one or both sides) on [x_lo, x_hi]."""
    x_lo = eta.x1 if x_lo is None else x_lo
    if x_hi is None:
        raise DomainError("x_hi is required")
    return _sweep(_eta_checks(eta, side), "theta", x_lo, x_hi, sieve, _bound_id(eta, ineq_id),
                  "theta against the envelope extreme on every inter-prime piece")


def sweep_prime_gap(k, n=None, x_lo=None, x_hi=None, sieve=None, *, ineq_id=None):
    """Check that (x, x(1 + k/log^n x)] contains a prime for every x in [x_lo, x_hi].

    ``k`` may be a ``GapBound`` (then ``n`` and the default ``x_lo`` come
    from it) or a number.
    """
    if isinstance(k, GapBound):
        g = k
        x_lo = g.x0 if x_lo is None else x_lo
    else:
        g = GapBound(float(k), int(n))
    if x_lo is None or x_hi is None:
        raise DomainError("x_lo and x_hi are required")
    return _sweep([Check(g.envelope(), "gap")], "nextprime", x_lo, x_hi, sieve, _bound_id(g, ineq_id),
                  "next prime after x against x(1 + k/log^n x) on every inter-prime piece")


def sweep_rh(b: RhStyleBound, x_lo=None, x_hi=None, sieve=None, *, ineq_id=None):
    """Check both sides of a square-root-size bound for theta - x or pi - li."""
    x_lo = b.x_lo if x_lo is None else x_lo
    if x_hi is None:
        raise DomainError("x_hi is required")
    checks = [Check(b.lower_envelope(), "lower", "lower side"), Check(b.upper_envelope(), "upper", "upper side")]
    quantity = "theta" if b.kind == "theta" else "pi"
    return _sweep(checks, quantity, x_lo, x_hi, sieve, _bound_id(b, ineq_id), f"{quantity} on every inter-prime piece")


def verify_bound(b, x_lo=None, x_hi=None, sieve=None, *, side="both", ineq_id=None):
    """Dispatch on the bound type; ``x_lo`` defaults to the stated threshold."""
    if isinstance(b, (RationalLogBound, SeriesLogBound)):
        x_lo = b.x0 if x_lo is None else x_lo
        if x_lo is None:
            raise DomainError("x_lo is required")
        fn = sweep_pi_upper if b.direction == "upper" else sweep_pi_lower
        return fn(b, max(float(x_lo), 1.0), x_hi, sieve, ineq_id=ineq_id)
    if isinstance(b, EtaBound):
        return sweep_theta(b, max(b.x1, 1.0) if x_lo is None else x_lo, x_hi, sieve, side, ineq_id=ineq_id)
    if isinstance(b, GapBound):
        return sweep_prime_gap(b, x_lo=max(b.x0, 1.0) if x_lo is None else x_lo, x_hi=x_hi, sieve=sieve, ineq_id=ineq_id)
    if isinstance(b, RhStyleBound):
        return sweep_rh(b, x_lo, x_hi, sieve, ineq_id=ineq_id)
    raise TypeError(f"cannot verify {type(b).__name__}")


# ---------------------------------------------------------------------------
# crossing


def _check_for(b, side):
    if isinstance(b, (RationalLogBound, SeriesLogBound)):
        return Check(b, b.direction), "pi"
    if isinstance(b, EtaBound):
        if side not in ("lower", "upper"):
            raise ValueError("crossing for an eta bound needs side='lower' or 'upper'")
        return _eta_checks(b, side)[0], "theta"
    if isinstance(b, GapBound):
        return Check(b.envelope(), "gap"), "nextprime"
    raise TypeError(f"no crossing search for {type(b).__name__}")


def _fails(sense, v, s):
    if sense == "upper":
        return v <= s
    if sense == "lower":
        return v >= s
    return v < s


def _sup_of_failures(check, l, r, s, crit, poles):
    """Largest x in [l, r] at which the piece value ``s`` violates the check.

    Returns ``(y, at_end)``; ``at_end`` means the violation persists up to the
    right end of the piece (as a left limit).
    """
    env, sense = check.envelope, check.sense
    inner = [c for c in np.concatenate((crit, poles)) if l < c < r]
    bps = sorted(set([l, r] + inner))
    pole_set = set(float(p) for p in poles)

    def val(x, side):
        if x in pole_set:
            x = x * (1 + side * 1e-13)
        return float(env.value(np.array([x]))[0])

    for i in range(len(bps) - 2, -1, -1):
        a, b = bps[i], bps[i + 1]
        va, vb = val(a, +1), val(b, -1)
        if _fails(sense, vb, s):
            return b, b == r
        if _fails(sense, va, s):
            lo = a * (1 + 1e-13) if a in pole_set else a
            hi = b * (1 - 1e-13) if b in pole_set else b
            y = brentq(lambda x: float(env.value(np.array([x]))[0]) - s, lo, hi, xtol=1e-12, rtol=4 * EPS, maxiter=200)
            return y, False
    return None, False


def _settled(check, env, s, at, near):
    """True when the failure at ``at`` and both sides of the tie at ``near`` are strict at high precision."""
    S = decimal.Decimal(s)
    margin = env.value_precise(at) - S
    if check.sense == "lower":
        margin = -margin
    gap = S.scaleb(-30)
    return margin < -gap and all(abs(env.value_precise(v) - S) > gap for v in near)


def find_crossing(b, hint_lo, hint_hi, sieve=None, *, side="lower", ineq_id=None):
    """Smallest integer N with the inequality holding on [N, hint_hi].

    The range is swept downward from ``hint_hi`` one block at a time until
    the highest failing inter-prime piece is met; N is then read off that
    piece (its right end for lower bounds whose violation reaches the next
    prime, otherwise the first integer past the envelope root).

    Raises:
        NoCrossingInRange: if the inequality fails at ``hint_hi`` or holds on
            the whole range.
    """
    t0 = time.perf_counter()
    check, quantity = _check_for(b, side)
    name = _bound_id(b, ineq_id)
    hint_lo, hint_hi = _clean_range(hint_lo, hint_hi)
    sieve = sieve or Sieve()
    crit, poles = _special_points(check.envelope, hint_lo, hint_hi)
    first = True
    for pcs in _pieces(sieve, quantity, hint_lo, hint_hi, descending=True):
        margin, at, ext, tol, _ = _evaluate(check, pcs, crit, poles)
        bad = margin <= tol
        if first and bad[-1]:
            raise NoCrossingInRange(f"{name}: inequality fails at the top of the range ({hint_hi})")
        first = False
        if not bad.any():
            continue
        j = int(np.nonzero(bad)[0][-1])
        l, r, s = float(pcs.left[j]), float(pcs.right[j]), float(pcs.s[j])
        y, at_end = _sup_of_failures(check, l, r, s, crit, poles)
        definite = bool(margin[j] < -tol[j])
        if y is None:
            # only inconclusive within rounding; treat the piece end as the boundary
            y, at_end = r, True
        if at_end:
            N = int(math.ceil(r))
        elif check.sense == "gap":
            N = int(math.ceil(y))
        else:
            N = int(math.floor(y)) + 1
        env = check.envelope
        if at_end and check.sense == "lower":
            wit = Witness(float(N), s, float(env.value(np.array([float(N)]))[0]), "left limit at N")
        else:
            xb = float(N - 1)
            wit = Witness(xb, s, float(env.value(np.array([xb]))[0]), "integer below N")
        # rounding can only matter if the envelope sits within tolerance of s near N
        near = [float(env.value(np.array([float(v)]))[0]) for v in (N - 1, N)]
        exact = definite and all(abs(v - s) > tol[j] for v in near)
        if not exact and quantity != "theta" and hasattr(env, "value_precise"):
            # pi and next-prime values are exact integers, so a high-precision
            # envelope settles the tie; float rounding of the located extreme is
            # far below the float tolerance already excluded
            exact = _settled(check, env, s, float(at[j]), (N - 1, N))
        note = "" if exact else "decision at N is within rounding tolerance"
        return CrossingResult(name, N, "prime-jump sweep", (N, hint_hi), wit, exact, note,
                              time.perf_counter() - t0)
    raise NoCrossingInRange(f"{name}: inequality holds on all of [{hint_lo}, {hint_hi}]")
