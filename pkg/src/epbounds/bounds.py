"""Bound expressions in log x, coefficient recurrences, the J function and
the embedded catalog of named bounds.

Every envelope used by the sweeps has the shape ``f(x) = x * R(log x)`` with
``R`` a ratio of polynomials in ``L = log x``.  Values are computed with
Horner's rule in ``u = 1/L``; the polynomial form is only used to locate
poles and turning points exactly (``numpy.roots``), so that non-monotone
envelopes can still be swept at finitely many points.
"""

from __future__ import annotations

import decimal
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import ClassVar, Sequence

import numpy as np

from .analytic import DEFAULT_QUAD, QuadratureSpec, integrate, li_from_log, log_li_excess_from_log, log_li_from_log
from .errors import DenominatorNonPositive, DomainError, HypothesisViolation, MissingCheckpoint

EPS = 2.0**-52
_DIRECTIONS = ("upper", "lower")


def _check_direction(d):
    if d not in _DIRECTIONS:
        raise ValueError(f"direction must be one of {_DIRECTIONS}, got {d!r}")


def _logs(x):
    x = np.asarray(x, dtype=np.float64)
    return x, np.log(x)


PRECISE_DIGITS = 50


def _dec_logs(x):
    """``(x, log x, 1/log x)`` as Decimals; float inputs and coefficients convert exactly."""
    X = decimal.Decimal(float(x))
    L = X.ln()
    return X, L, 1 / L


# ---------------------------------------------------------------------------
# roots of x*R(log x) in L


def _real_roots(coeffs, L_lo, L_hi):
    """Real roots of a polynomial (highest degree first) inside [L_lo, L_hi]."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=np.float64), "f")
    if c.size <= 1:
        return np.empty(0)
    r = np.roots(c)
    keep = np.abs(r.imag) <= 1e-7 * np.maximum(1.0, np.abs(r.real))
    r = np.sort(r.real[keep])
    out = []
    dc = np.polyder(c)
    for z in r:
        # a few Newton steps to polish
        for _ in range(3):
            d = np.polyval(dc, z)
            if d == 0:
                break
            z = z - np.polyval(c, z) / d
        if L_lo <= z <= L_hi:
            out.append(z)
    return np.unique(np.asarray(out, dtype=np.float64))


class PolyEnvelope:
    """Mixin: pole and turning-point location for ``x * num(L)/den(L)``.

    Subclasses provide ``ratio_polys()`` returning ``(num, den)`` with
    coefficients highest degree first.
    """

    def ratio_polys(self):  # pragma: no cover - abstract
        raise NotImplementedError

    def poles(self, x_lo, x_hi):
        """Points of (x_lo, x_hi] where the denominator vanishes."""
        num, den = self.ratio_polys()
        L_lo, L_hi = math.log(max(x_lo, 1.0)), math.log(x_hi)
        return np.exp(_real_roots(den, max(L_lo, 1e-300), L_hi))

    def critical_points(self, x_lo, x_hi):
        """Zeros of d/dx [x R(log x)] = R + R' inside the range, poles excluded."""
        num, den = self.ratio_polys()
        num = np.asarray(num, dtype=np.float64)
        den = np.asarray(den, dtype=np.float64)
        # (R + R') * den^2 = num*den + num'*den - num*den'
        z = np.polysub(np.polyadd(np.polymul(num, den), np.polymul(np.polyder(num), den)),
                       np.polymul(num, np.polyder(den)))
        L_lo, L_hi = math.log(max(x_lo, 1.0)), math.log(x_hi)
        crit = _real_roots(z, max(L_lo, 1e-300), L_hi)
        poles = _real_roots(den, max(L_lo, 1e-300), L_hi)
        if poles.size:
            crit = np.array([c for c in crit if np.min(np.abs(poles - c)) > 1e-12 * c])
        return np.exp(crit)

    def is_increasing(self, x_lo, x_hi):
        return self.poles(x_lo, x_hi).size == 0 and self.critical_points(x_lo, x_hi).size == 0 and \
            float(self.deriv(np.array([x_lo]))[0]) > 0


# ---------------------------------------------------------------------------
# bound forms


@dataclass(frozen=True)
class RationalLogBound(PolyEnvelope):
    """``x / (leading*log x - a0 - a1/log x - ... - am/log^m x)``.

    ``x0`` is the stated validity threshold.  The denominator is checked to
    be positive on [x0, oo) at construction.
    """

    a: tuple
    leading: float = 1.0
    direction: str = "upper"
    x0: float | None = None
    id: str = ""
    citation: str = ""
    form: ClassVar[str] = "rational"

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        object.__setattr__(self, "a", a)
        if not 1 <= len(a) <= 9:
            raise ValueError("need between 1 and 9 coefficients a0..a8")
        _check_direction(self.direction)
        if self.leading <= 0:
            raise ValueError("leading coefficient must be positive")
        if self.x0 is not None and self.x0 > 1:
            self._check_denominator()

    def _check_denominator(self):
        # the positive a_i make the denominator smaller; their total is
        # increasing in L, so positivity at x0 of this minorant settles [x0, oo)
        L0 = math.log(self.x0)
        minorant = self.leading * L0 - sum(c / L0**i for i, c in enumerate(self.a) if c > 0)
        if minorant > 0:
            return
        grid = np.geomspace(self.x0, 10.0 * self.x0, 512)
        L10 = math.log(10.0 * self.x0)
        tail = self.leading * L10 - sum(c / L10**i for i, c in enumerate(self.a) if c > 0)
        if np.any(self.denominator(np.log(grid)) <= 0) or tail <= 0:
            raise DenominatorNonPositive(f"{self.id or 'bound'}: denominator not positive on [x0, oo)")

    def denominator(self, L):
        L = np.asarray(L, dtype=np.float64)
        u = 1.0 / L
        s = np.zeros_like(L)
        for c in reversed(self.a):
            s = c + u * s
        return self.leading * L - s

    def value(self, x):
        """Bound value without the positivity check (negative where the denominator is)."""
        x, L = _logs(x)
        return x / self.denominator(L)

    def value_precise(self, x):
        """Scalar value in ``PRECISE_DIGITS``-digit decimal arithmetic, for settling near ties."""
        with decimal.localcontext() as ctx:
            ctx.prec = PRECISE_DIGITS
            X, L, u = _dec_logs(x)
            s = decimal.Decimal(0)
            for c in reversed(self.a):
                s = decimal.Decimal(c) + u * s
            return X / (decimal.Decimal(self.leading) * L - s)

    def deriv(self, x):
        x, L = _logs(x)
        D = self.denominator(L)
        u = 1.0 / L
        dD = np.full_like(L, self.leading)
        for i, c in enumerate(self.a):
            if i:
                dD = dD + i * c * u ** (i + 1)
        return (D - dD) / D**2

    def abs_err(self, x):
        """Worst-case rounding error of ``value`` (a few ulps times the condition)."""
        x, L = _logs(x)
        D = self.denominator(L)
        u = 1.0 / L
        T = self.leading * L + sum(abs(c) * u**i for i, c in enumerate(self.a))
        rel = (4 * len(self.a) + 16) * EPS * T / np.abs(D)
        return np.abs(x / D) * rel

    def ratio_polys(self):
        # R = 1/D = L^m / (leading L^{m+1} - sum a_i L^{m-i})
        m = len(self.a) - 1
        den = np.zeros(m + 2)
        den[0] = self.leading
        for i, c in enumerate(self.a):
            den[1 + i] = -c
        num = np.zeros(m + 1)
        num[0] = 1.0
        return num, den

    def prop_form(self):
        """Coefficients of ``a0 log x + a1 + a2/log x + ...`` for the same denominator."""
        return (self.leading,) + tuple(-c for c in self.a)

    def to_series(self, x0=None):
        """Series lower bound obtained by expanding 1/denominator (needs all a_i >= 0)."""
        b = reciprocal_series_coeffs(self.prop_form())
        return SeriesLogBound(tuple(b), direction="lower", x0=self.x0 if x0 is None else x0,
                              id=f"{self.id}:series" if self.id else "")

    def coefficients(self):
        return list(self.a)


@dataclass(frozen=True)
class SeriesLogBound(PolyEnvelope):
    """``b0 x/log x + b1 x/log^2 x + ... + bn x/log^{n+1} x``."""

    b: tuple
    direction: str = "upper"
    x0: float | None = None
    id: str = ""
    citation: str = ""
    form: ClassVar[str] = "series"

    def __post_init__(self):
        b = tuple(float(v) for v in self.b)
        object.__setattr__(self, "b", b)
        if not 1 <= len(b) <= 9:
            raise ValueError("need between 1 and 9 coefficients b0..b8")
        _check_direction(self.direction)

    def _poly_u(self, u):
        s = np.zeros_like(u)
        for c in reversed(self.b):
            s = c + u * s
        return s

    def value(self, x):
        x, L = _logs(x)
        u = 1.0 / L
        return x * u * self._poly_u(u)

    def value_precise(self, x):
        with decimal.localcontext() as ctx:
            ctx.prec = PRECISE_DIGITS
            X, _, u = _dec_logs(x)
            s = decimal.Decimal(0)
            for c in reversed(self.b):
                s = decimal.Decimal(c) + u * s
            return X * u * s

    def deriv(self, x):
        x, L = _logs(x)
        u = 1.0 / L
        out = np.zeros_like(L)
        for i, c in enumerate(self.b):
            out = out + c * (u ** (i + 1) - (i + 1) * u ** (i + 2))
        return out

    def abs_err(self, x):
        x, L = _logs(x)
        u = 1.0 / L
        T = sum(abs(c) * u ** (i + 1) for i, c in enumerate(self.b))
        return x * T * (4 * len(self.b) + 16) * EPS

    def ratio_polys(self):
        n = len(self.b) - 1
        num = np.array(self.b, dtype=np.float64)  # sum b_i L^{n-i}
        den = np.zeros(n + 2)
        den[0] = 1.0
        return num, den

    def coefficients(self):
        return list(self.b)


@dataclass(frozen=True)
class _XPowEnvelope(PolyEnvelope):
    """``x * (1 + c / log^k x)``; the eta envelopes and prime-gap factors."""

    c: float
    k: int

    def value(self, x):
        x, L = _logs(x)
        return x + self.c * x / L**self.k

    def value_precise(self, x):
        with decimal.localcontext() as ctx:
            ctx.prec = PRECISE_DIGITS
            X, _, u = _dec_logs(x)
            return X + decimal.Decimal(self.c) * X * u**self.k

    def deriv(self, x):
        x, L = _logs(x)
        return 1.0 + self.c * (L - self.k) / L ** (self.k + 1)

    def abs_err(self, x):
        x, L = _logs(x)
        return (x + abs(self.c) * x / L**self.k) * (4 * self.k + 16) * EPS

    def ratio_polys(self):
        num = np.zeros(self.k + 1)
        num[0] = 1.0
        num[-1] = self.c
        den = np.zeros(self.k + 1)
        den[0] = 1.0
        return num, den


@dataclass(frozen=True)
class EtaBound:
    """``|theta(x) - x| < eta x / log^k x`` for x >= x1.

    ``x1 = 1`` encodes a statement made for every x > 1.
    """

    k: int
    eta: float
    x1: float
    id: str = ""
    citation: str = ""
    form: ClassVar[str] = "eta"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if not self.x1 >= 1:
            raise ValueError("x1 must be >= 1")

    def upper_envelope(self):
        return _XPowEnvelope(self.eta, int(self.k))

    def lower_envelope(self):
        return _XPowEnvelope(-self.eta, int(self.k))

    def coefficients(self):
        return [self.k, self.eta]


@dataclass(frozen=True)
class GapBound:
    """A prime in (x, x(1 + k/log^n x)] for every x >= x0.

    ``k_text`` keeps the constant as written (e.g. ``"0.048668 + 8.22e-11"``).
    """

    k: float
    n: int
    x0: float = 2.0
    id: str = ""
    citation: str = ""
    k_text: str = ""
    form: ClassVar[str] = "gap"

    def __post_init__(self):
        if not self.k > 0 or int(self.n) != self.n or self.n < 1:
            raise ValueError("need k > 0 and a positive integer n")

    @classmethod
    def of(cls, k, n, x0=2.0, id="", citation=""):
        text = str(k)
        return cls(parse_exact_sum(text) if isinstance(k, str) else float(k), int(n), x0=x0,
                   id=id, citation=citation, k_text=text)

    def envelope(self):
        return _XPowEnvelope(self.k, int(self.n))

    def coefficients(self):
        return [self.k_text or self.k, self.n]


class _RhEnvelope:
    """Envelope ``main(x) + sign * sqrt(x) log^e x / (8 pi)``; monotone on its range."""

    def __init__(self, kind, sign):
        self.kind = kind
        self.sign = sign
        self.power = 2 if kind == "theta" else 1

    def value(self, x):
        x, L = _logs(x)
        main = x if self.kind == "theta" else li_from_log(L)
        return main + self.sign * np.sqrt(x) * L**self.power / (8 * math.pi)

    def deriv(self, x):
        x, L = _logs(x)
        dmain = np.ones_like(x) if self.kind == "theta" else 1.0 / L
        e = self.power
        return dmain + self.sign * (L**e / 2 + e * L ** (e - 1)) / np.sqrt(x) / (8 * math.pi)

    def abs_err(self, x):
        return np.abs(self.value(x)) * 64 * EPS

    def poles(self, x_lo, x_hi):
        return np.empty(0)

    def critical_points(self, x_lo, x_hi):
        # sign changes of the derivative on a fine log grid, refined by bisection
        g = np.geomspace(max(x_lo, 1.5), x_hi, 4097)
        d = self.deriv(g)
        out = []
        for i in np.nonzero(np.sign(d[:-1]) != np.sign(d[1:]))[0]:
            a, b = g[i], g[i + 1]
            for _ in range(100):
                m = 0.5 * (a + b)
                if np.sign(self.deriv(np.array([m]))[0]) == np.sign(d[i]):
                    a = m
                else:
                    b = m
            out.append(0.5 * (a + b))
        return np.asarray(out)


@dataclass(frozen=True)
class RhStyleBound:
    """``|theta(x) - x| < sqrt(x) log^2 x / (8 pi)`` (kind "theta") or
    ``|pi(x) - li(x)| < sqrt(x) log x / (8 pi)`` (kind "pi"), unconditional on
    ``[x_lo, x_hi]``."""

    kind: str
    x_lo: float
    x_hi: float
    id: str = ""
    citation: str = ""
    form: ClassVar[str] = "rh"

    def __post_init__(self):
        if self.kind not in ("theta", "pi"):
            raise ValueError("kind must be 'theta' or 'pi'")
        if not 1 < self.x_lo < self.x_hi:
            raise ValueError("need 1 < x_lo < x_hi")

    @property
    def x0(self):
        return self.x_lo

    def upper_envelope(self):
        return _RhEnvelope(self.kind, +1)

    def lower_envelope(self):
        return _RhEnvelope(self.kind, -1)

    def width(self, x):
        x, L = _logs(x)
        return np.sqrt(x) * L ** (2 if self.kind == "theta" else 1) / (8 * math.pi)

    def coefficients(self):
        return []


def eval_bound(b, x):
    """Value of a rational or series bound at x (scalar or array).

    Raises:
        DenominatorNonPositive: where a rational denominator is <= 0.
    """
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(xa <= 1):
        raise DomainError("bounds are defined for x > 1")
    if isinstance(b, RationalLogBound):
        D = b.denominator(np.log(xa))
        if np.any(D <= 0):
            bad = xa[D <= 0][0]
            raise DenominatorNonPositive(f"denominator is {b.denominator(np.log([bad]))[0]:.6g} at x={bad:.17g}")
        out = xa / D
    else:
        out = b.value(xa)
    return float(out[0]) if scalar else out


def eval_bound_log(b, log_x):
    """log of a rational or series bound for x given by its logarithm (any size)."""
    L = float(log_x)
    if isinstance(b, RationalLogBound):
        D = float(b.denominator(np.array([L]))[0])
        if D <= 0:
            raise DenominatorNonPositive(f"denominator is {D:.6g} at log x = {L}")
        return L - math.log(D)
    s = float(b._poly_u(np.array([1.0 / L]))[0])
    if s <= 0:
        raise DomainError("series bound is not positive here")
    return L - math.log(L) + math.log(s)


# ---------------------------------------------------------------------------
# coefficient recurrences


def panaitopol_coeffs(m: int) -> list[int]:
    """Integers k_1..k_m with k_m + 1! k_{m-1} + ... + (m-1)! k_1 = m m!.

    Raises:
        OverflowError: for m > 25.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > 25:
        raise OverflowError("coefficients are only tabulated up to m = 25")
    fact = [1]
    for i in range(1, m + 1):
        fact.append(fact[-1] * i)
    k = []
    for j in range(1, m + 1):
        k.append(j * fact[j] - sum(fact[i] * k[j - i - 1] for i in range(1, j)))
    return k


def reciprocal_series_coeffs(a: Sequence[float]) -> list[float]:
    """Coefficients b with 1/(a0 + a1 u + ... + an u^n) = b0 + b1 u + ... + bn u^n + O(u^{n+1}).

    ``a`` is in the ``a0 log x + a1 + a2/log x + ...`` convention, so the
    result gives ``x/(a0 log x + a1 + ...) ~ sum b_i x/log^{i+1} x``.

    Raises:
        HypothesisViolation: unless a0 > 0 and a_i <= 0 for i >= 1.
    """
    a = [float(v) for v in a]
    if not a or a[0] <= 0:
        raise HypothesisViolation("a0 must be positive")
    if any(v > 0 for v in a[1:]):
        raise HypothesisViolation("a1..an must be <= 0")
    b = [1.0 / a[0]]
    for k in range(1, len(a)):
        b.append(-math.fsum(a[i] * b[k - i] for i in range(1, k + 1)) / a[0])
    return b


def series_product_excess(a, b):
    """Coefficients of degree n+1..2n in (sum a_i u^i)(sum b_i u^i)."""
    n = len(a) - 1
    return [math.fsum(a[i] * b[j - i] for i in range(max(0, j - n), min(j, n) + 1)) for j in range(n + 1, 2 * n + 1)]


def parse_exact_sum(text: str) -> float:
    """Evaluate strings like ``"0.048668 + 8.22e-11"`` or ``"1/111"`` exactly, then round."""
    return float(sum(Fraction(part.strip().replace(",", "")) for part in text.split("+")))


# ---------------------------------------------------------------------------
# J and the li combination


def _j_integral(k, eta, L1, L2, quad):
    def f(u):
        return math.exp(u - L2) * (u**-2 + eta * u ** (-k - 2))

    val, err = integrate(f, L1, L2, quad)
    return val * math.exp(L2), err * math.exp(L2)


def J(k, eta, x1, x, sieve=None, *, pi_x1=None, theta_x1=None, quad: QuadratureSpec = DEFAULT_QUAD):
    """Upper (eta > 0) or lower (eta < 0) comparison function for pi(x).

    ``pi(x1) - theta(x1)/log x1 + x/log x + eta x/log^{k+1} x
    + int_{x1}^{x} (1/log^2 t + eta/log^{k+2} t) dt``.  The integral is taken
    in the variable ``log t``.  ``pi(x1)`` and ``theta(x1)`` come from the
    arguments or from ``sieve``.

    Raises:
        MissingCheckpoint: if x1 > 1e10 and neither values nor a sieve with
            checkpoints are supplied.
    """
    x1 = float(x1)
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(xs < x1):
        raise DomainError("need x >= x1")
    if x1 <= 1:
        raise DomainError("need x1 > 1")
    if pi_x1 is None or theta_x1 is None:
        if sieve is None:
            if x1 > 1e10:
                raise MissingCheckpoint("pi(x1), theta(x1) needed for x1 > 1e10")
            from .sieve import Sieve

            sieve = Sieve()
        elif x1 > 1e10 and not sieve.checkpoints:
            raise MissingCheckpoint("no checkpoints available near x1")
        p, th = sieve.state_at(int(math.floor(x1)))
        pi_x1 = p if pi_x1 is None else pi_x1
        theta_x1 = float(th) if theta_x1 is None else theta_x1
    L1 = math.log(x1)
    base = pi_x1 - float(theta_x1) / L1
    order = np.argsort(xs)
    out = np.empty_like(xs)
    acc = 0.0
    prevL = L1
    for i in order:
        L = math.log(xs[i])
        if L > prevL:
            acc += _j_integral(k, eta, prevL, L, quad)[0]
            prevL = L
        out[i] = base + xs[i] / L + eta * xs[i] / L ** (k + 1) + acc
    return float(out[0]) if np.ndim(x) == 0 else out


def li_combination_lower_bound(a, c1, d1, x=None, *, log_x=None, as_log=False):
    """``c1 (li(x) - li(e^a) + e^a/a) + d1 (li(e^a) - e^a/a - li(e^1000) + e^1000/1000)``.

    All terms are handled as logarithms so that arguments like e^1000 are
    fine.  Returns the value, or its logarithm when ``as_log`` is set.

    Raises:
        OverflowError: if the value does not fit a float and ``as_log`` is False.
        DomainError: if the combination is not positive (no logarithm).
    """
    if a <= 0:
        raise DomainError("a must be positive")
    if log_x is None:
        if x is None:
            raise TypeError("need x or log_x")
        log_x = math.log(x)
    Lx = float(log_x)

    def log_li(L):
        return log_li_from_log(L)[0] if L >= 50 else math.log(float(li_from_log(L)))

    # signed log-terms: c1 li(x) + (d1 - c1) T(a) - d1 T(1000), T(t) = li(e^t) - e^t/t
    terms = [(c1, log_li(Lx)), (d1 - c1, log_li_excess_from_log(a)), (-d1, log_li_excess_from_log(1000.0))]
    terms = [(c, l) for c, l in terms if c != 0]
    top = max(l + math.log(abs(c)) for c, l in terms)
    s = math.fsum(math.copysign(math.exp(l + math.log(abs(c)) - top), c) for c, l in terms)
    if s <= 0:
        raise DomainError("combination is not positive at this x")
    out = top + math.log(s)
    if as_log:
        return out
    if out > 709.78:
        raise OverflowError("value exceeds float range; use as_log=True")
    return math.exp(out)


# ---------------------------------------------------------------------------
# catalog


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    citation: str
    form: str
    direction: str
    bound: object
    x0: float
    x0_text: str = ""
    aliases: tuple = ()
    notes: str = ""
    valid_to: object = None
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def to_json(self):
        out = {
            "id": self.id,
            "citation": self.citation,
            "form": self.form,
            "direction": self.direction,
            "coefficients": self.bound.coefficients(),
            "x0": self.raw.get("x0", self.x0),
        }
        # some tables name the threshold x1 or x2
        label = self.raw.get("threshold_label")
        if label:
            out[label] = out["x0"]
        return out


def parse_threshold(v):
    """Thresholds are numbers or strings like ``"e^29"``."""
    if isinstance(v, (int, float)):
        return float(v)
    s = str(v).replace(",", "").strip()
    if s.startswith("e^"):
        return math.exp(float(s[2:]))
    return float(s)


def _entry_from_row(row):
    form = row["form"]
    x0 = parse_threshold(row["x0"])
    common = dict(id=row["id"], citation=row["citation"])
    if form == "rational":
        bound = RationalLogBound(tuple(row["coefficients"]), leading=row.get("leading", 1.0),
                                 direction=row["direction"], x0=x0, **common)
    elif form == "series":
        bound = SeriesLogBound(tuple(row["coefficients"]), direction=row["direction"], x0=x0, **common)
    elif form == "eta":
        bound = EtaBound(row["k"], row["eta"], x0, **common)
    elif form == "gap":
        bound = GapBound.of(row["k"], row["n"], x0=x0, **common)
    elif form == "rh":
        bound = RhStyleBound(row["kind"], x0, float(row["valid_to"]), **common)
    else:
        raise ValueError(f"unknown form {form!r}")
    return CatalogEntry(row["id"], row["citation"], form, row["direction"], bound, x0,
                        x0_text=str(row["x0"]), aliases=tuple(row.get("aliases", ())),
                        notes=row.get("notes", ""), valid_to=row.get("valid_to"), raw=dict(row))


@lru_cache(maxsize=1)
def catalog() -> tuple[CatalogEntry, ...]:
    """All named bounds of the embedded table, in table order."""
    text = resources.files("epbounds").joinpath("data/catalog.json").read_text(encoding="utf-8")
    doc = json.loads(text)
    return tuple(_entry_from_row(r) for r in doc["entries"])


@lru_cache(maxsize=1)
def _index():
    idx = {}
    for e in catalog():
        for name in (e.id,) + e.aliases:
            idx[name] = e
    return idx


def lookup(name: str) -> CatalogEntry:
    """Catalog entry by id or alias (``cor801:1.08366``, ``cor801:a0=1.08366`` ...).

    Raises:
        KeyError: unknown name.
    """
    idx = _index()
    if name in idx:
        return idx[name]
    # tolerate numeric spellings such as cor801:1.0990
    if ":" in name:
        head, tail = name.split(":", 1)
        key = tail.split("=", 1)[-1]
        try:
            v = float(key)
        except ValueError:
            raise KeyError(name) from None
        for e in catalog():
            if e.id.startswith(head + ":"):
                try:
                    if float(e.id.split(":", 1)[1]) == v:
                        return e
                except ValueError:
                    continue
    raise KeyError(name)


def export_catalog_json():
    return [e.to_json() for e in catalog()]
