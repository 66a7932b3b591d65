import csv
import io
import math

import mpmath
import numpy as np
import pytest

from epbounds import bounds as B
from epbounds.errors import DomainError, NoCrossingInRange, NonMonotoneBound
from epbounds.sieve import Sieve
from epbounds.verify import (
    VerificationReport,
    find_crossing,
    reports_to_csv,
    sweep_pi_lower,
    sweep_pi_upper,
    sweep_prime_gap,
    sweep_theta,
    verify_bound,
)

from oracles import eratosthenes

ORACLE_LIMIT = 60_000_000


@pytest.fixture(scope="module")
def primes():
    return eratosthenes(ORACLE_LIMIT)


def oracle_pi(primes, x):
    return np.searchsorted(primes, np.floor(x), side="right")


def rational_value(coeffs, x):
    # x / (log x - a0 - a1/log x - ...), written out independently of the package
    L = np.log(x)
    den = L - sum(a / L**i for i, a in enumerate(coeffs))
    return x / den


def legendre(a0):
    return B.RationalLogBound((a0,))


# ---------------------------------------------------------------------------
# upper and lower pi sweeps


def test_thm103_verified(sieve):
    rep = sweep_pi_upper(B.lookup("thm103").bound, 48, 1e7, sieve)
    assert rep.status == "verified" and rep.min_margin > 0
    assert rep.n_counterexamples == 0


def test_legendre_window(sieve):
    b = legendre(1.08366)
    assert sweep_pi_upper(b, 1_526_671, 1e7, sieve).status == "verified"
    rep = sweep_pi_upper(b, 1_526_600, math.nextafter(1_526_671.0, 0), sieve)
    assert rep.status == "counterexample"
    assert rep.witness.lhs >= rep.witness.rhs and rep.min_margin < 0


def test_prop406_series(sieve):
    assert sweep_pi_upper(B.lookup("prop406").bound, 2, 1e6, sieve).status == "verified"


def test_cor501_last_column(sieve):
    b = B.lookup("cor501:4").bound
    assert sweep_pi_lower(b, 54_941_209, 1e8, sieve).status == "verified"
    assert sweep_pi_lower(b, 54_900_000, 54_941_208, sieve).status == "counterexample"


@pytest.mark.parametrize("ident,lo,hi", [("eq5.2", 65_405_887, 1e8), ("prop502", 467_497, 1e7)])
def test_lower_examples(sieve, ident, lo, hi):
    assert sweep_pi_lower(B.lookup(ident).bound, lo, hi, sieve).status == "verified"


def test_thm103_below_threshold(sieve):
    rep = verify_bound(B.lookup("thm103").bound, 1, 47, sieve)
    assert rep.status == "counterexample"


def test_direction_and_monotone_guards(sieve):
    with pytest.raises(DomainError):
        sweep_pi_lower(B.lookup("thm103").bound, 48, 100, sieve)
    with pytest.raises(NonMonotoneBound):
        sweep_pi_upper(B.lookup("thm103").bound, 2, 48, sieve, require_monotone=True)
    with pytest.raises(DomainError):
        sweep_pi_upper(B.lookup("thm103").bound, 100, 50, sieve)


# ---------------------------------------------------------------------------
# theta and gaps


def test_eta3_fails_below_its_threshold(sieve):
    rep = sweep_theta(B.lookup("prop101").bound, 1e6, 1e8, sieve, side="lower")
    assert rep.status == "counterexample"


def test_eta_sweeps(sieve):
    assert sweep_theta(B.lookup("eq3.5").bound, 1_091_159, 1e8, sieve).status == "verified"
    assert sweep_theta(B.lookup("eq3.6").bound, 2, 1e6, sieve).status == "verified"


@pytest.mark.parametrize("ident,lo,hi", [("eq3.4", 2, 1e6), ("eq3.3", 6_034_256, 1e8), ("eq3.2", 468_991_632, 1e9)])
def test_gap_examples(sieve, ident, lo, hi):
    assert sweep_prime_gap(B.lookup(ident).bound, x_lo=lo, x_hi=hi, sieve=sieve).status == "verified"


def test_gap_numeric_form(sieve):
    assert sweep_prime_gap(198.2, 4, 2, 1e5, sieve).status == "verified"
    # a gap of 1/111 relative to x / log^2 x is too tight near 1e5
    assert sweep_prime_gap(1 / 111, 2, 1e5, 2e5, sieve).status == "counterexample"


def test_gap_consistency(primes, sieve):
    k, n = 0.087, 3
    lo, hi = 6_034_256, 2e7
    assert sweep_prime_gap(k, n, lo, hi, sieve).status == "verified"
    p = primes[(primes >= lo) & (primes <= hi)].astype(float)
    rel = np.diff(p) / p[:-1]
    assert np.all(rel <= k / np.log(p[:-1]) ** n)


# ---------------------------------------------------------------------------
# crossings


@pytest.mark.parametrize("ident,hint,expect", [
    ("cor801:1.08366", (1e6, 2e6), 1_526_671),
    ("cor801:1.099", (2, 1e6), 60_224),
    ("cor801:1.098", (2, 1e6), 60_297),
])
def test_legendre_crossings(sieve, ident, hint, expect):
    res = find_crossing(B.lookup(ident).bound, *hint, sieve)
    assert res.smallest_N == expect and res.exact
    assert res.certified_range == (expect, hint[1])


def _minimality_upper(primes, coeffs, N):
    # fails on [N-1, N) (worst point N-1 for an increasing envelope), holds at N
    below, at = float(N - 1), float(N)
    assert oracle_pi(primes, below) >= rational_value(coeffs, below)
    assert oracle_pi(primes, at) < rational_value(coeffs, at)


@pytest.mark.parametrize("ident", ["cor801:1.08366", "cor801:1.099", "cor801:1.071"])
def test_crossing_minimality_upper(primes, sieve, ident):
    e = B.lookup(ident)
    res = find_crossing(e.bound, 2e4, 3e7, sieve)
    _minimality_upper(primes, e.bound.coefficients(), res.smallest_N)
    w = res.witness_below
    assert w.x == res.smallest_N - 1 and w.lhs >= w.rhs


def test_crossing_minimality_lower(primes, sieve):
    b = B.lookup("cor501:4").bound
    res = find_crossing(b, 5e7, 6e7, sieve)
    N = res.smallest_N
    assert N == 54_941_209
    # left limit at N: pi is pi(N - 1) while the envelope approaches its value at N
    g = float(B.eval_bound(b, float(N)))
    assert oracle_pi(primes, N - 1) <= g < oracle_pi(primes, N)
    assert res.witness_below.note == "left limit at N"


def test_cor801_1071_table_value_is_off(primes, sieve):
    # the published threshold 22,078,017 is contradicted just above it
    res = find_crossing(B.lookup("cor801:1.071").bound, 2e7, 2.3e7, sieve)
    assert res.smallest_N == 22_078_034
    x = 22_078_033
    with mpmath.workdps(40):
        f = mpmath.mpf(x) / (mpmath.log(x) - mpmath.mpf("1.071"))
    assert int(oracle_pi(primes, x)) >= f
    assert x > 22_078_017


def test_no_crossing_in_range(sieve):
    with pytest.raises(NoCrossingInRange):
        find_crossing(legendre(1.08366), 1.6e6, 2e6, sieve)
    with pytest.raises(NoCrossingInRange):
        find_crossing(legendre(1.08366), 1e6, 1_526_670, sieve)


# ---------------------------------------------------------------------------
# soundness spot checks against the independent oracle


def test_soundness_upper(primes, sieve):
    b = B.lookup("thm103").bound
    assert sweep_pi_upper(b, 48, 1e7, sieve).verified
    xs = np.random.default_rng(1).uniform(48, 1e7, 10_000)
    assert np.all(oracle_pi(primes, xs) < rational_value(b.coefficients(), xs))


def test_soundness_lower(primes, sieve):
    b = B.lookup("prop502").bound
    assert sweep_pi_lower(b, 467_497, 1e7, sieve).verified
    xs = np.random.default_rng(2).uniform(467_497, 1e7, 10_000)
    assert np.all(oracle_pi(primes, xs) > rational_value(b.coefficients(), xs))


def test_soundness_theta(primes, sieve):
    e = B.lookup("eq3.5").bound
    assert sweep_theta(e, e.x1, 5e7, sieve).verified
    p = primes[primes <= 5e7]
    cum = np.cumsum(np.log(p.astype(float)))
    xs = np.random.default_rng(3).uniform(e.x1, 5e7, 10_000)
    theta = cum[oracle_pi(p, xs) - 1]
    width = e.eta * xs / np.log(xs) ** e.k
    assert np.all(np.abs(theta - xs) < width)


# ---------------------------------------------------------------------------
# reports


def test_report_serialization(sieve):
    reps = [verify_bound(B.lookup("thm103").bound, 48, 1e5, sieve),
            verify_bound(B.lookup("thm103").bound, 1, 47, sieve)]
    d = reps[1].to_dict()
    assert d["status"] == "counterexample" and d["witness"] is not None
    rows = list(csv.DictReader(io.StringIO(reports_to_csv(reps))))
    assert [r["status"] for r in rows] == ["verified", "counterexample"]
    assert set(rows[0]) >= {"ineq_id", "x_lo", "x_hi", "min_margin", "argmin", "witness", "runtime_s", "eval_points"}


def test_report_invariants():
    with pytest.raises(ValueError):
        VerificationReport("x", 1, 2, "counterexample")
    with pytest.raises(ValueError):
        VerificationReport("x", 1, 2, "maybe")



@pytest.fixture(scope="module")
def wide_sieve():
    return Sieve(cache_below=2 * 10**8)


# published value 22,078,017 fails just above itself; see test_cor801_1071_table_value_is_off
RECOMPUTED = {"cor801:1.071": 22_078_034}


@pytest.mark.parametrize("entry", [e for e in B.catalog() if e.id.startswith("cor801") and e.x0 < 1e8],
                         ids=lambda e: e.id)
def test_cor801_rows_below_1e8(entry, wide_sieve):
    res = find_crossing(entry.bound, entry.x0 / 2, 2 * entry.x0, wide_sieve)
    assert res.exact
    assert res.smallest_N == RECOMPUTED.get(entry.id, int(entry.x0))
