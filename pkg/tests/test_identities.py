import math

import mpmath
import numpy as np
import pytest

from epbounds.errors import DomainError, TruncationTailTooLarge
from epbounds.verify.identities import (
    B_REF,
    E_REF,
    EULER_GAMMA,
    identity_residual,
    identity_residuals,
    theta_error_envelope,
)

from oracles import eratosthenes


def test_reference_constants():
    with mpmath.workdps(30):
        assert EULER_GAMMA == pytest.approx(float(mpmath.euler), rel=1e-16)
        # B = gamma + sum_p (log(1 - 1/p) + 1/p); the prime sum converges fast enough to check 8 digits
        ps = eratosthenes(10**6)
        s = math.fsum(math.log1p(-1 / p) + 1 / p for p in ps.tolist())
    assert B_REF == pytest.approx(EULER_GAMMA + s, abs=1e-7)
    e = -EULER_GAMMA - math.fsum(math.log(p) / (p * (p - 1)) for p in ps.tolist())
    assert E_REF == pytest.approx(e, abs=1e-5)


def test_eq17_at_2_is_exact():
    r = identity_residual("eq1.7", 2.0)
    assert r.lhs == 1 and r.rhs == 1.0 and r.residual == 0.0


def test_eq17_against_gapwise_quadrature():
    # rhs of pi(x) = theta(x)/log x + int_2^x theta(t)/(t log^2 t) dt by plain numerical quadrature
    x = 200.0
    ps = eratosthenes(200).tolist()
    knots = ps + [x]
    th = 0.0
    integral = mpmath.mpf(0)
    with mpmath.workdps(30):
        for a, b in zip(knots[:-1], knots[1:]):
            th += math.log(a)
            integral += th * mpmath.quad(lambda t: 1 / (t * mpmath.log(t) ** 2), [a, b])
        ref = th / mpmath.log(x) + integral
    r = identity_residual("eq1.7", x)
    assert r.rhs == pytest.approx(float(ref), rel=1e-13)
    assert r.lhs == len(ps)


def test_eq17_eq22_single_points(sieve):
    r = identity_residual("eq1.7", 1e6, sieve)
    assert r.relative < 1e-8
    r = identity_residual("eq2.2", 1e4, sieve)
    assert abs(r.residual) < 1e-8 * 1e4


@pytest.mark.parametrize("which", ["eq1.7", "eq2.2"])
def test_log_spaced_grid(sieve, which):
    xs = np.geomspace(1e3, 1e7, 100)
    rs = identity_residuals(which, xs, sieve)
    assert max(r.relative for r in rs) <= 1e-8


@pytest.mark.parametrize("which", ["eq6.1", "eq7.2", "eq6.8"])
def test_truncated_identities(sieve, which):
    for x in (1e4, 1e6):
        r = identity_residual(which, x, sieve)
        assert r.X_max == 1e8
        assert r.consistent, r.to_dict()
        assert abs(r.truncated_residual) < 1e-12 * max(1.0, abs(r.lhs)) + 1e-15
        assert r.tail_bound > 0


def test_a3_two_forms_agree_within_tail(sieve):
    # A3 from the prime sum against its integral form, at sampled points
    for x in (3e3, 5e4, 7e5, 2e6):
        r = identity_residual("eq7.2", x, sieve)
        assert abs(r.lhs - r.rhs) <= r.tail_bound + 1e-12


def test_eq68_higher_power(sieve):
    r = identity_residual("eq6.8", 1e3, sieve, n=3)
    assert r.consistent
    ref = float(mpmath.primezeta(3)) - math.fsum(p**-3.0 for p in eratosthenes(1000).tolist())
    assert r.lhs == pytest.approx(ref, rel=1e-9)


def test_tail_guard(sieve):
    with pytest.raises(TruncationTailTooLarge):
        identity_residual("eq7.2", 1e4, sieve, max_tail=1e-12)
    with pytest.raises(DomainError):
        identity_residual("eq6.1", 1e4, sieve, X_max=1e3)
    with pytest.raises(DomainError):
        identity_residual("eq9.9", 1e4, sieve)
    with pytest.raises(DomainError):
        identity_residual("eq1.7", 1.5, sieve)


def test_error_envelope(sieve):
    ys = np.array([599.0, 1e4, 1e6, 1e9, 1e30])
    env = theta_error_envelope(ys)
    assert np.all(env > 0) and np.all(np.isfinite(env))
    # covers the actual error where it can be computed
    from epbounds.sieve import theta_at
    for y in (1e4, 1e6):
        assert abs(float(theta_at(y)) - y) < float(theta_error_envelope(np.array([y]))[0])
