import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from epbounds import bounds as B
from epbounds.errors import DomainError, TruncationTailTooLarge
from epbounds.verify.identities import B_REF, E_REF, EULER_GAMMA, PrimeTable
from epbounds.verify.mertens import (
    N0,
    a1_envelope,
    a1_values,
    a3_envelope,
    mertens_estimate,
    mertens_products,
    prime_power_tail,
    rh_tail_width,
)

from oracles import eratosthenes


def test_small_sums():
    m = mertens_estimate(10)
    assert float(m.sum_recip) == pytest.approx(float(Fraction(1, 2) + Fraction(1, 3) + Fraction(1, 5) + Fraction(1, 7)), rel=1e-15)
    assert float(m.sum_logp) == pytest.approx(sum(math.log(p) / p for p in (2, 3, 5, 7)), rel=1e-15)
    assert mertens_products(10).minus == pytest.approx(8 / 35, rel=1e-15)
    with pytest.raises(DomainError):
        mertens_estimate(1)


def test_s_against_reference_constant():
    # S(x) = B - gamma - sum_{p <= x} (log(1 - 1/p) + 1/p)
    m = mertens_estimate(10)
    ref = B_REF - EULER_GAMMA - math.fsum(math.log1p(-1 / p) + 1 / p for p in (2, 3, 5, 7))
    assert m.S == pytest.approx(ref, abs=1e-12)
    for x in (1e3, 1e6):
        m = mertens_estimate(x)
        lo, hi = m.S_bounds
        assert lo < m.S < hi


def test_constants_at_1e7(sieve):
    m = mertens_estimate(10**7, sieve)
    assert abs(m.B_hat - 0.26149) < 1e-4
    assert abs(m.E_hat + 1.3325) < 2e-3
    assert abs(m.B_hat - B_REF) <= m.B_err
    assert abs(m.E_hat - E_REF) <= m.E_err
    assert m.A1 > 0


def test_envelope_widths_shrink(sieve):
    ests = [mertens_estimate(x, sieve) for x in (10**3, 10**4, 10**5, 10**6, 10**7)]
    assert all(b.B_err < a.B_err and b.E_err < a.E_err for a, b in zip(ests, ests[1:]))
    for m in ests:
        assert abs(m.B_hat - B_REF) <= m.B_err
        assert abs(m.E_hat - E_REF) <= m.E_err


def test_envelopes_switch_at_threshold():
    assert a1_envelope(1e6)[2] == "classical"
    assert a1_envelope(N0)[2] == "eta3"
    assert a3_envelope(2e12)[2] == "eta3"
    assert a1_envelope(100)[1] == math.inf
    lo, hi, _ = a1_envelope(N0)
    assert lo == -hi and hi < a1_envelope(N0 - 1)[1]


def test_a1_positive_on_grid(sieve):
    xs = np.linspace(10, 1e8, 1001)[1:]
    assert np.all(a1_values(xs, sieve) > 0)
    # matches the scalar path
    assert a1_values([1e6], sieve)[0] == pytest.approx(mertens_estimate(10**6, sieve).A1, abs=1e-13)


def test_product_identities(sieve):
    p = mertens_products(10**6, sieve)
    assert p.identity_residual < 1e-9
    assert p.split_residual < 1e-12
    assert p.within("classical")
    assert not p.envelopes["eta3"][2]


def test_prime_power_tail_small_x():
    t = prime_power_tail(10, 2, X_max=1e6)
    assert t.tail_error < 1e-6
    assert t.contained
    ref = float(mpmath.primezeta(2)) - sum(p**-2.0 for p in (2, 3, 5, 7))
    assert abs(t.value - ref) <= t.tail_error + 1e-12


def test_prime_power_tail_enclosures(sieve):
    assert prime_power_tail(1e3, 3, sieve).contained
    t = prime_power_tail(1e5, 2, sieve)
    assert t.contained and t.rh_half_width is not None
    with pytest.raises(TruncationTailTooLarge):
        prime_power_tail(10, 2, sieve, X_max=1e3, tol=1e-12)
    with pytest.raises(DomainError):
        prime_power_tail(10, 1, sieve)
    with pytest.raises(DomainError):
        prime_power_tail(1e4, 2, sieve, eta=B.lookup("prop101").bound)


def test_prime_power_tail_decreasing(sieve):
    xs = np.geomspace(10, 1e6, 12)
    tab = PrimeTable.build(10**8, sieve)
    vals = [prime_power_tail(x, 2, sieve, X_max=1e8, table=tab).value for x in xs]
    assert all(0 < b < a for a, b in zip(vals, vals[1:]))


def test_rh_width_domain():
    assert rh_tail_width(599, 2) > 0
    with pytest.raises(DomainError):
        rh_tail_width(598, 2)


def test_direct_sum_oracle():
    ps = eratosthenes(10**5)
    m = mertens_estimate(10**5)
    assert float(m.sum_recip) == pytest.approx(math.fsum(1 / p for p in ps.tolist()), rel=1e-15)
