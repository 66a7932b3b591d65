import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epbounds import sieve as S
from epbounds.errors import CorruptCheckpoint, RangeTooLarge
from epbounds.sieve import HighPrecisionSum

from oracles import brute_pi, eratosthenes, theta_naive

THETA_10 = math.log(2) + math.log(3) + math.log(5) + math.log(7)


def test_iterate_small_ranges():
    assert list(S.iterate_primes(2, 12)) == [2, 3, 5, 7, 11]
    assert list(S.iterate_primes(90, 100)) == [97]
    assert list(S.iterate_primes(2, 3)) == [2]
    assert list(S.iterate_primes(24, 29)) == []


def test_count_to_1e8(sieve):
    assert sieve.pi_at(10**8) == 5_761_455
    c, _ = S.count_theta_range(2, 10**8 + 1)
    assert c == 5_761_455


def test_range_too_large():
    with pytest.raises(RangeTooLarge):
        next(S.iterate_primes(2, 2**60))


@pytest.mark.parametrize("lo,hi", [(2, 10_000), (1_000_003, 1_200_000), (999_983, 999_984), (10**9, 10**9 + 50_000)])
def test_primes_match_oracle(lo, hi):
    got = S.primes_in_range(lo, hi, segment_size=4096)
    if hi <= 2_000_000:
        ref = eratosthenes(hi - 1)
        ref = ref[ref >= lo]
    else:
        ref = np.array([n for n in range(lo, hi) if all(n % p for p in eratosthenes(math.isqrt(n)))])
    np.testing.assert_array_equal(got, ref)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 300_000), st.integers(1, 20_000))
def test_pi_oracle_property(lo, width):
    hi = lo + width
    ref = eratosthenes(hi - 1)
    got = S.primes_in_range(lo, hi, segment_size=2048)
    np.testing.assert_array_equal(got, ref[ref >= lo])


def test_segment_bitset():
    seg = S.sieve_segment(10, 30)
    assert seg.flags.size == math.ceil((30 - 10) / 2)
    assert seg.primes().tolist() == [11, 13, 17, 19, 23, 29]
    assert S.sieve_segment(2, 12).primes().tolist() == [2, 3, 5, 7, 11]


def test_theta_and_pi_small():
    assert S.pi_at(1) == 0
    assert float(S.theta_at(1)) == 0.0
    assert S.pi_at(100) == 25 == brute_pi(100)
    assert abs(float(S.theta_at(10)) - THETA_10) < 1e-15


def test_pi_at_known_index(sieve):
    # 467,497 is the 39,021st prime
    assert sieve.pi_at(467_497) == 39_021
    assert sieve.pi_at(467_496) == 39_020


def test_theta_1e6_against_naive_sum():
    got = S.theta_at(10**6)
    ref = theta_naive(eratosthenes(10**6))
    assert abs(float(Fraction(got.hi) + Fraction(got.lo) - Fraction(str(ref)))) < 1e-9


def test_theta_monotone():
    xs = [2, 3, 4, 100, 101, 1000, 1009, 1010]
    vals = [S.theta_at(x) for x in xs]
    for (x, a), (y, b) in zip(zip(xs, vals), zip(xs[1:], vals[1:])):
        assert a <= b
        if S.pi_at(x) == S.pi_at(y):
            assert float(a) == float(b)


def test_chebyshev_relation():
    for x in [10, 1000, 99_991, 10**6]:
        psi = float(S.psi_at(x))
        ref = math.fsum(float(S.theta_at(int(math.floor(x ** (1 / k) + 1e-9)))) for k in range(1, int(math.log2(x)) + 1))
        assert abs(psi - ref) < 1e-8


def test_error_bound_is_small():
    assert S.theta_error_bound(1e13) < 1e-6
    assert S.theta_error_bound(1) == 0.0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e12, 1e12, allow_nan=False), min_size=1, max_size=40))
def test_high_precision_sum_exact(values):
    acc = HighPrecisionSum()
    for v in values:
        acc = acc + v
    exact = sum(Fraction(v) for v in values)
    err = abs(acc.as_fraction() - exact)
    # ~106-bit accumulation: error tiny relative to the largest term
    assert err <= Fraction(max(abs(v) for v in values) + 1) * Fraction(1, 2**95)
    assert abs(acc.lo) <= math.ulp(acc.hi) / 2 if acc.hi else acc.lo == 0


def test_checkpoint_examples(tmp_path):
    recs = S.checkpoint_run(100, 100)
    assert [(r.x, r.pi) for r in recs] == [(100, 25)]
    recs = S.checkpoint_run(10, 10)
    assert abs(float(recs[0].theta) - THETA_10) < 1e-15


def test_checkpoint_file_roundtrip_and_resume(tmp_path):
    p = tmp_path / "a.epbc"
    full = S.checkpoint_run(50_000, 10_000, path=p)
    step, back = S.read_checkpoints(p)
    assert step == 10_000 and back == full
    q = tmp_path / "b.epbc"
    S.checkpoint_run(20_000, 10_000, path=q)
    resumed = S.checkpoint_run(50_000, 10_000, resume_from=q)
    assert resumed == full
    assert q.read_bytes() == p.read_bytes()
    buf = io.StringIO()
    S.export_csv(full, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "x,pi,theta,psi" and lines[1].startswith("10000,1229,")


def test_checkpoint_deterministic_across_workers(tmp_path):
    a, b = tmp_path / "1.epbc", tmp_path / "4.epbc"
    S.checkpoint_run(3 * 10**8, 10**8, path=a, workers=1)
    S.checkpoint_run(3 * 10**8, 10**8, path=b, workers=4)
    assert a.read_bytes() == b.read_bytes()


def test_checkpoint_corruption_detected(tmp_path):
    p = tmp_path / "c.epbc"
    S.checkpoint_run(30_000, 10_000, path=p)
    data = bytearray(p.read_bytes())
    data[30] ^= 0xFF
    p.write_bytes(bytes(data))
    with pytest.raises(CorruptCheckpoint):
        S.read_checkpoints(p)
    p.write_bytes(bytes(data[:-3]))
    with pytest.raises(CorruptCheckpoint):
        S.read_checkpoints(p)


def test_state_from_checkpoint_matches_direct(tmp_path):
    recs = S.checkpoint_run(2 * 10**6, 10**6)
    x = 1_999_993
    assert S.pi_at(x, recs) == S.pi_at(x)
    assert abs(float(S.theta_at(x, recs)) - float(S.theta_at(x))) < 1e-8
