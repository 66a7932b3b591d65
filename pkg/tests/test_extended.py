"""Local threshold searches near 1.75e12, run only when the checkpoint file is present."""

import pytest

from epbounds import bounds as B
from epbounds.sieve import Sieve
from epbounds.verify import find_crossing, sweep_theta

from conftest import extended_records

N0 = 1_757_126_630_797
RECS = extended_records(1.757e12)

pytestmark = pytest.mark.skipif(RECS is None, reason="checkpoint file up to 1.757e12 not available")


@pytest.fixture(scope="module")
def ext_sieve():
    return Sieve(checkpoints=RECS)


def test_theta_threshold_local(ext_sieve):
    # largest failure of theta > x - 0.024334 x/log^3 x below N0 + 1e8
    eta = B.lookup("prop101").bound
    res = find_crossing(eta, 1.757e12, N0 + 1e8, ext_sieve, side="lower")
    assert res.smallest_N == N0 and res.exact


def test_theta_holds_just_above(ext_sieve):
    rep = sweep_theta(B.lookup("prop101").bound, N0, N0 + 1e8, ext_sieve, side="both")
    assert rep.verified


def test_pi_lower_threshold_local(ext_sieve):
    e = B.lookup("thm104")
    res = find_crossing(e.bound, 1.751e12, e.x0 + 1e8, ext_sieve)
    assert res.smallest_N == int(e.x0) and res.exact
