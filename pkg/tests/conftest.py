import os
import sys
from pathlib import Path

import pytest

from epbounds.sieve import Sieve, read_checkpoints

sys.path.insert(0, os.path.dirname(__file__))

CHECKPOINT_FILE = Path(__file__).resolve().parents[1] / "checkpoints" / "step1e9.epbc"


@pytest.fixture(scope="session")
def sieve():
    # one cached prime table up to 1e8 shared by every desk-scale test
    return Sieve(cache_below=10**8)


@pytest.fixture(scope="session")
def small_sieve():
    return Sieve()


def extended_records(min_x):
    """Checkpoint records if the committed file reaches ``min_x``, else None."""
    if not CHECKPOINT_FILE.exists():
        return None
    try:
        _, recs = read_checkpoints(CHECKPOINT_FILE)
    except Exception:
        return None
    if not recs or recs[-1].x < min_x:
        return None
    return recs


ACCEPTANCE = {}


def record_criterion(n, ok, detail=""):
    """Remember one acceptance line; all of them are printed in the terminal summary."""
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
