"""Recompute the thresholds of the x/(log x - a) family below a given limit."""

import argparse
import time

from epbounds import bounds as B
from epbounds.sieve import Sieve
from epbounds.verify import find_crossing


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--limit", type=float, default=2e6, help="only rows with a stated threshold below this")
    args = ap.parse_args()

    sieve = Sieve(cache_below=int(2 * args.limit))
    rows = [e for e in B.catalog() if e.id.startswith("cor801:") and e.x0 < args.limit]
    print(f"{'a':>9} {'stated':>12} {'computed':>12}  match  seconds")
    for e in sorted(rows, key=lambda e: -e.x0):
        t0 = time.perf_counter()
        res = find_crossing(e.bound, e.x0 / 2, 2 * e.x0, sieve)
        dt = time.perf_counter() - t0
        a = e.bound.coefficients()[0]
        mark = "yes" if res.smallest_N == int(e.x0) else "NO"
        print(f"{a:>9} {int(e.x0):>12,} {res.smallest_N:>12,}  {mark:>5}  {dt:.2f}")


if __name__ == "__main__":
    main()
