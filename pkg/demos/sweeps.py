"""Sweep a handful of catalog inequalities up to a limit and print the reports."""

import argparse

from epbounds import bounds as B
from epbounds.sieve import Sieve
from epbounds.verify import verify_bound

IDS = ["thm103", "prop405", "prop406", "prop502", "eq5.2", "cor501:4", "eq3.5", "eq3.6", "eq3.3", "eq3.4"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--to", type=float, default=1e8)
    ap.add_argument("ids", nargs="*", default=IDS)
    args = ap.parse_args()

    sieve = Sieve(cache_below=int(args.to) if args.to <= 2e8 else None)
    for ident in args.ids:
        e = B.lookup(ident)
        lo = max(e.x0, 2.0)
        if lo >= args.to:
            print(f"{e.id:<10} threshold {lo:.6g} is above the limit, skipped")
            continue
        rep = verify_bound(e.bound, lo, args.to, sieve, ineq_id=e.id)
        print(f"{e.id:<10} [{lo:.10g}, {args.to:.3g}] {rep.status:<14} min margin {rep.min_margin:.4g} "
              f"at {rep.argmin:.10g}  ({rep.runtime_s:.1f} s)")


if __name__ == "__main__":
    main()
