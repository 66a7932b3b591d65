"""Check the theta lower bound with k = 3 near 1.75e12 from a checkpoint file.

Build the checkpoints first (about two hours on one machine):

    epbounds --extended sieve-checkpoint --to 1.757e12 --step 1e9 --out checkpoints/step1e9.epbc
"""

import argparse
from pathlib import Path

from epbounds import bounds as B
from epbounds.sieve import Sieve, read_checkpoints
from epbounds.verify import find_crossing, sweep_theta


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--checkpoint", type=Path, default=Path("checkpoints/step1e9.epbc"))
    ap.add_argument("--start", type=float, default=1.75e12)
    ap.add_argument("--width", type=float, default=1e8)
    ap.add_argument("--crossings", action="store_true", help="also search the two thresholds near 1.75e12")
    args = ap.parse_args()

    _, recs = read_checkpoints(args.checkpoint)
    sieve = Sieve(checkpoints=recs)
    eta = B.lookup("prop101").bound
    rep = sweep_theta(eta, args.start, args.start + args.width, sieve, side="lower")
    print(rep.to_json(indent=2))

    if args.crossings:
        N0 = int(B.lookup("prop101").x0)
        res = find_crossing(eta, 1.757e12, N0 + 1e8, sieve, side="lower")
        print(f"theta lower bound: N = {res.smallest_N:,} (stated {N0:,})")
        t = B.lookup("thm104")
        res = find_crossing(t.bound, 1.751e12, t.x0 + 1e8, sieve)
        print(f"pi lower bound: N = {res.smallest_N:,} (stated {int(t.x0):,})")


if __name__ == "__main__":
    main()
