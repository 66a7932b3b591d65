"""Mertens-type sums, products and integral identities at a few x."""

import numpy as np

from epbounds.sieve import Sieve
from epbounds.verify import identity_residuals, mertens_estimate, mertens_products
from epbounds.verify.identities import B_REF, E_REF


def main():
    sieve = Sieve(cache_below=10**8)
    print(f"{'x':>8} {'B_hat':>12} {'+-':>9} {'E_hat':>12} {'+-':>9} {'A1':>10}")
    for x in (10**3, 10**4, 10**5, 10**6, 10**7):
        m = mertens_estimate(x, sieve)
        print(f"{x:>8.0e} {m.B_hat:>12.8f} {m.B_err:>9.2e} {m.E_hat:>12.8f} {m.E_err:>9.2e} {m.A1:>10.3e}")
    print(f"reference B = {B_REF:.12f}, E = {E_REF:.12f}")

    p = mertens_products(10**6, sieve)
    print(f"\nproduct (1 - 1/p) up to 1e6 = {p.minus:.12g}; identity residual {p.identity_residual:.2e}, "
          f"split residual {p.split_residual:.2e}")

    xs = np.geomspace(1e3, 1e7, 5)
    for which in ("eq1.7", "eq2.2"):
        worst = max(r.relative for r in identity_residuals(which, xs, sieve))
        print(f"{which}: max relative residual {worst:.2e}")
    for which in ("eq6.1", "eq7.2", "eq6.8"):
        r = identity_residuals(which, [1e6], sieve)[0]
        print(f"{which} at 1e6: residual {r.residual:.3e}, tail bound {r.tail_bound:.3e}, "
              f"exact-between residual {r.truncated_residual:.1e}")


if __name__ == "__main__":
    main()
