"""Prime ideals of Z[i] by norm: the count rho(x), the ratio rho(x) ln x / x,
and the split / inert / ramified census.

    python scripts/landau_census.py --x 1e3 1e4 1e5 1e6 1e7
"""

import argparse
import math

import numpy as np

from modpoisson.domains import count_irreducibles
from modpoisson.primes import primes_upto


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--x", type=float, nargs="+", default=[1e3, 1e4, 1e5, 1e6, 1e7])
    args = p.parse_args()

    print(f"{'x':>10} {'rho(x)':>9} {'split':>8} {'inert':>6} {'ratio':>7}")
    for x in args.x:
        x = int(x)
        ps = primes_upto(x)
        split = 2 * int(np.count_nonzero(ps % 4 == 1))
        inert = int(np.count_nonzero((ps % 4 == 3) & (ps * ps <= x)))
        rho = count_irreducibles("gaussian_integers", x)
        assert rho == split + inert + 1
        print(f"{x:10d} {rho:9d} {split:8d} {inert:6d} {rho * math.log(x) / x:7.4f}")


if __name__ == "__main__":
    main()
