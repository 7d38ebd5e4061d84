"""Berry-Esseen check: sup over the lattice of the tail gap between the exact
law and Poisson(t_s), next to the bound pi C / sqrt(t_s).

    python scripts/berry_esseen_table.py --s 1.5 1.3 1.1 1.05
"""

import argparse

from modpoisson.analytics import berry_esseen_bound
from modpoisson.oracle import pmf_exact, poisson_tail_gap
from modpoisson.series import mod_poisson_params


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--domain", default="riemann")
    p.add_argument("--stat", nargs="+", default=["omega", "Omega"])
    p.add_argument("--s", type=float, nargs="+", default=[1.5, 1.3, 1.1, 1.05])
    p.add_argument("--cutoff", type=int, default=10**7)
    args = p.parse_args()

    print(f"{'stat':>6} {'s':>6} {'t_s':>8} {'sup gap':>9} {'at k':>5} {'model err':>10} {'bound':>8}")
    for stat in args.stat:
        for s in args.s:
            t = mod_poisson_params(args.domain, stat, s).t_s.estimate
            pmf = pmf_exact(args.domain, stat, s, 80, args.cutoff, tail="poisson")
            gap, k = poisson_tail_gap(pmf, t)
            bound = berry_esseen_bound(args.domain, stat, s)
            print(f"{stat:>6} {s:6.3f} {t:8.4f} {gap:9.5f} {k:5d} {pmf.model_error:10.2e} {bound:8.4f}")


if __name__ == "__main__":
    main()
