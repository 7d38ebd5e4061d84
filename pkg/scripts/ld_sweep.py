"""Large-deviation ratio table: exact-model tail over the estimate as s
decreases toward kappa, with and without the residue correction.

    python scripts/ld_sweep.py --stat omega --x 2
    python scripts/ld_sweep.py --stat Omega --x 1.5 --s 1.5 1.2 1.1 1.05
"""

import argparse

from modpoisson.analytics import ld_estimate
from modpoisson.oracle import pmf_exact


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--domain", default="riemann")
    p.add_argument("--stat", default="omega", choices=("omega", "Omega"))
    p.add_argument("--x", type=float, default=2.0)
    p.add_argument("--s", type=float, nargs="+", default=[1.5, 1.2, 1.1, 1.05])
    p.add_argument("--cutoff", type=int, default=10**7)
    args = p.parse_args()

    print(f"{'s':>6} {'t_s':>8} {'k':>4} {'x_eff':>7} {'psi':>8} {'oracle':>11} {'estimate':>11} {'ratio':>7} {'ratio_1':>7}")
    for s in args.s:
        est = ld_estimate(args.domain, args.stat, s, args.x, "upper_tail")
        pmf = pmf_exact(args.domain, args.stat, s, 80, args.cutoff, tail="poisson")
        truth = pmf.sf(est.k)
        print(
            f"{s:6.3f} {est.t_s:8.4f} {est.k:4d} {est.x_eff:7.4f} {est.residue_correction:8.4f} "
            f"{truth:11.4e} {est.estimate:11.4e} {truth / est.estimate:7.3f} {truth / est.uncorrected:7.3f}"
        )


if __name__ == "__main__":
    main()
