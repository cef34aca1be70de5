#!/usr/bin/env python3
"""Lower-bound witness: build the fooling function against the interpolation
node sets and report ||h||_{L_q,w} * n^rate, which should stay bounded above
and below as n grows if the rate exponent is sharp."""
import argparse
import math

import numpy as np

from freudgrid.interp1d import DyadicFamily, dyadic_degree
from freudgrid.orthopoly import build_recurrence
from freudgrid.sparsegrid import fooling_function
from freudgrid.weights import WeightSpec, rate_exponents


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=int, default=2)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--q", type=float, default=2.0)
    ap.add_argument("--ns", type=int, nargs="+",
                    default=[64, 128, 256, 512])
    args = ap.parse_args()

    spec = WeightSpec.hermite()
    exps = rate_exponents(spec.lam, args.p, args.q, args.r)
    kmax = int(math.floor(math.log2(max(args.ns))))
    family = DyadicFamily(build_recurrence(spec, dyadic_degree(kmax) + 4),
                          rho=0.9)
    print(f"rate exponent r_lpq = {exps.r_lpq:.4f}")
    for n in sorted(args.ns):
        k = int(math.floor(math.log2(n)))
        nodes = family.rule(k).nodes.reshape(-1, 1)
        h = fooling_function(spec, nodes, r=args.r, p=args.p)
        norm = h.weighted_norm(args.q)
        residual = float(np.max(np.abs(h(nodes))))
        print(f"n={n:5d}  M={h.M_n:5d}  cell={h.cell}  "
              f"norm*rate {norm * n ** exps.r_lpq:.4e}  "
              f"on-node residual {residual:.1e}")


if __name__ == "__main__":
    main()
