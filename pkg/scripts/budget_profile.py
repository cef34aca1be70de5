#!/usr/bin/env python3
"""Show how the exponential sample-budget allocation spends n across the
integer lattice: per-shell totals, the cutoff radius, and the normalizer."""
import argparse
import math

from freudgrid.assembler import allocate_budget


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10000)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--delta", type=float, default=0.125)
    ap.add_argument("--lam", type=float, default=2.0)
    ap.add_argument("--a", type=float, default=0.5)
    args = ap.parse_args()

    alloc = allocate_budget(args.n, args.alpha, args.delta, args.lam, args.a,
                            args.dim)
    print(f"m_n = {alloc.m_n:.3f}   rho = {alloc.rho:.5f}   "
          f"cells = {len(alloc.cells)}   total = {alloc.total()} <= {args.n}")
    shells = {}
    for k, v in alloc.cells.items():
        s = int(round(math.sqrt(sum(ki * ki for ki in k))))
        tot, cnt = shells.get(s, (0, 0))
        shells[s] = (tot + v, cnt + 1)
    for s in sorted(shells):
        tot, cnt = shells[s]
        print(f"  |k| ~ {s:2d}:  {cnt:4d} cells,  {tot:6d} samples"
              f"  ({tot / alloc.total():6.1%})")


if __name__ == "__main__":
    main()
