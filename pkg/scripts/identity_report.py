#!/usr/bin/env python3
"""Print the exact-identity report for the quartic exponential weight:
string equation, derivative recurrence, normalization limit, and the band
structure of the differentiated orthonormal family."""
import argparse

from freudgrid.spectral import build_spectral_table, derivative_recurrence_check
from freudgrid.weights import WeightSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mmax", type=int, default=40)
    ap.add_argument("--weight", choices=["quartic", "hermite"],
                    default="quartic")
    args = ap.parse_args()

    spec = (WeightSpec.quartic() if args.weight == "quartic"
            else WeightSpec.hermite())
    table = build_spectral_table(spec, args.mmax + 10)
    report = derivative_recurrence_check(table, range(3, args.mmax + 1))
    for row in report:
        tol = f"{row['tol']:.0e}" if row["tol"] is not None else "  --"
        flag = "ok" if row["passed"] else "FAIL"
        print(f"{row['identity']:>24s}  residual {row['max_residual']:.3e}"
              f"  tol {tol}  [{flag}]")


if __name__ == "__main__":
    main()
