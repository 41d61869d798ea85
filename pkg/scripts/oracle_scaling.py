"""Cross-fitted ‖E_σ U‖_tr against the 4√(d(1 + m ln 2)) envelope, written as CSV."""
import argparse
import csv
import sys

from qcommit.oraclegame import CSV_HEADER, scaling_sweep


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--d", type=int, nargs="+", default=[2, 4, 8])
    p.add_argument("--mmax", type=int, default=4)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    w = csv.DictWriter(sys.stdout, fieldnames=CSV_HEADER, lineterminator="\n")
    w.writeheader()
    for row in scaling_sweep(args.d, range(args.mmax + 1), args.n, args.seed):
        w.writerow(row)


if __name__ == "__main__":
    main()
