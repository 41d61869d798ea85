"""Per-query trace distance between the two oracle kinds as the conditioning
event shrinks, direct computation against the closed form."""
import argparse

import numpy as np

from qcommit.oraclegame import OracleInput, PUniformSpec, per_query_gap


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--mmax", type=int, default=4)
    p.add_argument("--n", type=int, default=10_000)
    args = p.parse_args()
    inp = OracleInput(np.sqrt(0.5), np.sqrt(0.5))
    print(f"{'m':>2} {'p':>8} {'direct':>10} {'formula':>10} {'se':>8}")
    for m in range(args.mmax + 1):
        spec = PUniformSpec(args.d, m, seed=m)
        est = per_query_gap(spec, inp, args.n)
        print(f"{m:2d} {spec.p:8.4f} {est.mean:10.6f} {est.extra['formula']:10.6f} {est.std_error:8.4f}")


if __name__ == "__main__":
    main()
