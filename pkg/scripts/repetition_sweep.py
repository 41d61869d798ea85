"""Searched cheating probability against k parallel swap-test rounds."""
import argparse
import time

from qcommit.instances import gen_qcd, ideal_qcd
from qcommit.schemes import qcd_advice, repetition_cheat


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--kmax", type=int, default=3, choices=(1, 2, 3))
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--generated", action="store_true",
                   help="use a seeded one-qubit instance with a discarded ancilla")
    p.add_argument("--mu", type=float, default=1e-6)
    args = p.parse_args()
    inst = gen_qcd("Y", 1, seed=0, discards=True, mu=args.mu) if args.generated else ideal_qcd(args.mu)
    adv = qcd_advice(inst)
    print(f"{'k':>2} {'searched':>10} {'ideal':>10} {'bound':>10} {'gap':>9} {'sec':>6}")
    for k in range(1, args.kmax + 1):
        t = time.perf_counter()
        rep, attack = repetition_cheat(inst, k, adv, restarts=args.restarts)
        print(f"{k:2d} {rep.average:10.6f} {rep.extra['ideal_bound']:10.6f} "
              f"{rep.analytic_bound:10.6f} {attack.marginal_gap():9.1e} {time.perf_counter() - t:6.1f}")


if __name__ == "__main__":
    main()
