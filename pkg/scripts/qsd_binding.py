"""Sweep the angle of the pure-output QSD pair and compare the constructed
cheat with the optimum ½(1 + F) and with the shared-marginal search."""
import argparse

import numpy as np

from qcommit.instances import qsd_pure_pair
from qcommit.schemes import qsd_optimal_cheat, qsd_searched_cheat


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--points", type=int, default=9)
    p.add_argument("--restarts", type=int, default=8)
    args = p.parse_args()
    print(f"{'theta':>8} {'optimum':>10} {'uhlmann':>10} {'search':>10}")
    for theta in np.linspace(0, np.pi / 2, args.points):
        inst = qsd_pure_pair(theta)
        opt = qsd_optimal_cheat(inst)
        found = qsd_searched_cheat(inst, restarts=args.restarts)
        print(f"{theta:8.4f} {opt.extra['optimum']:10.6f} {opt.average:10.6f} {found.average:10.6f}")


if __name__ == "__main__":
    main()
