#!/usr/bin/env python3
"""Tabulate the four divergences and their radius for a random family of states."""
import argparse

import numpy as np

from udisc import divergences as dv
from udisc.instances import random_state


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--alpha", type=float, default=1.5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    states = [random_state(args.d, seed=rng) for _ in range(args.k)]
    print(f"{'kind':<11} {'D(1||2)':>10} {'radius':>10} {'iters':>6} method")
    for kind in dv.DIVERGENCES:
        a = args.alpha if kind in ("sandwiched", "geometric") else None
        res = dv.radius(states, kind, a)
        d12 = dv.divergence(kind, states[0], states[1], a)
        print(f"{kind:<11} {d12:>10.6f} {res.value:>10.6f} {res.iterations:>6} {res.method}")


if __name__ == "__main__":
    main()
