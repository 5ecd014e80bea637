#!/usr/bin/env python3
"""Sweep the abstention weight for a state ensemble and print a CSV table.

Columns: eta, quantum success, classical success, their ratio, the error
exponent and its radius bound at alpha in {1.5, 2}.
"""
import argparse
import csv
import sys

import numpy as np

from udisc import stategame as sg
from udisc.cli import InputError, load_problem
from udisc.instances import random_ensemble


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--input", help="problem file of kind 'states'; random ensemble if omitted")
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--points", type=int, default=11)
    args = ap.parse_args(argv)

    if args.input:
        try:
            with open(args.input, encoding="utf-8") as fh:
                prob = load_problem(fh.read())
        except (OSError, InputError) as exc:
            sys.exit(f"input error: {exc}")
        e = sg.Ensemble(tuple(prob["matrices"]), tuple(prob["priors"]))
    else:
        e = random_ensemble(args.k, args.d, args.seed)

    bounds = {a: sg.radius_exponent_details(e, sg.GameConfig(alpha=a))["radius_states"] for a in (1.5, 2.0)}
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["eta", "p_quantum", "p_classical", "ratio", "exponent", "bound_a1.5", "bound_a2"])
    for eta in np.linspace(0, 0.9, args.points):
        p = sg.succ_prob_primal(e, sg.GameConfig(eta=eta)).success_probability
        pc = sg.classical_success(e.priors, eta)
        term = sg._additive_term(e, eta)
        row = [eta, p, pc, p / pc, sg.exponent(p)]
        row += [r - a / (a - 1) * term for a, r in bounds.items()]
        w.writerow([f"{v:.10g}" for v in row])


if __name__ == "__main__":
    main()
