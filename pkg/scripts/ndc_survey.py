"""Tabulate class, C0 and the degeneracy verdict for a set of weights."""

import argparse

from cknlab.exponents import ExponentSet
from cknlab.transform import build_profile, ndc_check
from cknlab.weights import parse_weight

DEFAULT = [
    "power:alpha=2",
    "power:alpha=1",
    "power:alpha=0.5",
    "expinv:sign=-,alpha=1",
    "expinv:sign=+,alpha=1",
    "powerexp:alpha=1,sign=-",
    "example33:kind=P",
    "example33:kind=Q",
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("weights", nargs="*", default=DEFAULT)
    ap.add_argument("--eta", type=float, default=2.0)
    ap.add_argument("--mu", type=float, default=1.0)
    args = ap.parse_args()
    exps = ExponentSet(n=3, p=2, q=4, mu=args.mu, eta=args.eta)
    print(f"{'weight':28s} class {'C0':>12s} {'slope':>8s} verdict")
    for spec in args.weights:
        w = parse_weight(spec, args.eta)
        prof = build_profile(w, exps.with_(eta=w.eta))
        res = ndc_check(prof)
        print(f"{spec:28s} {prof.weight_class.kind:5s} {res.C0:12.6g} {res.tail_slope:8.4f} {res.verdict}")


if __name__ == "__main__":
    main()
