"""Run the degenerate test sequence and write j, lhs, rhs, quotient as CSV."""

import argparse
import sys

from cknlab.counterexample import demo_failure
from cknlab.exponents import ExponentSet
from cknlab.weights import parse_weight


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--weight", default="expinv:sign=-,alpha=1")
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--q", type=float, default=3.0)
    ap.add_argument("--j-max", type=int, default=64)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    w = parse_weight(args.weight)
    res = demo_failure(w, ExponentSet(n=args.n, p=args.p, q=args.q, eta=w.eta), j_max=args.j_max)
    text = res.to_csv()
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    for k, v in res.verdict().items():
        print(f"# {k}: {v}", file=sys.stderr)


if __name__ == "__main__":
    main()
