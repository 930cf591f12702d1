"""Minimised radial quotients against the closed-form constants over a gamma sweep."""

import argparse
import time

import numpy as np

from cknlab.constants import compute_constants, sharp_regime
from cknlab.exponents import ExponentSet
from cknlab.variational import minimize_radial


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--q", type=float, default=4.0)
    ap.add_argument("--budget", type=int, default=4000)
    ap.add_argument("--points", type=int, default=6)
    args = ap.parse_args()
    base = ExponentSet(n=args.n, p=args.p, q=args.q)
    gpq = compute_constants(base).gamma_pq
    print(f"gamma_pq = {gpq:.6g}")
    print(f"{'gamma':>8s} {'quotient':>14s} {'S_rad':>14s} {'ratio':>12s} sharp  secs")
    for g in np.linspace(0.1, 2 * gpq, args.points):
        e = base.with_(gamma=float(g))
        t0 = time.perf_counter()
        res = minimize_radial(e, "noncritical", budget=args.budget)
        dt = time.perf_counter() - t0
        print(f"{g:8.4f} {res.best_quotient:14.8g} {res.reference:14.8g} "
              f"{res.best_quotient / res.reference:12.9f} {str(sharp_regime(e)):5s} {dt:5.1f}")


if __name__ == "__main__":
    main()
