"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line that is echoed in the terminal summary.
"""

import json
import math
import time

import numpy as np
import pytest

from cknlab.cli import run
from cknlab.constants import compute_constants, critical_radial_constant, hardy_constant, radial_best_constant
from cknlab.exponents import ExponentSet
from cknlab.transform import H_limit_rate, build_profile, ndc_check
from cknlab.variational import lemma21_check, make_bump, minimize_radial, substitution_check
from cknlab.weights import classify, doubling_profile, expinv, make_example33, power


@pytest.fixture(autouse=True)
def cold_cache():
    # runtimes are measured without tables cached by earlier tests
    from cknlab import transform

    transform._CTX_CACHE.clear()


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


@pytest.mark.parametrize("p, g", [(2.0, 0.5), (2.0, -0.5), (3.0, 1 / 3), (3.0, -1 / 3)])
def test_constant_H_for_power_weights(criterion, p, g):
    pc = p / (p - 1)
    with Clock() as c:
        w = power(pc * g + 1)
        # for class P the additive constant that makes f a pure power
        mu = 1 / (pc * g) if g > 0 else 1.0
        exps = ExponentSet(n=3, p=p, q=p, gamma=g, mu=mu)
        prof = build_profile(w, exps)
        err = float(np.max(np.abs(prof.H - 1 / (pc * abs(g)))))
    ok = err <= 1e-6 and c.elapsed < 1.0
    criterion(1, f"constant H p={p:g} gamma={g:+.4g}", ok, f"err={err:.2e} t={c.elapsed:.2f}s")
    assert ok


def test_decay_rate_for_exponential_weights(criterion):
    exps = ExponentSet(n=3, p=2, q=3)
    with Clock() as c:
        rates = {a: H_limit_rate(expinv(-1, a), exps, a, t_end=1e-3) for a in (1.0, 2.0)}
    errs = {a: abs(r * a - 1.0) for a, r in rates.items()}
    ok = max(errs.values()) <= 0.05 and c.elapsed < 5.0
    criterion(2, "H(phi^-1(t))/t^alpha -> 1/alpha", ok,
              " ".join(f"a={a:g}:{r:.6f}" for a, r in rates.items()) + f" t={c.elapsed:.2f}s")
    assert ok


@pytest.mark.parametrize("q", [4.0, 3.0])
def test_radial_best_constant(criterion, q):
    exps = ExponentSet(n=3, p=2, q=q, gamma=0.5)
    F = radial_best_constant(exps)
    with Clock() as c:
        res = minimize_radial(exps, "noncritical", budget=10_000, seed=0)
    ratio = res.best_quotient / F
    ok = F <= res.best_quotient <= 1.02 * F and c.elapsed < 60.0
    criterion(3, f"radial constant (3,2,{q:g},1/2)", ok, f"ratio={ratio:.10f} t={c.elapsed:.1f}s")
    assert ok


def test_critical_constant(criterion):
    exps = ExponentSet(n=3, p=2, q=4, R=2.0)
    C = compute_constants(exps).C_pq
    with Clock() as c:
        res = minimize_radial(exps, "critical", budget=10_000, seed=0)
    refs = {critical_radial_constant(exps.with_(R=R)) for R in (2.0, 5.0)}
    ratio = res.best_quotient / C
    ok = C <= res.best_quotient <= 1.02 * C and len(refs) == 1 and res.reference == C and c.elapsed < 60.0
    criterion(4, "critical constant (3,2,4,R=2)", ok, f"ratio={ratio:.8f} refs={len(refs)} t={c.elapsed:.1f}s")
    assert ok


def test_weighted_hardy_case(criterion):
    exps = ExponentSet(n=3, p=2, q=2, mu=1.0)
    ref = hardy_constant(2.0)
    with Clock() as c:
        res = minimize_radial(exps, "weighted", expinv(-1), budget=10_000, seed=0)
    ratio = res.best_quotient / ref
    ok = ref <= res.best_quotient <= 1.05 * ref and c.elapsed < 60.0
    criterion(5, "weighted Hardy p=q=2, exp(-1/t)", ok, f"ratio={ratio:.6f} t={c.elapsed:.1f}s")
    assert ok


def test_substitution_identity(criterion):
    rng = np.random.default_rng(20240601)
    weights = [power(2.0), power(1.0), power(0.0), expinv(-1), expinv(1)]
    exps = ExponentSet(n=3, p=2, q=3, mu=1.0)
    worst = 0.0
    with Clock() as c:
        for _ in range(20):
            lo = math.exp(rng.uniform(math.log(1e-4), math.log(0.5)))
            hi = min(lo * math.exp(rng.uniform(0.2, 4.0)), 0.95)
            u = make_bump(lo, hi)
            for w in weights:
                r = substitution_check(u, w, exps)
                worst = max(worst, r.lhs_rel_diff, r.rhs_rel_diff)
    ok = worst <= 1e-6 and c.elapsed < 30.0
    criterion(6, "substitution identity 20 bumps x 5 weights", ok, f"worst={worst:.2e} t={c.elapsed:.1f}s")
    assert ok


def test_chain_identity(criterion):
    rng = np.random.default_rng(7)
    worst = 0.0
    with Clock() as c:
        for _ in range(100):
            n = int(rng.integers(1, 9))
            p = float(rng.uniform(1.1, 6.0))
            tau = float(rng.uniform(0.0, min(1 / n, 1 / p) * 0.999))
            q = max(p, 1 / (1 / p - tau))
            exps = ExponentSet(n=n, p=p, q=q)
            C = compute_constants(exps).C_pq
            S = radial_best_constant(exps, 1 / exps.p_conj)
            worst = max(worst, abs(S - C) / C)
    ok = worst <= 1e-12 and c.elapsed < 1.0
    criterion(7, "S_rad(1/p') = C_pq over 100 exponent sets", ok, f"worst={worst:.2e} t={c.elapsed:.2f}s")
    assert ok


def test_even_extension(criterion):
    rng = np.random.default_rng(11)
    worst = 0.0
    with Clock() as c:
        for p, q in [(2.0, 4.0), (2.0, 2.0), (3.0, 3.0)]:
            for _ in range(10):
                lo = math.exp(rng.uniform(math.log(1e-3), math.log(0.4)))
                u = make_bump(lo, min(0.95, lo * math.exp(rng.uniform(0.3, 3.0))))
                g = float(rng.uniform(0.1, 1.0)) * rng.choice([-1, 1])
                r = lemma21_check(u, ExponentSet(n=1, p=p, q=q, gamma=g))
                worst = max(worst, abs(r.ratio / r.expected - 1))
    ok = worst <= 1e-10 and c.elapsed < 5.0
    criterion(8, "even extension ratio 2^(1-p/q)", ok, f"worst={worst:.2e} t={c.elapsed:.2f}s")
    assert ok


def test_failure_demonstration(criterion):
    base = ["--n", "3", "--p", "2", "--q", "3", "--mu", "1", "--j-max", "64"]
    with Clock() as c:
        code, text = run(["degenerate-demo", "--weight", "expinv:sign=-,alpha=1"] + base)
        code_neg, _ = run(["degenerate-demo", "--weight", "power:alpha=2"] + base)
    res = json.loads(text)["result"] if code == 0 else {}
    crossed = res.get("threshold_crossed_at_j")
    ok = (code == 0 and crossed is not None and crossed <= 64 and res["lhs_within_bound"]
          and code_neg == 4 and c.elapsed < 120.0)
    criterion(9, "failure sequence for exp(-1/t), refusal for t^2", ok,
              f"crossed_at={crossed} t2_exit={code_neg} t={c.elapsed:.1f}s")
    assert ok


def test_example33_weights(criterion):
    ms = np.arange(1, 32, 2)
    with Clock() as c:
        wP, wQ = make_example33("P"), make_example33("Q")
        kinds = (classify(wP).kind, classify(wQ).kind)
        # w(t_2m) / w(t_m), the orientation tabulated for even nodes t_2m = 1/(2m)
        dP = np.array([s.inverse for s in doubling_profile(wP, 1 / (2 * ms))])
        dQ = np.array([s.inverse for s in doubling_profile(wQ, 1 / (2 * ms))])
        exps = ExponentSet(n=3, p=2, q=4, mu=1.0, eta=wP.eta)
        C0P = ndc_check(build_profile(wP, exps)).C0
        C0Q = ndc_check(build_profile(wQ, exps)).C0
    ok = (kinds == ("P", "Q") and np.all(np.diff(dP) < 0) and dP[-1] < dP[0] / 2
          and np.all(np.diff(dQ) > 0) and C0P >= 1.0 and C0Q >= 0.5 - 1e-3 and c.elapsed < 10.0)
    criterion(10, "non-doubling example weights", ok,
              f"classes={kinds} C0P={C0P:.6f} C0Q={C0Q:.6f} t={c.elapsed:.1f}s")
    assert ok
