import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from cknlab.constants import (
    beta,
    compute_constants,
    constants_report,
    critical_radial_constant,
    gamma,
    hardy_constant,
    log_beta,
    log_gamma,
    omega,
    radial_best_constant,
    sharp_regime,
)
from cknlab.errors import DomainError, UndefinedConstantError, ValidationError
from cknlab.exponents import ExponentSet

mpmath.mp.dps = 40


def _oracle_S(n, p, q):
    p, q = mpmath.mpf(p), mpmath.mpf(q)
    tau = 1 / p - 1 / q
    if tau == 0:
        return mpmath.mpf(1)
    pc = p / (p - 1)
    om = 2 * mpmath.pi ** (mpmath.mpf(n) / 2) / mpmath.gamma(mpmath.mpf(n) / 2)
    inner = om / tau * mpmath.beta(1 / (p * tau), 1 / (pc * tau))
    return pc ** (p - 2 + p / q) * q ** (p / q) * inner ** (1 - p / q)


@given(st.floats(1e-3, 170.0))
def test_log_gamma_against_mpmath(x):
    assert log_gamma(x) == pytest.approx(float(mpmath.loggamma(x)), rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("k", range(0, 20))
def test_gamma_factorials(k):
    assert gamma(k + 1.0) == pytest.approx(math.factorial(k), rel=1e-14)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_log_beta_against_mpmath(a, b):
    exact = float(mpmath.log(mpmath.beta(a, b)))
    assert log_beta(a, b) == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_beta_symmetry_and_special_values():
    assert beta(0.5, 0.5) == pytest.approx(math.pi, rel=1e-14)
    assert beta(2.0, 3.0) == pytest.approx(1 / 12, rel=1e-14)
    assert beta(1.3, 4.7) == pytest.approx(beta(4.7, 1.3), rel=1e-15)


@pytest.mark.parametrize("n, area", [(1, 2.0), (2, 2 * math.pi), (3, 4 * math.pi), (4, 2 * math.pi**2)])
def test_sphere_areas(n, area):
    assert omega(n) == pytest.approx(area, rel=1e-14)


def test_reference_point():
    cs = compute_constants(ExponentSet(n=3, p=2, q=4))
    assert cs.tau == 0.25
    assert cs.gamma_pq == pytest.approx(2 / 3)
    assert cs.S_pq == pytest.approx(8.1866, rel=1e-4)
    assert cs.C_pq == pytest.approx(2.8944050182330683, rel=1e-13)
    assert cs.R_pq == pytest.approx(math.exp(0.75), rel=1e-14)
    assert compute_constants(ExponentSet(n=2, p=2, q=2)).R_pq == pytest.approx(math.e, rel=1e-15)


@given(st.integers(1, 10), st.floats(1.1, 8.0), st.floats(0.0, 1.0))
def test_S_pq_against_mpmath(n, p, frac):
    tau = frac * min(1 / n, 1 / p) * 0.999
    q = max(p, 1 / (1 / p - tau))
    e = ExponentSet(n=n, p=p, q=q)
    cs = compute_constants(e)
    exact = float(_oracle_S(n, p, q))
    assert cs.S_pq == pytest.approx(exact, rel=1e-11)
    assert cs.C_pq == pytest.approx(exact * float(mpmath.mpf(p / (p - 1)) ** (p * (tau - 1))), rel=1e-11)


def test_equal_exponents_give_unit_S():
    cs = compute_constants(ExponentSet(n=4, p=3, q=3))
    assert cs.S_pq == 1.0
    assert cs.C_pq == pytest.approx((2 / 3) ** 3, rel=1e-15)
    assert hardy_constant(3.0) == pytest.approx((2 / 3) ** 3, rel=1e-15)


def test_R_pq_needs_dimension_two():
    e = ExponentSet(n=1, p=2, q=2)
    assert compute_constants(e).R_pq is None
    with pytest.raises(UndefinedConstantError):
        compute_constants(e, need_R=True)
    with pytest.raises(UndefinedConstantError):
        compute_constants(e.with_(R=2.0))


def test_radial_constant_and_regimes():
    e = ExponentSet(n=3, p=2, q=4, gamma=0.5)
    S = compute_constants(e).S_pq
    assert radial_best_constant(e) == pytest.approx(S * 0.5 ** 1.5, rel=1e-15)
    assert radial_best_constant(e, -0.5) == radial_best_constant(e)
    assert sharp_regime(e)
    assert not sharp_regime(e.with_(gamma=1.0))
    with pytest.raises(ValidationError):
        radial_best_constant(e, 0.0)
    rep = constants_report(e)
    assert rep["S_rad_at_gamma"] == radial_best_constant(e)


def test_critical_constant_independent_of_R():
    base = ExponentSet(n=3, p=2, q=4)
    vals = {critical_radial_constant(base.with_(R=R, eta=eta)) for R in (1.5, 2.0, 10.0) for eta in (0.5, 3.0)}
    assert len(vals) == 1
    assert vals.pop() == compute_constants(base).C_pq
    with pytest.raises(DomainError):
        log_gamma(0.0)
