import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from cknlab.quadrature import (
    adaptive_log_quad,
    composite_nodes,
    gauss_legendre,
    log_cumsum,
    log_integrate,
    panel_nodes,
    uniform_edges,
)


@pytest.mark.parametrize("order", [2, 4, 8, 16])
def test_gauss_legendre_exact_for_polynomials(order):
    x, w = gauss_legendre(order)
    for k in range(2 * order):
        exact = (1 - (-1) ** (k + 1)) / (k + 1)
        assert np.sum(w * x**k) == pytest.approx(exact, abs=1e-13)


def test_composite_matches_closed_form():
    x, w = composite_nodes(np.linspace(0.0, math.pi, 9))
    assert np.sum(w * np.sin(x)) == pytest.approx(2.0, rel=1e-14)


def test_panel_nodes_shape():
    edges = uniform_edges(0.0, 1.0, 5)
    z, w = panel_nodes(edges, 8)
    assert z.shape == w.shape == (5, 8)
    assert np.sum(w) == pytest.approx(1.0, rel=1e-14)


def test_log_integrate_handles_huge_exponents():
    x, w = composite_nodes(np.linspace(0.0, 1.0, 11))
    # int_0^1 e^{1000 + x} dx in logs
    got = float(log_integrate(1000.0 + x, w))
    assert got == pytest.approx(1000.0 + math.log(math.e - 1.0), rel=1e-14)


@given(st.lists(st.floats(-700, 700), min_size=1, max_size=40))
def test_log_cumsum_matches_direct_sum(terms):
    terms = np.array(terms)
    got = log_cumsum(terms)
    acc, direct = mpmath.mpf(0), []
    for t in terms:
        acc += mpmath.exp(t)
        direct.append(float(mpmath.log(acc)))
    assert np.allclose(got, direct, rtol=1e-12, atol=1e-12)
    assert np.all(np.diff(got) >= -1e-12)


@given(st.floats(1.0, 5000.0))
def test_adaptive_quad_on_sharp_exponential(k):
    # int_0^1 e^{k x} dx, nearly all mass in a layer of width 1/k
    got = adaptive_log_quad(lambda x: k * x, np.linspace(0.0, 1.0, 5))
    exact = k + math.log(-math.expm1(-k)) - math.log(k)
    assert got == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_adaptive_quad_ignores_empty_panels():
    f = lambda x: np.where(x < 0.5, -np.inf, 0.0)
    assert adaptive_log_quad(f, np.array([0.0, 0.5, 1.0])) == pytest.approx(math.log(0.5), rel=1e-14)
