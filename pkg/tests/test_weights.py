import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cknlab.errors import ConstructionError, DomainError, InvalidWeightError, ValidationError
from cknlab.weights import (
    EXAMPLE33_T_FLOOR,
    Family,
    _z1,
    _z_envelope,
    classify,
    doubling_profile,
    example33_tail,
    expinv,
    from_table,
    load_table,
    make_example33,
    order_detect,
    parse_weight,
    power,
    powerexp,
)


@pytest.mark.parametrize(
    "w, kind",
    [
        (power(2.0), "P"),
        (power(1.0), "P"),
        (power(0.5), "Q"),
        (power(0.0), "Q"),
        (power(-1.0), "Q"),
        (expinv(-1), "P"),
        (expinv(1), "Q"),
        (powerexp(1.0, -1), "P"),
        (powerexp(0.0, 1), "Q"),
    ],
)
def test_classify_closed_forms(w, kind):
    assert classify(w).kind == kind


@pytest.mark.parametrize("alpha, kind", [(2.0, "P"), (1.0, "P"), (0.5, "Q"), (-0.5, "Q")])
def test_classify_tables_agree_with_closed_forms(alpha, kind):
    t = np.geomspace(1e-30, 1.0, 400)
    cls = classify(from_table(t, t**alpha))
    assert cls.kind == kind
    assert cls.confidence == "heuristic"


@pytest.mark.parametrize("w", [power(1.5), expinv(-1, 2.0), powerexp(0.5, 1), make_example33("P"),
                               make_example33("Q")])
def test_log_derivative_matches_finite_difference(w):
    y = np.linspace(math.log(max(w.t_floor, 1e-3)) + 0.01, math.log(w.eta) - 0.01, 97)
    h = 1e-7
    fd = (w.log_w(y + h) - w.log_w(y - h)) / (2 * h)
    assert np.allclose(w.dlog_w(y), fd, rtol=1e-4, atol=1e-5)


@pytest.mark.parametrize("kind", ["P", "Q"])
def test_example33_interpolant_nodes_and_envelope(kind):
    eta = 2.0
    k = np.arange(2, 400, dtype=float)
    z1, _ = _z1(1.0 / k, kind, eta)
    z, _ = _z_envelope(1.0 / k, kind, eta)
    even = k % 2 == 0
    assert np.allclose(z1[even], z[even], rtol=1e-13)
    assert np.allclose(z1[~even], 1.0, rtol=1e-13)
    t = np.geomspace(1e-4, 1.0, 20001)
    z1, _ = _z1(t, kind, eta)
    z, _ = _z_envelope(t, kind, eta)
    lo, hi = (z, 1.0) if kind == "P" else (1.0, z)
    assert np.all(z1 >= lo * (1 - 1e-12)) and np.all(z1 <= hi * (1 + 1e-12))


def test_example33_is_c1_across_nodes():
    for k in (3.0, 4.0, 17.0, 50.0):
        t = 1.0 / k
        _, d_lo = _z1(t * (1 - 1e-12), "P", 2.0)
        _, d_hi = _z1(t * (1 + 1e-12), "P", 2.0)
        # a slope jump would be of order the inverse cell width, about k^2
        assert d_lo == pytest.approx(d_hi, rel=1e-6, abs=1e-6)


def test_example33_needs_eta_above_one():
    with pytest.raises(DomainError):
        make_example33("P", eta=1.0)
    with pytest.raises(ValidationError):
        make_example33("X")


@pytest.mark.parametrize("kind", ["P", "Q"])
def test_example33_doubling_fails_along_even_nodes(kind):
    w = make_example33(kind)
    ms = np.arange(3, 32, 2)
    t = 1.0 / (2 * ms)
    samples = doubling_profile(w, t)
    inv = np.array([s.inverse for s in samples])  # w(t_2m)/w(t_m)
    z2, _ = _z_envelope(t, kind, w.eta)
    if kind == "P":  # w = t z1
        expected = z2 / 2
    else:  # w = t z^2 z1
        zm, _ = _z_envelope(2 * t, kind, w.eta)
        expected = z2**3 / (2 * zm**2)
    assert np.allclose(inv, expected, rtol=1e-12)
    if kind == "P":
        assert np.all(np.diff(inv) < 0)
    else:
        assert np.all(np.diff(inv) > 0)


def test_example33_tail_cell_average_matches_brute_force():
    from scipy.integrate import quad

    from cknlab.quadrature import composite_nodes
    from cknlab.weights import _cell_average, _log_e_eta

    w = make_example33("Q")
    tf = EXAMPLE33_T_FLOOR
    a = tf / 4
    # every node cell [1/(k+1), 1/k] gets its own Gauss panel
    k = np.arange(int(round(1 / a)), int(round(1 / tf)) - 1, -1, dtype=float)
    t, wt = composite_nodes(1.0 / k)
    brute = float(np.sum(wt / w(t)))
    Za, Zf = _log_e_eta(a, w.eta), _log_e_eta(tf, w.eta)
    averaged, _ = quad(lambda Z: _cell_average(Z) / Z**2, Zf, Za, epsrel=1e-12)
    assert averaged == pytest.approx(brute, rel=1e-4)
    assert example33_tail(w) > averaged
    with pytest.raises(ValidationError):
        example33_tail(make_example33("P"))


def test_order_detection():
    assert order_detect(expinv(-1)).verdict == "infinite-order-vanish"
    assert order_detect(expinv(1)).verdict == "infinite-order-blowup"
    rep = order_detect(power(2.0))
    assert rep.verdict in ("finite-order", "inconclusive") and rep.witnesses == ()


def test_invalid_table_samples():
    with pytest.raises(InvalidWeightError):
        from_table([1, 2, 3, 4], [1, 0, 1, 1])
    with pytest.raises(DomainError):
        from_table([-1, 2, 3, 4], [1, 1, 1, 1])


def test_load_table_roundtrip(tmp_path):
    t = np.geomspace(1e-20, 1.0, 200)
    path = tmp_path / "w.csv"
    path.write_text("t,w\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(t, t**2)))
    w = load_table(path)
    assert w.family is Family.TABLE
    y = np.log(np.geomspace(1e-15, 0.5, 50))
    assert np.allclose(w.log_w(y), 2 * y, rtol=1e-10)


def test_parse_weight():
    assert parse_weight("power:alpha=2").label == "power:alpha=2"
    assert parse_weight("expinv:sign=-,alpha=1") == expinv(-1)
    assert parse_weight("powerexp:alpha=1,sign=+") == powerexp(1.0, 1)
    assert parse_weight("example33:kind=Q", eta=2.0).family is Family.EXAMPLE33_Q
    for bad in ("power", "nope:x=1", "expinv:sign=?", "power:alpha"):
        with pytest.raises(ValidationError):
            parse_weight(bad)


@given(st.floats(-3.0, 3.0), st.floats(1e-6, 0.4))
def test_power_doubling_ratio_is_constant(alpha, t):
    (s,) = doubling_profile(power(alpha), [t])
    assert s.ratio == pytest.approx(2.0**alpha, rel=1e-12)
    assert s.ratio * s.inverse == pytest.approx(1.0, rel=1e-12)
