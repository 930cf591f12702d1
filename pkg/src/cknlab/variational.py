"""Radial Rayleigh quotients, their minimisation and the change-of-variables check.

Trial functions live on a chart coordinate ``z`` with a map to ``y = log t``:

* ``LogChart``: ``z = y``.
* ``CriticalChart``: ``y = log(R eta) - e^{-z}``, under which the logarithmic
  (critical) quotient becomes a power-weight quotient in ``z``.
* ``WeightChart``: ``z = log rho = log phi^{-1}(t)`` for a weight ``w``.

Every quotient is nevertheless computed in the original ``t`` variables; the
chart only decides where quadrature nodes go and how trials are parametrised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .constants import critical_radial_constant, omega, radial_best_constant
from .errors import DomainError, NumericError, UnsupportedError, ValidationError
from .exponents import ExponentSet
from .quadrature import adaptive_log_quad, gauss_legendre, log_integrate, panel_nodes
from .transform import InverseIntegral, _search_floor, build_profile, context_for
from .weights import Weight, classify

PANELS = 256
ORDER = 8
CUTOFF_FRACTION = 0.05


# -- charts -----------------------------------------------------------------

class LogChart:
    name = "log"

    def y(self, z):
        return np.asarray(z, dtype=float)

    def dydz(self, z):
        return np.ones_like(np.asarray(z, dtype=float))

    def z_of_y(self, y):
        return np.asarray(y, dtype=float)


@dataclass(frozen=True)
class CriticalChart:
    log_R_eta: float
    name = "critical"

    def y(self, z):
        return self.log_R_eta - np.exp(-np.asarray(z, dtype=float))

    def dydz(self, z):
        return np.exp(-np.asarray(z, dtype=float))

    def z_of_y(self, y):
        return -np.log(self.log_R_eta - np.asarray(y, dtype=float))


class WeightChart:
    """z = log phi^{-1}(t); dy/dz = H."""

    name = "weight"

    def __init__(self, ctx: InverseIntegral):
        self.ctx = ctx
        self._memo: dict = {}

    def ensure(self, z_lo: float) -> "WeightChart":
        if z_lo < float(self.ctx.log_rho(np.array(self.ctx.y_min))):
            return WeightChart(self.ctx.covering(_search_floor(self.ctx, z_lo)))
        return self

    def _mapped(self, z):
        key = (z.shape, z.tobytes())
        hit = self._memo.get(key)
        if hit is None:
            y = self.ctx.invert(z.ravel()).reshape(z.shape)
            hit = (y, np.exp(self.ctx.log_H(y)))
            if len(self._memo) > 8:
                self._memo.clear()
            self._memo[key] = hit
        return hit

    def y(self, z):
        return self._mapped(np.asarray(z, dtype=float))[0]

    def dydz(self, z):
        return self._mapped(np.asarray(z, dtype=float))[1]

    def z_of_y(self, y):
        return self.ctx.log_rho(np.asarray(y, dtype=float))


# -- trial functions --------------------------------------------------------

def smoothstep(s):
    """C^2 ramp 6s^5 - 15s^4 + 10s^3 on [0, 1] and its derivative."""
    s = np.clip(s, 0.0, 1.0)
    return s**3 * (10 - 15 * s + 6 * s * s), 30 * s * s * (1 - s) ** 2


@dataclass(frozen=True)
class RadialFunction:
    """A compactly supported profile v(z) on [z_lo, z_hi] of a chart.

    ``kind`` is ``bump`` (params = ()), ``bliss`` (params = (c, delta, kappa),
    v = (1 + e^{delta (z - c)})^{-kappa} times a C^2 cutoff) or ``grid``
    (``values`` at N+1 uniform nodes, piecewise linear, zero at both ends).
    """

    z_lo: float
    z_hi: float
    kind: str = "bump"
    params: tuple = ()
    values: tuple | None = None
    chart: object = field(default_factory=LogChart, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.z_lo) and math.isfinite(self.z_hi) and self.z_lo < self.z_hi):
            raise DomainError("support must be a finite nonempty interval")
        if self.kind not in ("bump", "bliss", "grid"):
            raise ValidationError(f"unknown trial kind {self.kind!r}")
        if self.kind == "grid":
            v = np.asarray(self.values, dtype=float)
            if v.ndim != 1 or v.size < 3:
                raise ValidationError("grid trials need at least three nodes")
            if v[0] != 0 or v[-1] != 0:
                raise ValidationError("grid trials must vanish at the support ends")
            if not np.any(v != 0):
                raise ValidationError("trial function is identically zero")
        if self.kind == "bliss":
            c, d, k = self.params
            if d == 0 or not k > 0:
                raise ValidationError("bliss trials need delta != 0 and kappa > 0")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.z_lo, self.z_hi, len(self.values))

    def shifted(self, dz: float) -> "RadialFunction":
        """v(z - dz), i.e. the support moved by dz in the chart coordinate."""
        params = self.params
        if self.kind == "bliss":
            params = (params[0] + dz,) + tuple(params[1:])
        return RadialFunction(self.z_lo + dz, self.z_hi + dz, self.kind, params, self.values, self.chart)

    def edges(self) -> np.ndarray:
        """Panel edges in z, aligned to grid cells if any."""
        if self.kind == "grid":
            return self.grid
        return np.linspace(self.z_lo, self.z_hi, PANELS + 1)

    def nodes(self):
        """Quadrature nodes in z with weights."""
        return panel_nodes(self.edges(), ORDER)

    def eval(self, z):
        """(v, dv/dz) at z (any shape)."""
        z = np.asarray(z, dtype=float)
        if self.kind == "grid":
            g = self.grid
            v = np.asarray(self.values, dtype=float)
            h = g[1] - g[0]
            k = np.clip(((z - self.z_lo) / h).astype(int), 0, v.size - 2)
            th = (z - g[k]) / h
            val = v[k] * (1 - th) + v[k + 1] * th
            der = (v[k + 1] - v[k]) / h
            inside = (z >= self.z_lo) & (z <= self.z_hi)
            return np.where(inside, val, 0.0), np.where(inside, der, 0.0)
        L = self.z_hi - self.z_lo
        s = (z - self.z_lo) / L
        if self.kind == "bump":
            x = 2 * s - 1
            inside = np.abs(x) < 1
            xs = np.where(inside, x, 0.0)
            val = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - xs * xs)), 0.0)
            der = np.where(inside, val * (-2 * xs / (1 - xs * xs) ** 2) * (2.0 / L), 0.0)
            return val, der
        c, d, k = self.params
        e = np.exp(np.clip(d * (z - c), -700, 700))
        base = (1 + e) ** (-k)
        dbase = -k * d * e / (1 + e) * base
        lo, dlo = smoothstep(s / CUTOFF_FRACTION)
        hi, dhi = smoothstep((1 - s) / CUTOFF_FRACTION)
        cut = lo * hi
        dcut = (dlo * hi - lo * dhi) / (CUTOFF_FRACTION * L)
        return base * cut, dbase * cut + base * dcut


class QuotientReport(NamedTuple):
    lhs: float
    rhs: float
    quotient: float
    reference: float
    reference_name: str
    ratio_to_reference: float
    log_lhs: float
    log_den: float


def scale(u: RadialFunction, c: float) -> RadialFunction:
    """c * u for any trial kind."""
    if u.kind == "grid":
        return RadialFunction(u.z_lo, u.z_hi, "grid", (), tuple(np.asarray(u.values) * c), u.chart)
    return _ScaledTrial(u, float(c))


class _ScaledTrial:
    """Lightweight wrapper multiplying a trial by a constant."""

    def __init__(self, base: RadialFunction, c: float):
        self.base, self.c = base, c
        self.z_lo, self.z_hi, self.kind, self.chart = base.z_lo, base.z_hi, base.kind, base.chart

    def edges(self):
        return self.base.edges()

    def nodes(self):
        return self.base.nodes()

    def eval(self, z):
        v, d = self.base.eval(z)
        return self.c * v, self.c * d


# -- integrands ---------------------------------------------------------------

def _log_abs(x):
    with np.errstate(divide="ignore"):
        return np.log(np.abs(x))


def _check_support(y_hi: float, Y: float):
    if not y_hi < Y:
        raise DomainError("trial support touches or exceeds eta")


def _log_integrals(u, exps: ExponentSet, log_A, log_B, adaptive: bool = True):
    """log of int |dv/dy|^p A dy and int |v|^q B dy, A, B given as log(y) callables.

    With ``adaptive`` the panels of ``u`` are bisected until each integral is
    resolved to 1e-12 relative; otherwise the fixed panels are used as is.
    """
    chart = u.chart
    _check_support(float(chart.y(np.array(u.z_hi))), math.log(exps.eta))
    p, q = exps.p, exps.q

    def logs(z):
        y = chart.y(z)
        logJ = np.log(chart.dydz(z))
        v, dv = u.eval(z)
        return p * (_log_abs(dv) - logJ) + log_A(y) + logJ, q * _log_abs(v) + log_B(y) + logJ

    if adaptive:
        edges = u.edges()
        L1 = adaptive_log_quad(lambda z: logs(z)[0], edges, ORDER)
        L2 = adaptive_log_quad(lambda z: logs(z)[1], edges, ORDER)
    else:
        z, wz = u.nodes()
        lg, lv = logs(z)
        L1 = float(np.logaddexp.reduce(log_integrate(lg, wz, axis=1)))
        L2 = float(np.logaddexp.reduce(log_integrate(lv, wz, axis=1)))
    if not (math.isfinite(L1) and math.isfinite(L2)):
        raise NumericError("quotient integrals are not finite")
    return L1, L2


def _report(L1, L2, exps, reference, name) -> QuotientReport:
    lw = math.log(omega(exps.n))
    log_lhs = lw + L1
    log_den = lw + L2
    log_rhs = exps.p / exps.q * log_den
    lq = log_lhs - log_rhs
    Q = math.exp(lq)
    if not (math.isfinite(Q) and Q > 0):
        raise NumericError("quotient is not finite and positive")
    with np.errstate(over="ignore"):
        lhs, rhs = float(np.exp(log_lhs)), float(np.exp(log_rhs))
    return QuotientReport(lhs, rhs, Q, reference, name, Q / reference, log_lhs, log_den)


def _noncritical_logs(exps, gamma):
    p, q = exps.p, exps.q
    return (lambda y: p * gamma * y), (lambda y: q * gamma * y)


def _critical_logs(exps):
    lre = math.log(exps.R * exps.eta)
    a = 1.0 + exps.q / exps.p_conj
    return (lambda y: np.zeros_like(y)), (lambda y: -a * np.log(lre - y))


def _weighted_logs(exps, w: Weight, ctx: InverseIntegral, u=None):
    if u is not None:
        # tabulate f over the whole support instead of integrating per node
        ctx = ctx.covering(float(u.chart.y(np.array(u.z_lo))))
    p, a = exps.p, 1.0 + exps.q / exps.p_conj
    return (
        (lambda y: (1 - p) * y + (p - 1) * w.log_w(y)),
        (lambda y: y - w.log_w(y) - a * ctx.log_f(y)),
    )


def quotient_noncritical(u, exps: ExponentSet) -> QuotientReport:
    g = exps.gamma
    if g is None or g == 0:
        raise ValidationError("the non-critical quotient needs gamma != 0")
    A, B = _noncritical_logs(exps, g)
    L1, L2 = _log_integrals(u, exps, A, B)
    return _report(L1, L2, exps, radial_best_constant(exps), "S_rad")


def quotient_critical(u, exps: ExponentSet) -> QuotientReport:
    if exps.R is None or not exps.R > 1:
        raise ValidationError("the critical quotient needs R > 1")
    A, B = _critical_logs(exps)
    L1, L2 = _log_integrals(u, exps, A, B)
    return _report(L1, L2, exps, critical_radial_constant(exps), "C_pq")


def weighted_reference(exps: ExponentSet, C0: float) -> float:
    """min(C0^p, 1) S_rad at gamma = 1/p'."""
    return min(C0**exps.p, 1.0) * radial_best_constant(exps, 1.0 / exps.p_conj)


def quotient_weighted(u, w: Weight, exps: ExponentSet, C0: float | None = None) -> QuotientReport:
    """Radial quotient of the weighted inequality; C0 is computed if not given."""
    cls = classify(w)
    ctx = context_for(w, exps, cls)
    if C0 is None:
        C0 = build_profile(w, exps).C0
    A, B = _weighted_logs(exps, w, ctx, u)
    L1, L2 = _log_integrals(u, exps, A, B)
    return _report(L1, L2, exps, weighted_reference(exps, C0), "min(C0^p,1)*S_rad(1/p')")


# -- change of variables ----------------------------------------------------

class SubstitutionReport(NamedTuple):
    lhs_original: float
    lhs_transformed: float
    rhs_original: float
    rhs_transformed: float
    lhs_rel_diff: float
    rhs_rel_diff: float


def substitution_check(u, w: Weight, exps: ExponentSet) -> SubstitutionReport:
    """Weighted integrals of u in t against those of U(rho) = u(phi(rho)) in rho.

    ``u`` must live on the log chart.  The transformed side places its own
    nodes in log rho, recovers phi by inversion and uses phi' from the closed
    forms phi' = w(phi)/rho^2 (class P) or phi' = w(phi) (class Q).
    """
    if not isinstance(u.chart, LogChart):
        raise ValidationError("substitution_check expects a trial on the log chart")
    cls = classify(w)
    ctx = context_for(w, exps, cls)
    p, q, a = exps.p, exps.q, exps.q / exps.p_conj
    ctx = ctx.covering(u.z_lo)
    A, B = _weighted_logs(exps, w, ctx)
    L1, L2 = _log_integrals(u, exps, A, B)

    zr = ctx.log_rho(np.array([u.z_lo, u.z_hi]))
    chart = WeightChart(ctx).ensure(float(zr[0]))
    edges = np.linspace(zr[0], zr[1], PANELS + 1)
    if cls.kind == "P":
        lhs_c, rhs_c = 2 * (p - 1), -1 + a
    else:
        lhs_c, rhs_c = 0.0, -1 - a

    def transformed(zz):
        y = chart.y(zz)
        v, dv = u.eval(y)
        # u'(t) = (dv/dy)/t; U'(rho) = u'(phi) phi'
        log_dphi = w.log_w(y) - (2 * zz if cls.kind == "P" else 0.0)
        log_dU = _log_abs(dv) - y + log_dphi
        # d rho = rho dz
        return p * log_dU + lhs_c * zz + zz, q * _log_abs(v) + rhs_c * zz + zz

    T1 = adaptive_log_quad(lambda zz: transformed(zz)[0], edges, ORDER)
    T2 = adaptive_log_quad(lambda zz: transformed(zz)[1], edges, ORDER)
    lw = math.log(omega(exps.n))
    vals = [lw + L1, lw + T1, p / q * (lw + L2), p / q * (lw + T2)]
    with np.errstate(over="ignore"):
        out = [float(np.exp(x)) for x in vals]
    return SubstitutionReport(
        *out,
        lhs_rel_diff=abs(math.expm1(vals[1] - vals[0])),
        rhs_rel_diff=abs(math.expm1(vals[3] - vals[2])),
    )


# -- one-dimensional even profiles ------------------------------------------

class EvenExtensionResult(NamedTuple):
    ratio: float
    expected: float
    two_sided: float
    one_sided: float


def lemma21_check(u, exps: ExponentSet) -> EvenExtensionResult:
    """Quotient over the whole line of the even extension against the half-line quotient."""
    if exps.n != 1:
        raise UnsupportedError("the even-extension check is one-dimensional (n = 1)")
    g = exps.gamma
    if g is None or g == 0:
        raise ValidationError("gamma != 0 is required")
    p, q = exps.p, exps.q
    z, wz = u.nodes()
    y = u.chart.y(z)
    J = u.chart.dydz(z)
    _check_support(float(np.max(y)), math.log(exps.eta))
    v, dv = u.eval(z)
    x = np.exp(y)
    du = dv / J / x  # du/dx on x > 0
    dx = wz * J * x  # dx = t dy
    wl = np.abs(x) ** (p * (1 + g) - 1)
    wr = np.abs(x) ** (q * g - 1)
    # half line, then both halves with x -> -x, u(-x) = u(x), u'(-x) = -u'(x)
    lhs1 = np.sum(np.abs(du) ** p * wl * dx)
    den1 = np.sum(np.abs(v) ** q * wr * dx)
    xm = -x
    lhs2 = lhs1 + np.sum(np.abs(-du) ** p * np.abs(xm) ** (p * (1 + g) - 1) * dx)
    den2 = den1 + np.sum(np.abs(v) ** q * np.abs(xm) ** (q * g - 1) * dx)
    one = lhs1 / den1 ** (p / q)
    two = lhs2 / den2 ** (p / q)
    if not (math.isfinite(one) and math.isfinite(two) and one > 0):
        raise NumericError("non-finite quotient")
    return EvenExtensionResult(two / one, 2.0 ** (1 - p / q), two, one)


# -- minimisation -----------------------------------------------------------

@dataclass
class _Problem:
    exps: ExponentSet
    chart: object
    z_lo: float
    z_hi: float
    log_A: object
    log_B: object
    ref: float
    ref_name: str
    gamma_eff: float  # power exponent of the problem seen in the chart

    def trial(self, kind, params=(), values=None):
        return RadialFunction(self.z_lo, self.z_hi, kind, params, values, self.chart)

    def quotient(self, u) -> float:
        L1, L2 = _log_integrals(u, self.exps, self.log_A, self.log_B, adaptive=False)
        lw = math.log(omega(self.exps.n))
        return math.exp(lw + L1 - self.exps.p / self.exps.q * (lw + L2))


def _problem(exps: ExponentSet, mode: str, w: Weight | None, span: float | None) -> _Problem:
    Y = math.log(exps.eta)
    pc = exps.p_conj
    if mode == "noncritical":
        g = exps.gamma
        if g is None or g == 0:
            raise ValidationError("noncritical mode needs gamma != 0")
        L = 60.0 if span is None else span
        A, B = _noncritical_logs(exps, g)
        return _Problem(exps, LogChart(), Y - 0.5 - L, Y - 0.5, A, B,
                        radial_best_constant(exps), "S_rad", g)
    if mode == "critical":
        if exps.R is None:
            raise ValidationError("critical mode needs R")
        chart = CriticalChart(math.log(exps.R * exps.eta))
        z_top = float(chart.z_of_y(Y)) - 0.05
        L = 30.0 if span is None else span
        A, B = _critical_logs(exps)
        return _Problem(exps, chart, z_top - L, z_top, A, B,
                        critical_radial_constant(exps), "C_pq", 1.0 / pc)
    if mode == "weighted":
        if w is None:
            raise ValidationError("weighted mode needs a weight")
        cls = classify(w)
        ctx = context_for(w, exps, cls)
        prof = build_profile(w, exps)
        z_top = prof.log_tilde_eta - 0.5
        L = 40.0 if span is None else span
        y_deep = _search_floor(ctx, z_top - L)
        deep = float(ctx.covering(y_deep).log_rho(np.array(y_deep)))
        L = min(L, z_top - deep - 0.5)
        chart = WeightChart(ctx).ensure(z_top - L)
        A, B = _weighted_logs(exps, w, chart.ctx)
        g_eff = 1.0 / pc if cls.kind == "P" else -1.0 / pc
        return _Problem(exps, chart, z_top - L, z_top, A, B,
                        weighted_reference(exps, prof.C0), "min(C0^p,1)*S_rad(1/p')", g_eff)
    raise ValidationError(f"unknown mode {mode!r}")


class _Tracker:
    def __init__(self, budget):
        self.budget = budget
        self.used = 0
        self.best = math.inf
        self.best_u = None

    def record(self, q, make_u):
        self.used += 1
        if math.isfinite(q) and q < self.best:
            self.best = q
            self.best_u = make_u()


class _Exhausted(Exception):
    pass


def _bliss_start(prob: _Problem):
    p, q = prob.exps.p, prob.exps.q
    g = prob.gamma_eff
    if q > p:
        d, k = g * (q - p) / (p - 1), p / (q - p)
    else:
        d, k = g, 1.0
    c = 0.5 * (prob.z_lo + prob.z_hi)
    return np.array([c, math.log(abs(d)), math.log(k)]), math.copysign(1.0, g)


NM_EVALS = 600
NM_RESTARTS = 3


def _nelder_mead(prob: _Problem, tr: _Tracker, seed: int):
    x0, sgn = _bliss_start(prob)

    def make(x):
        return prob.trial("bliss", (float(x[0]), sgn * math.exp(x[1]), math.exp(x[2])))

    def f(x):
        if tr.used >= tr.budget:
            raise _Exhausted
        try:
            val = prob.quotient(make(x))
        except (NumericError, ValidationError, FloatingPointError, OverflowError):
            val = math.inf
        tr.record(val, lambda: make(x))
        return val if math.isfinite(val) else 1e300

    rng = np.random.default_rng(seed)
    starts = [x0] + [x0 + rng.normal(0, [2.0, 0.3, 0.3]) for _ in range(NM_RESTARTS - 1)]
    best_x, best_f = x0, math.inf
    per = NM_EVALS // NM_RESTARTS
    for s in starts:
        try:
            res = minimize(f, s, method="Nelder-Mead",
                           options={"maxfev": per, "xatol": 1e-10, "fatol": 1e-14})
        except _Exhausted:
            break
        if res.fun < best_f:  # lowest quotient wins, ties keep the earlier start
            best_x, best_f = res.x, res.fun
    return make(best_x)


class GridObjective:
    """log-quotient of a piecewise-linear trial and its gradient in the nodal values."""

    def __init__(self, prob: _Problem, cells: int):
        self.prob = prob
        self.cells = cells
        edges = np.linspace(prob.z_lo, prob.z_hi, cells + 1)
        self.h = edges[1] - edges[0]
        z, wz = panel_nodes(edges, ORDER)
        gx, _ = gauss_legendre(ORDER)
        self.theta = 0.5 * (gx + 1.0)
        y = prob.chart.y(z)
        logJ = np.log(prob.chart.dydz(z))
        p, q = prob.exps.p, prob.exps.q
        _check_support(float(np.max(y)), math.log(prob.exps.eta))
        la = np.log(wz) + prob.log_A(y) + (1 - p) * logJ
        lb = np.log(wz) + prob.log_B(y) + logJ
        self.shift_a = float(np.max(la))
        self.shift_b = float(np.max(lb))
        self.Wa = np.exp(np.logaddexp.reduce(la - self.shift_a, axis=1))
        self.Wb = np.exp(lb - self.shift_b)
        self.log_omega = math.log(omega(prob.exps.n))
        self.edges = edges

    def full(self, x):
        return np.concatenate([[0.0], x, [0.0]])

    def __call__(self, x, smooth: bool = True):
        p, q = self.prob.exps.p, self.prob.exps.q
        v = self.full(x)
        s = np.diff(v) / self.h
        eps2 = (1e-8 * np.max(np.abs(s))) ** 2 if smooth else 0.0
        s2 = s * s + eps2
        e = s2 ** (p / 2)
        lhs = float(np.sum(e * self.Wa))
        vn = v[:-1, None] * (1 - self.theta) + v[1:, None] * self.theta
        av = np.abs(vn)
        den = float(np.sum(av**q * self.Wb))
        if not (lhs > 0 and den > 0):
            return math.inf, np.zeros_like(x)
        val = (self.log_omega + math.log(lhs) + self.shift_a
               - p / q * (self.log_omega + math.log(den) + self.shift_b))
        # d lhs / d v via the cell slopes
        ds = p * s2 ** (p / 2 - 1) * s * self.Wa / self.h
        g_lhs = np.zeros_like(v)
        g_lhs[:-1] -= ds
        g_lhs[1:] += ds
        dv = q * av ** (q - 1) * np.sign(vn) * self.Wb
        g_den = np.zeros_like(v)
        g_den[:-1] += np.sum(dv * (1 - self.theta), axis=1)
        g_den[1:] += np.sum(dv * self.theta, axis=1)
        grad = g_lhs / lhs - p / q * g_den / den
        return val, grad[1:-1]


def _grid_stage(prob: _Problem, seed_u, tr: _Tracker, cells: int):
    obj = GridObjective(prob, cells)
    zn = obj.edges
    v0, _ = seed_u.eval(zn)
    x0 = v0[1:-1] / np.max(np.abs(v0))

    def make(x):
        return prob.trial("grid", values=tuple(obj.full(x)))

    def f(x):
        if tr.used >= tr.budget:
            raise _Exhausted
        val, grad = obj(x)
        exact, _ = obj(x, smooth=False)
        tr.record(math.exp(exact) if math.isfinite(exact) else math.inf, lambda: make(x.copy()))
        return val, grad

    remaining = tr.budget - tr.used
    if remaining <= 0:
        return
    try:
        minimize(f, x0, jac=True, method="L-BFGS-B",
                 options={"maxfun": remaining, "maxiter": remaining, "ftol": 1e-15, "gtol": 1e-12,
                          "maxcor": 30})
    except _Exhausted:
        pass


class MinimizeResult(NamedTuple):
    best_u: object
    best_quotient: float
    reference: float
    reference_name: str
    evaluations: int


def minimize_radial(exps: ExponentSet, mode: str = "noncritical", w: Weight | None = None,
                    budget: int = 10_000, seed: int = 0, span: float | None = None,
                    cells: int | None = None) -> MinimizeResult:
    """Upper-bound estimate of the radial infimum: bliss-family Nelder-Mead, then grid descent."""
    if budget < 1000:
        raise ValidationError("budget must be at least 1000 evaluations")
    prob = _problem(exps, mode, w, span)
    tr = _Tracker(budget)
    seed_u = _nelder_mead(prob, tr, seed)
    if cells is None:
        cells = int(round(10 * (prob.z_hi - prob.z_lo)))
    _grid_stage(prob, seed_u, tr, cells)
    if tr.best_u is None:
        raise NumericError("no trial produced a finite quotient")
    return MinimizeResult(tr.best_u, tr.best, prob.ref, prob.ref_name, tr.used)


def make_bump(t_lo: float, t_hi: float) -> RadialFunction:
    """Smooth bump in log t supported on [t_lo, t_hi]."""
    if not 0 < t_lo < t_hi:
        raise DomainError("need 0 < t_lo < t_hi")
    return RadialFunction(math.log(t_lo), math.log(t_hi), "bump")
