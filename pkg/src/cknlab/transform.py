"""The change of variables t = phi(rho), the degeneracy profile H and the NDC test.

All integrals of 1/w are accumulated in log space over ``y = log t``:
``int 1/w(s) ds = int exp(y - log w(e^y)) dy``.  Panels are refined until the
log-integrand varies by at most half a unit, which keeps 8-point Gauss-Legendre
at roundoff level even for ``exp(+-t^-alpha)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    DomainError,
    InconsistentClassError,
    InsufficientResolutionError,
    NumericError,
    UnsupportedError,
    ValidationError,
)
from .exponents import ExponentSet
from .quadrature import gauss_legendre, log_integrate, panel_nodes
from .weights import Family, Weight, WeightClass, classify, example33_tail, order_detect

H_MAX = 0.25
DG_MAX = 1.0
MAX_PANELS = 5_000_000
_NEGLIGIBLE = -45.0  # log of a relative contribution that no longer matters


def _log_integrand(w: Weight, y):
    return y - w.log_w(y)


def _slope(w: Weight, y):
    return 1.0 - w.dlog_w(y)


def panel_edges(w: Weight, y_lo: float, y_hi: float, h_max=H_MAX, dg_max=DG_MAX):
    """Edges on [y_lo, y_hi] such that log(t/w) moves by <= dg_max per panel."""
    # widths grow geometrically away from the top end; refinement below
    # restores accuracy wherever the integrand actually moves
    span = y_hi - y_lo
    if span <= 40 * h_max:
        edges = np.linspace(y_lo, y_hi, max(1, math.ceil(span / h_max)) + 1)
    else:
        k = math.log1p(span / (20 * h_max)) / math.log1p(0.05)
        d = 20 * h_max * np.expm1(np.linspace(0.0, math.log1p(span / (20 * h_max)), math.ceil(k) + 1))
        edges = y_hi - d[::-1]
        edges[0] = y_lo
    bp = w.breakpoints(y_lo, y_hi)
    if bp.size:
        edges = np.union1d(edges, bp)
    for _ in range(12):
        a, b = edges[:-1], edges[1:]
        ga, gb = _log_integrand(w, a), _log_integrand(w, b)
        sa, sb = np.abs(_slope(w, a)), np.abs(_slope(w, b))
        var = np.maximum(np.abs(gb - ga), np.maximum(sa, sb) * (b - a))
        if not np.all(np.isfinite(var)):
            raise NumericError("log(t/w) is not finite on the integration range")
        k = np.maximum(np.ceil(var / dg_max), 1).astype(np.int64)
        if np.all(k == 1):
            return edges
        total = int(k.sum())
        if total > MAX_PANELS:
            raise NumericError("quadrature of 1/w needs too many panels")
        idx = np.repeat(np.arange(a.size), k)
        offs = np.arange(total) - np.repeat(np.cumsum(k) - k, k)
        new = a[idx] + (b - a)[idx] * offs / k[idx]
        edges = np.append(new, y_hi)
    return edges


def _log_panels(w: Weight, edges) -> np.ndarray:
    nodes, wts = panel_nodes(edges)
    return log_integrate(_log_integrand(w, nodes), wts, axis=1)


def _log_span(w: Weight, a: float, b: float) -> float:
    if b <= a:
        return -math.inf
    lp = _log_panels(w, panel_edges(w, a, b))
    return float(np.logaddexp.reduce(lp))


def _chunk(w: Weight, y: float) -> float:
    s = abs(float(_slope(w, np.array(y))))
    return min(50.0, max(1e-300, 40.0 / max(s, 1e-300)))


def _log_up(w: Weight, y0: float, y1: float) -> float:
    """log int_{y0}^{y1} t/w dy, stopping once the rest is negligible."""
    total = -math.inf
    y = y0
    step = _chunk(w, y)
    while y < y1:
        step = min(step, y1 - y)
        total = np.logaddexp(total, _log_span(w, y, y + step))
        y += step
        step *= 2.0
        if y < y1 and float(_slope(w, np.array(y))) < 0:
            bound = math.log(y1 - y) + float(_log_integrand(w, np.array(y)))
            if bound < total + _NEGLIGIBLE:
                break
    return float(total)


def _log_down(w: Weight, y0: float, y_stop: float = -1e7) -> float:
    """log int_{-inf}^{y0} t/w dy for integrable 1/w (class Q)."""
    total = -math.inf
    y = y0
    step = _chunk(w, y)
    while True:
        total = np.logaddexp(total, _log_span(w, y - step, y))
        y -= step
        step = min(2.0 * step, _chunk(w, y) * 64)
        s = float(_slope(w, np.array(y)))
        if s > 0:
            bound = float(_log_integrand(w, np.array(y))) - math.log(s)
            if bound < total + _NEGLIGIBLE:
                return float(total)
        if y < y_stop or not math.isfinite(total):
            raise InconsistentClassError("integral of 1/w does not converge at the origin")


def _default_floor(w: Weight, Y: float) -> float:
    """Deepest y for the initial table: stop where log(t/w) has moved too far."""
    if w.t_floor > 0:
        return math.log(w.t_floor)
    g0 = float(_log_integrand(w, np.array(Y)))
    y_floor = math.log(w.t_floor) if w.t_floor > 0 else -math.inf
    y = Y
    for _ in range(80):
        nxt = y - 0.5
        if nxt < y_floor or abs(float(_log_integrand(w, np.array(nxt))) - g0) > 2e3:
            break
        y = nxt
    return max(y, y_floor) if y < Y else Y - 0.5


class InverseIntegral:
    """Cumulative integral of 1/w tabulated once on [y_min, log eta].

    ``log_F(y)`` is ``log int_t^eta 1/w`` for class P and ``log int_0^t 1/w``
    for class Q, with ``t = e^y``.
    """

    def __init__(self, w: Weight, kind: str, mu: float = 1.0, eta: float | None = None,
                 y_min: float | None = None):
        self.w = w
        self.kind = kind
        self.mu = float(mu)
        self.eta = float(w.eta if eta is None else eta)
        if self.eta > w.eta * (1 + 1e-12):
            raise DomainError("eta exceeds the weight's domain")
        self.Y = math.log(self.eta)
        self.y_min = _default_floor(w, self.Y) if y_min is None else float(y_min)
        if w.t_floor > 0:
            self.y_min = max(self.y_min, math.log(w.t_floor))
        self.edges = panel_edges(w, self.y_min, self.Y)
        lp = _log_panels(w, self.edges)
        if kind == "P":
            # C[k] = log int_{edges[k]}^{Y}
            rev = np.logaddexp.accumulate(lp[::-1])[::-1]
            self._cum = np.append(rev, -np.inf)
        else:
            if w.t_floor > 0:
                y_f = math.log(w.t_floor)
                tail = np.logaddexp(math.log(example33_tail(w)), _log_span(w, y_f, self.y_min))
            else:
                tail = _log_down(w, self.y_min)
            self.tail = tail
            self._cum = np.logaddexp.accumulate(np.concatenate([[tail], lp]))

    def covering(self, y_min: float) -> "InverseIntegral":
        """A table reaching down to y_min, with a 10% margin for later requests."""
        if y_min >= self.y_min:
            return self
        wider = getattr(self, "_wider", None)
        if wider is not None and y_min >= wider.y_min:
            return wider
        # the margin is small: for e^{1/t}-type weights the cost grows like 1/t
        y_new = y_min - 0.1 * (self.Y - y_min)
        self._wider = InverseIntegral(self.w, self.kind, self.mu, self.eta, y_new)
        return self._wider

    def log_F(self, y):
        y = np.asarray(y, dtype=float)
        shape = y.shape
        y = y.ravel()
        if np.any(y > self.Y + 1e-12):
            raise DomainError("t outside (0, eta]")
        y = np.minimum(y, self.Y)
        out = np.empty_like(y)
        inside = y >= self.y_min
        if np.any(inside):
            out[inside] = self._table(y[inside])
        if np.any(~inside) and self.w.t_floor > 0 and np.min(y) < math.log(self.w.t_floor) - 1e-12:
            raise DomainError("t below the weight's resolvable floor")
        for i in np.flatnonzero(~inside):
            if self.kind == "P":
                out[i] = np.logaddexp(_log_up(self.w, y[i], self.y_min), self._cum[0])
            else:
                out[i] = _log_down(self.w, y[i])
        return out.reshape(shape)

    def _table(self, y):
        e = self.edges
        k = np.clip(np.searchsorted(e, y, side="right") - 1, 0, e.size - 2)
        gx, gw = gauss_legendre(8)
        if self.kind == "P":
            a, b, tail = y, e[k + 1], self._cum[k + 1]
        else:
            a, b, tail = e[k], y, self._cum[k]
        half = 0.5 * (b - a)
        nodes = (0.5 * (a + b))[:, None] + half[:, None] * gx
        wts = np.abs(half)[:, None] * gw
        with np.errstate(divide="ignore"):
            part = log_integrate(_log_integrand(self.w, nodes), wts, axis=1)
        part = np.where(half > 0, part, -np.inf)
        return np.logaddexp(part, tail)

    def log_f(self, y):
        """log f_eta(e^y)."""
        lF = self.log_F(y)
        if self.kind == "P":
            return np.logaddexp(math.log(self.mu), lF)
        return lF

    def log_rho(self, y):
        """log phi^{-1}(e^y)."""
        lf = self.log_f(y)
        return -lf if self.kind == "P" else lf

    def log_H(self, y):
        y = np.asarray(y, dtype=float)
        return self.w.log_w(y) - y + self.log_f(y)

    def _edge_log_rho(self):
        er = getattr(self, "_er", None)
        if er is None:
            er = -np.logaddexp(math.log(self.mu), self._cum) if self.kind == "P" else self._cum.copy()
            self._er = er
        return er

    def invert(self, log_rho_target, tol: float = 1e-15, max_iter: int = 100):
        """y = log phi(rho): bracket on the panel edges, then safeguarded Newton.

        Uses d(log rho)/dy = 1/H.
        """
        target = np.atleast_1d(np.asarray(log_rho_target, dtype=float))
        er = self._edge_log_rho()
        if np.any(target < er[0] - 1e-13 * max(1.0, abs(er[0]))):
            raise NumericError("rho below the tabulated range; extend the table first")
        if np.any(target > er[-1] + 1e-13 * max(1.0, abs(er[-1]))):
            raise DomainError("rho above phi^{-1}(eta)")
        e = self.edges
        k = np.clip(np.searchsorted(er, target) - 1, 0, e.size - 2)
        lo, hi = e[k].copy(), e[k + 1].copy()
        # linear guess inside the panel
        span = er[k + 1] - er[k]
        frac = np.where(span > 0, (target - er[k]) / np.where(span > 0, span, 1.0), 0.5)
        y = lo + np.clip(frac, 0.0, 1.0) * (hi - lo)
        for _ in range(max_iter):
            lf = self.log_f(y)
            r = (-lf if self.kind == "P" else lf) - target
            if np.all(np.abs(r) <= 2e-16 * np.maximum(1.0, np.abs(target))):
                break
            lo = np.where(r < 0, y, lo)
            hi = np.where(r >= 0, y, hi)
            step = r * np.exp(self.w.log_w(y) - y + lf)
            y_new = y - step
            bad = ~((y_new > lo) & (y_new < hi)) | ~np.isfinite(y_new)
            y_new = np.where(bad, 0.5 * (lo + hi), y_new)
            done = np.abs(y_new - y) <= tol * np.maximum(1.0, np.abs(y))
            y = y_new
            if np.all(done | (hi - lo <= tol * np.maximum(1.0, np.abs(hi)))):
                break
        return y


def f_eta(w: Weight, cls: WeightClass, mu: float, t):
    """mu + int_t^eta 1/w (class P) or int_0^t 1/w (class Q)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0) or np.any(t > w.eta * (1 + 1e-12)):
        raise DomainError("t outside (0, eta]")
    if cls.kind == "P" and not mu > 0:
        raise DomainError("mu must be positive")
    ctx = _context(w, cls.kind, mu, w.eta)
    with np.errstate(over="ignore"):
        return np.exp(ctx.log_f(np.log(t)))


_CTX_CACHE: dict = {}


def _context(w: Weight, kind: str, mu: float, eta: float) -> InverseIntegral:
    key = (w, kind, float(mu), float(eta))
    ctx = _CTX_CACHE.get(key)
    if ctx is None:
        if len(_CTX_CACHE) > 64:
            _CTX_CACHE.clear()
        ctx = _CTX_CACHE[key] = InverseIntegral(w, kind, mu, eta)
    return ctx


def context_for(w: Weight, exps: ExponentSet, cls: WeightClass | None = None) -> InverseIntegral:
    cls = classify(w) if cls is None else cls
    return _context(w, cls.kind, exps.mu, exps.eta)


@dataclass(frozen=True)
class TransformProfile:
    log_rho: np.ndarray = field(repr=False)
    log_phi: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)
    C0: float
    tilde_eta: float
    weight_class: WeightClass
    weight: Weight
    exps: ExponentSet
    context: InverseIntegral = field(repr=False, compare=False)
    floor_limited: bool = False

    @property
    def rho_grid(self) -> np.ndarray:
        return np.exp(self.log_rho)

    @property
    def phi(self) -> np.ndarray:
        return np.exp(self.log_phi)

    @property
    def log_tilde_eta(self) -> float:
        return float(self.log_rho[-1])

    def phi_of(self, rho):
        """phi(rho) evaluated off-grid."""
        lr = np.log(np.asarray(rho, dtype=float))
        return np.exp(self.log_phi_of(lr))

    def log_phi_of(self, log_rho):
        ctx = self.context
        lr = np.asarray(log_rho, dtype=float)
        lo = float(np.min(lr))
        if lo < float(ctx.log_rho(np.array(ctx.y_min))):
            ctx = ctx.covering(_search_floor(ctx, lo))
        out = ctx.invert(lr)
        return out.reshape(lr.shape)

    def inverse(self, t):
        """phi^{-1}(t)."""
        return np.exp(self.context.log_rho(np.log(np.asarray(t, dtype=float))))

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["rho", "phi", "H"])
        for r, f, h in zip(self.rho_grid, self.phi, self.H):
            wr.writerow([_g17(r), _g17(f), _g17(h)])
        return buf.getvalue()


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _search_floor(ctx: InverseIntegral, log_rho_min: float) -> float:
    """Exponential search for y with log_rho(y) <= log_rho_min."""
    w = ctx.w
    y_floor = math.log(w.t_floor) if w.t_floor > 0 else -1e15
    gap = max(1.0, ctx.Y - ctx.y_min)
    y = ctx.y_min
    while float(ctx.log_rho(np.array(y))) > log_rho_min:
        if y <= y_floor:
            return y_floor
        gap *= 1.5
        y = max(ctx.Y - gap, y_floor)
    return y


def build_profile(w: Weight, exps: ExponentSet, grid_size: int = 4096,
                  rho_min_factor: float = 1e-8, log_range: float | None = None) -> TransformProfile:
    """Tabulate phi and H on a log-spaced rho grid ending at phi^{-1}(eta).

    The grid starts at ``rho_min_factor * tilde_eta``; ``log_range`` instead
    gives the width of the grid in log rho, for depths beyond double range.
    """
    if grid_size < 2:
        raise ValidationError("grid_size must be at least 2")
    if log_range is None:
        if not 0 < rho_min_factor < 1:
            raise ValidationError("rho_min_factor must lie in (0, 1)")
        log_range = -math.log(rho_min_factor)
    elif not log_range > 0:
        raise ValidationError("log_range must be positive")
    cls = classify(w)
    ctx = context_for(w, exps, cls)
    log_tilde = float(ctx.log_rho(np.array(ctx.Y)))
    log_lo = log_tilde - log_range
    y_lo = _search_floor(ctx, log_lo)
    ctx = ctx.covering(y_lo)
    floor_limited = False
    reach = float(ctx.log_rho(np.array(ctx.y_min)))
    if reach > log_lo:
        # the weight cannot be resolved below its floor; shorten the grid
        log_lo = reach
        floor_limited = True
    targets = np.linspace(log_lo, log_tilde, grid_size)
    y = ctx.invert(targets)
    y[-1] = ctx.Y
    if np.any(np.diff(y) <= 0):
        raise NumericError("phi is not strictly increasing on the grid")
    H = np.exp(ctx.log_H(y))
    if np.any(~np.isfinite(H)) or np.any(H <= 0):
        raise NumericError("H is not finite and positive on the grid")
    return TransformProfile(
        log_rho=targets,
        log_phi=y,
        H=H,
        C0=float(np.min(H)),
        tilde_eta=math.exp(log_tilde),
        weight_class=cls,
        weight=w,
        exps=exps,
        context=ctx,
        floor_limited=floor_limited,
    )


class NDCResult(NamedTuple):
    verdict: str
    C0: float
    tail_slope: float
    threshold: float

    @property
    def sharp(self) -> bool:
        """C0 >= 1, the hypothesis of the sharp-constant conclusion."""
        return self.C0 >= 1.0


TAIL_POINTS = 32
MIN_TAIL_POINTS = 16
SLOPE_THRESHOLD = 0.01


def tail_slope(profile: TransformProfile, points: int = TAIL_POINTS) -> float:
    """Least-squares slope of log(lower envelope of H) against log rho.

    The tail is the lowest quarter of the log-rho range, subsampled to ``points``
    nodes; the envelope is the running minimum of H taken from rho = tilde_eta
    downwards, so bounded oscillation does not register as decay.
    """
    N = profile.log_rho.size
    tail_n = N // 4
    if tail_n < MIN_TAIL_POINTS:
        raise InsufficientResolutionError(
            f"profile has {tail_n} tail points, need at least {MIN_TAIL_POINTS}"
        )
    env = np.minimum.accumulate(profile.H[::-1])[::-1]
    idx = np.unique(np.linspace(0, tail_n - 1, min(points, tail_n)).astype(int))
    x = profile.log_rho[idx]
    yv = np.log(env[idx])
    return float(np.polyfit(x, yv, 1)[0])


def ndc_check(profile: TransformProfile, threshold: float = 1e-6,
              detect_order: bool = False) -> NDCResult:
    """Verdict on inf H > 0: satisfied, degenerating or violated."""
    if not threshold > 0:
        raise ValidationError("threshold must be positive")
    slope = tail_slope(profile)
    C0 = profile.C0
    if detect_order:
        rep = order_detect(profile.weight)
        if rep.verdict.startswith("infinite"):
            return NDCResult("violated", C0, slope, threshold)
    if slope > SLOPE_THRESHOLD:
        return NDCResult("degenerating", C0, slope, threshold)
    if C0 >= threshold:
        return NDCResult("satisfied", C0, slope, threshold)
    return NDCResult("violated", C0, slope, threshold)


def ndc_json(profile: TransformProfile, result: NDCResult) -> dict:
    return {
        "class": profile.weight_class.kind,
        "C0": result.C0,
        "tilde_eta": profile.tilde_eta,
        "verdict": result.verdict,
        "threshold": result.threshold,
        "tail_slope": result.tail_slope,
        "C0_ge_1": result.sharp,
    }


def H_at_t(w: Weight, exps: ExponentSet, t) -> np.ndarray:
    """H(phi^{-1}(t)) evaluated directly from the closed forms."""
    ctx = context_for(w, exps)
    y = np.log(np.atleast_1d(np.asarray(t, dtype=float)))
    return np.exp(ctx.log_H(y))


def H_limit_rate(w: Weight, exps: ExponentSet, alpha: float | None = None,
                 t_end: float = 1e-3, levels: int = 4) -> float:
    """Extrapolated limit of H(phi^{-1}(t)) / t^alpha as t -> 0 for exp(+-t^-alpha).

    The ratio is sampled at t_end * 2^k and the leading O(t^alpha) correction is
    removed by repeated Richardson steps.
    """
    if w.family is not Family.EXPINV:
        raise UnsupportedError("H_limit_rate applies to the exp-inv family only")
    a = w.param("alpha")
    if alpha is not None and abs(alpha - a) > 1e-12:
        raise ValidationError("alpha does not match the weight's exponent")
    t = t_end * 2.0 ** np.arange(levels)[::-1]
    ctx = context_for(w, exps)
    ratios = [math.exp(float(ctx.log_H(np.array(math.log(tk)))) - a * math.log(tk)) for tk in t]
    # tableau: columns eliminate t^a, t^{2a}, ...
    col = np.array(ratios)
    for k in range(1, levels):
        f = 2.0 ** (a * k)
        col = (f * col[1:] - col[:-1]) / (f - 1.0)
    return float(col[-1])


def profile_json(profile: TransformProfile) -> dict:
    return {
        "class": profile.weight_class.kind,
        "C0": float(profile.C0),
        "tilde_eta": float(profile.tilde_eta),
        "grid_size": int(profile.log_rho.size),
        "floor_limited": bool(profile.floor_limited),
    }
