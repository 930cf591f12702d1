"""Test sequences that break the weighted inequality once H(rho) -> 0.

U_j(rho, theta) = A_j(rho) B_j(theta) with a zonal angular factor
``B = theta^-beta`` that is in L^p but not L^q of the sphere.  The radial factor
A_j is a rescaled copy of a fixed bump, pushed towards rho = 0 where H is small
enough that the angular gradient no longer costs anything.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constants import omega
from .errors import ConstructionImpossible, InadmissibleExponentError, ValidationError
from .exponents import ExponentSet
from .quadrature import composite_nodes
from .transform import TransformProfile, build_profile, ndc_check
from .weights import Weight

ANGULAR_PANELS = 64
RADIAL_PANELS = 64
ORDER = 8


def beta_window(n: int, p: float, q: float) -> tuple[float, float]:
    """[(n-1)/q, (n-1)/p): B in L^p \\ L^q."""
    return (n - 1) / q, (n - 1) / p


def default_beta(n: int, p: float, q: float) -> float:
    lo, hi = beta_window(n, p, q)
    return 0.5 * (lo + hi)


def level(j: int) -> float:
    """Truncation height used at index j; B_j = min(B, level) smoothed."""
    return float(j) ** 2


@dataclass(frozen=True)
class AngularProfile:
    beta: float
    level: int
    n: int
    p: float
    q: float

    def __post_init__(self):
        if self.n < 2:
            raise InadmissibleExponentError("the angular factor needs n >= 2")
        if self.level < 1 or int(self.level) != self.level:
            raise ValidationError("level must be a positive integer")
        lo, hi = beta_window(self.n, self.p, self.q)
        if not (lo <= self.beta < hi) or self.beta <= 0:
            raise InadmissibleExponentError(
                f"beta={self.beta} outside [{lo}, {hi}); B would not separate L^p from L^q"
            )

    @property
    def height(self) -> float:
        return level(self.level)

    @property
    def theta_cut(self) -> float:
        """Polar angle where theta^-beta reaches the truncation height."""
        return self.height ** (-1.0 / self.beta)

    def values(self, theta):
        """B_j and dB_j/dtheta.

        Flat at the height below theta_j, theta^-beta above 2 theta_j and a C^1
        smoothstep blend in between.
        """
        th = np.asarray(theta, dtype=float)
        b, lam, tj = self.beta, self.height, self.theta_cut
        B = th ** (-b)
        dB = -b * th ** (-b - 1)
        s = np.clip((th - tj) / tj, 0.0, 1.0)
        h = s * s * (3 - 2 * s)
        dh = 6 * s * (1 - s) / tj
        val = lam + (B - lam) * h
        der = dB * h + (B - lam) * dh
        val = np.where(th <= tj, lam, np.where(th >= 2 * tj, B, val))
        der = np.where(th <= tj, 0.0, np.where(th >= 2 * tj, dB, der))
        return val, der

    def nodes(self):
        """Quadrature on (0, pi] with the sphere measure folded into the weights."""
        tj = self.theta_cut
        e1 = np.linspace(0.0, tj, 5)
        e2 = np.linspace(tj, 2 * tj, 17)
        if 2 * tj < math.pi:
            e3 = np.exp(np.linspace(math.log(2 * tj), math.log(math.pi), ANGULAR_PANELS + 1))
            edges = np.concatenate([e1, e2[1:], e3[1:]])
        else:
            edges = np.concatenate([e1[e1 < math.pi], [math.pi]])
        th, wt = composite_nodes(edges, ORDER)
        if self.n == 2:
            dens = np.ones_like(th)
        else:
            dens = np.sin(th) ** (self.n - 2)
        return th, wt * omega(self.n - 1) * dens


class AngularIntegrals(NamedTuple):
    Ip: float
    Iq: float
    Igrad: float


def angular_integrals(prof: AngularProfile) -> AngularIntegrals:
    th, wt = prof.nodes()
    B, dB = prof.values(th)
    return AngularIntegrals(
        float(np.sum(np.abs(B) ** prof.p * wt)),
        float(np.sum(np.abs(B) ** prof.q * wt)),
        float(np.sum(np.abs(dB) ** prof.p * wt)),
    )


def angular_limit_Ip(beta: float, n: int, p: float) -> float:
    """int |theta^-beta|^p dS, the j -> infinity value of Ip."""
    from scipy.integrate import quad

    f = lambda t: t ** (-beta * p) * (math.sin(t) ** (n - 2) if n > 2 else 1.0)
    val, _ = quad(f, 0.0, math.pi, limit=200)
    return omega(n - 1) * val


def choose_log_epsilons(profile: TransformProfile, igrad, p: float | None = None) -> np.ndarray:
    """log eps_j, where eps_j is the largest grid value rho / tilde_eta with
    sup_{rho <= eps_j tilde_eta} H^p Igrad_j <= 1.

    Logs are returned because eps_j routinely lies below double range.
    """
    p = profile.exps.p if p is None else p
    igrad = np.asarray(igrad, dtype=float)
    if np.any(~np.isfinite(igrad)) or np.any(igrad < 0):
        raise ValidationError("Igrad values must be finite and non-negative")
    # running max of H from the small end, so the gate at grid point k covers all rho below it
    Hmax = np.maximum.accumulate(profile.H)
    ratio = profile.log_rho - profile.log_tilde_eta
    out = np.empty_like(igrad)
    for i, g in enumerate(igrad):
        if g == 0:
            out[i] = 0.0
            continue
        ok = Hmax**p * g <= 1.0
        if not ok[0]:
            raise ConstructionImpossible(
                "H does not decay far enough for the angular gradient; the non-degenerate condition may hold"
            )
        out[i] = ratio[int(np.flatnonzero(ok)[-1])]
    return np.minimum(np.minimum.accumulate(out), 0.0)


def choose_epsilons(profile: TransformProfile, igrad, p: float | None = None) -> np.ndarray:
    """eps_j in (0, 1], nonincreasing in j (see :func:`choose_log_epsilons`)."""
    return np.exp(choose_log_epsilons(profile, igrad, p))


class DemoRow(NamedTuple):
    j: int
    log_eps: float
    lhs: float
    rhs: float
    quotient: float


@dataclass
class DemoResult:
    rows: list
    lhs_bound: float
    hardy_ratio: float
    trend_slope: float
    threshold_crossed_at_j: int | None
    beta: float
    weight_class: str

    @property
    def quotients(self) -> np.ndarray:
        return np.array([r.quotient for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["j", "lhs", "rhs", "quotient"])
        for r in self.rows:
            wr.writerow([r.j, f"{r.lhs:.17g}", f"{r.rhs:.17g}", f"{r.quotient:.17g}"])
        return buf.getvalue()

    def verdict(self) -> dict:
        return {
            "trend_slope": self.trend_slope,
            "threshold_crossed_at_j": self.threshold_crossed_at_j,
            "lhs_bound": self.lhs_bound,
            "lhs_within_bound": all(r.lhs <= self.lhs_bound for r in self.rows),
            "hardy_ratio": self.hardy_ratio,
            "beta": self.beta,
            "class": self.weight_class,
        }


def _bump(x, lo, hi):
    s = (x - lo) / (hi - lo)
    u = 2 * s - 1
    inside = np.abs(u) < 1
    uu = np.where(inside, u, 0.0)
    val = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - uu * uu)), 0.0)
    der = np.where(inside, val * (-2 * uu / (1 - uu * uu) ** 2) * 2 / (hi - lo), 0.0)
    return val, der


GRID_STEP = 0.05  # log-rho spacing of the gate grid
MAX_GRID = 400_000


def _deep_profile(w: Weight, exps: ExponentSet, g_max: float, grid_size: int) -> TransformProfile:
    """Profile reaching far enough down that H^p g_max <= 1 somewhere.

    The depth is found on coarse grids; the final grid is fine enough that the
    gate is not violated between grid points by more than one step of H.
    """
    span = -math.log(1e-8)
    for _ in range(12):
        prof = build_profile(w, exps, grid_size=grid_size, log_range=span)
        if prof.H[0] ** exps.p * g_max <= 1.0 or prof.floor_limited:
            break
        span *= 4.0
    span = float(prof.log_tilde_eta - prof.log_rho[0])
    n = int(min(MAX_GRID, max(grid_size, span / GRID_STEP)))
    return build_profile(w, exps, grid_size=n, log_range=span)


def demo_failure(w: Weight, exps: ExponentSet, j_max: int = 64, beta: float | None = None,
                 grid_size: int = 4096) -> DemoResult:
    n, p, q = exps.n, exps.p, exps.q
    if j_max < 2:
        raise ValidationError("j_max must be at least 2")
    base = build_profile(w, exps)
    verdict = ndc_check(base).verdict
    if verdict == "satisfied":
        raise ConstructionImpossible("H stays bounded below; no degenerate sequence exists")
    beta = default_beta(n, p, q) if beta is None else beta
    js = np.arange(1, j_max + 1)
    ang = [angular_integrals(AngularProfile(beta, int(j), n, p, q)) for j in js]
    igrad = np.array([a.Igrad for a in ang])
    prof = _deep_profile(w, exps, float(igrad.max()), grid_size)
    log_eps = choose_log_epsilons(prof, igrad, p)
    kind = prof.weight_class.kind
    pc = exps.p_conj
    te = prof.tilde_eta

    # radial factor on [tilde_eta/4, 3 tilde_eta/4], normalised to unit energy
    r, wr = composite_nodes(np.linspace(0.25 * te, 0.75 * te, RADIAL_PANELS + 1), ORDER)
    A, dA = _bump(r, 0.25 * te, 0.75 * te)
    if kind == "P":
        lw, rw = r ** (2 * (p - 1)), r ** (-1 + q / pc)
    else:
        lw, rw = np.ones_like(r), r ** (-1 - q / pc)
    energy = float(np.sum(np.abs(dA) ** p * lw * wr))
    A, dA = A / energy ** (1 / p), dA / energy ** (1 / p)
    # Hardy gate: int |A|^p r^{-p} lw <= (p')^p int |A'|^p lw = (p')^p
    K = float(np.sum(np.abs(A) ** p * r ** (-p) * lw * wr))
    hardy_ratio = K / pc**p
    if hardy_ratio > 1.0:
        raise ConstructionImpossible("the radial factor fails the Hardy gate")
    radial_q = float(np.sum(np.abs(A) ** q * rw * wr))

    Ip_inf = angular_limit_Ip(beta, n, p)
    cap = []
    for j in js:
        prof_j = AngularProfile(beta, int(j), n, p, q)
        tj = prof_j.theta_cut
        cap.append(prof_j.height**p * omega(n - 1) * min(2 * tj, math.pi) ** (n - 1) / (n - 1))
    Ip_bound = Ip_inf + max(cap)
    bound = 2 ** (p / 2) * (Ip_bound + K)

    ctx = prof.context
    rows = []
    for j, le, a in zip(js, log_eps, ang):
        ap = AngularProfile(beta, int(j), n, p, q)
        th, wt = ap.nodes()
        B, dB = ap.values(th)
        lr = le + np.log(r)
        y = ctx.invert(lr)
        H = np.exp(ctx.log_H(y))
        grad = (dA[:, None] * B[None, :]) ** 2 + (H * A / r)[:, None] ** 2 * dB[None, :] ** 2
        lhs = float(np.sum(grad ** (p / 2) * (lw * wr)[:, None] * wt[None, :]))
        rhs = (radial_q * a.Iq) ** (p / q)
        rows.append(DemoRow(int(j), float(le), lhs, rhs, lhs / rhs))

    qs = np.array([r_.quotient for r_ in rows])
    slope = float(np.polyfit(np.log(js), np.log(qs), 1)[0])
    hit = np.flatnonzero(qs <= qs[0] / 10.0)
    crossed = int(js[hit[0]]) if hit.size else None
    return DemoResult(rows, bound, hardy_ratio, slope, crossed, beta, kind)
