"""Closed-form best constants of the radial CKN-type inequalities."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import DomainError, UndefinedConstantError, ValidationError
from .exponents import ExponentSet

# Lanczos approximation, g = 7, nine terms
_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _series(x: float) -> float:
    """Lanczos sum for Gamma(x), x >= 1/2 (argument shifted by one inside)."""
    z = x - 1.0
    acc = _LANCZOS[0]
    for k in range(1, 9):
        acc += _LANCZOS[k] / (z + k)
    return acc


def _shift_up(x: float) -> tuple[float, float]:
    """Move x >= 1/2 using Gamma(x) = Gamma(x+1)/x; returns (x', log prefactor)."""
    log_pre = 0.0
    while x < 0.5:
        log_pre -= math.log(x)
        x += 1.0
    return x, log_pre


def log_gamma(x: float) -> float:
    if not x > 0 or not math.isfinite(x):
        raise DomainError("log_gamma needs a finite positive argument")
    if x == 1.0 or x == 2.0:
        return 0.0
    x, pre = _shift_up(x)
    t = x + _G - 0.5
    return pre + _HALF_LOG_2PI + (x - 0.5) * math.log(t) - t + math.log(_series(x))


def gamma(x: float) -> float:
    return math.exp(log_gamma(x))


def log_beta(a: float, b: float) -> float:
    """log B(a, b) with the large-argument cancellation done analytically."""
    if not (a > 0 and b > 0) or not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("beta needs finite positive arguments")
    pre = 0.0
    # B(a, b) = B(a+1, b) (a+b)/a
    while a < 0.5:
        pre += math.log(a + b) - math.log(a)
        a += 1.0
    while b < 0.5:
        pre += math.log(a + b) - math.log(b)
        b += 1.0
    c = a + b
    tc = c + _G - 0.5
    body = (
        (a - 0.5) * math.log1p(-b / tc)
        + (b - 0.5) * math.log1p(-a / tc)
        - 0.5 * math.log(tc)
        - (_G - 0.5)
        + _HALF_LOG_2PI
    )
    ser = math.log(_series(a)) + math.log(_series(b)) - math.log(_series(c))
    return pre + body + ser


def beta(a: float, b: float) -> float:
    return math.exp(log_beta(a, b))


def omega(n: int) -> float:
    """Surface area of the unit sphere in R^n (2 for n = 1)."""
    if n < 1:
        raise DomainError("dimension must be >= 1")
    return 2.0 * math.pi ** (n / 2.0) / gamma(n / 2.0)


@dataclass(frozen=True)
class ConstantSet:
    tau: float
    gamma_pq: float
    S_pq: float
    R_pq: float | None
    C_pq: float
    omega_n: float

    def as_dict(self) -> dict:
        return asdict(self)


def _S_pq(n: int, p: float, q: float) -> float:
    tau = (q - p) / (p * q)  # no cancellation for q near p
    if tau <= 0.0:
        return 1.0
    pc = p / (p - 1.0)
    r = p / q
    log_inner = math.log(omega(n)) - math.log(tau) + log_beta(1.0 / (p * tau), 1.0 / (pc * tau))
    # 1 - p/q multiplies a large log_inner when q is close to p
    return math.exp((p - 2.0 + r) * math.log(pc) + r * math.log(q) + (q - p) / q * log_inner)


def R_pq(exps: ExponentSet) -> float:
    if exps.n < 2:
        raise UndefinedConstantError("R_pq is only defined for n >= 2")
    pc = exps.p_conj
    x = (1.0 + exps.q / pc) / ((exps.n - 1) * pc)
    return math.exp(x) if x < 709.0 else math.inf


def compute_constants(exps: ExponentSet, need_R: bool | None = None) -> ConstantSet:
    """All closed-form constants; ``R_pq`` is None for n = 1 unless required."""
    need_R = exps.R is not None if need_R is None else need_R
    n, p, q = exps.n, exps.p, exps.q
    pc = exps.p_conj
    tau = max(exps.tau, 0.0)
    S = _S_pq(n, p, q)
    if n >= 2:
        R = R_pq(exps)
    elif need_R:
        raise UndefinedConstantError("R_pq is only defined for n >= 2")
    else:
        R = None
    return ConstantSet(
        tau=tau,
        gamma_pq=(n - 1) / (1.0 + q / pc),
        S_pq=S,
        R_pq=R,
        C_pq=S * pc ** (p * (tau - 1.0)),
        omega_n=omega(n),
    )


def radial_best_constant(exps: ExponentSet, gamma_: float | None = None) -> float:
    """S_pq |gamma|^{p(1 - tau)}."""
    g = exps.gamma if gamma_ is None else gamma_
    if g is None:
        raise ValidationError("gamma is required for the non-critical constant")
    if g == 0:
        raise ValidationError("gamma = 0 is the critical case; use critical_radial_constant")
    tau = max(exps.tau, 0.0)
    return _S_pq(exps.n, exps.p, exps.q) * abs(g) ** (exps.p * (1.0 - tau))


def sharp_regime(exps: ExponentSet, gamma_: float | None = None) -> bool:
    """True when 0 < |gamma| <= gamma_pq, where the radial value is the full best constant."""
    g = exps.gamma if gamma_ is None else gamma_
    if g is None or g == 0:
        return False
    gpq = (exps.n - 1) / (1.0 + exps.q / exps.p_conj)
    return abs(g) <= gpq


def critical_radial_constant(exps: ExponentSet) -> float:
    """C_pq, the same for every R >= 1 and every eta."""
    R = exps.R
    if R is not None and R < 1:
        raise DomainError("R must be >= 1")
    S = _S_pq(exps.n, exps.p, exps.q)
    return S * exps.p_conj ** (exps.p * (max(exps.tau, 0.0) - 1.0))


def hardy_constant(p: float) -> float:
    """(1/p')^p."""
    return ((p - 1.0) / p) ** p


def constants_report(exps: ExponentSet) -> dict:
    cs = compute_constants(exps)
    out = cs.as_dict()
    if exps.gamma is not None and exps.gamma != 0:
        out["S_rad_at_gamma"] = radial_best_constant(exps)
    else:
        out["S_rad_at_gamma"] = None
    out["sharp_regime"] = sharp_regime(exps)
    return out
