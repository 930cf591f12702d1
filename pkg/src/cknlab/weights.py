"""Weight functions on (0, eta], their P/Q classification and order tests.

Every weight is evaluated in logarithmic coordinates: ``log_w(y)`` returns
``log w(e^y)``.  Strongly non-doubling weights such as ``exp(-1/t)`` underflow
long before the interesting region, so nothing downstream ever touches ``w``
itself unless it has to.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .errors import (
    ConstructionError,
    DomainError,
    InconclusiveError,
    InvalidWeightError,
    ValidationError,
)
from .quadrature import composite_nodes, log_integrate


class Family(str, Enum):
    POWER = "power"
    EXPINV = "expinv"
    POWEREXP = "powerexp"
    EXAMPLE33_P = "example33-P"
    EXAMPLE33_Q = "example33-Q"
    TABLE = "table"


# Below this the nodes 1/m of the non-doubling interpolant are too dense to
# integrate panel by panel.
EXAMPLE33_T_FLOOR = 1e-5


@dataclass(frozen=True)
class Weight:
    family: Family
    params: tuple[tuple[str, float], ...] = ()
    eta: float = 1.0
    table: tuple[tuple[float, ...], tuple[float, ...]] | None = field(
        default=None, repr=False
    )
    _interp: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise DomainError(f"eta must be a positive real, got {self.eta}")
        if self.family is Family.TABLE:
            if self.table is None:
                raise ValidationError("tabulated weight needs (log t, log w) samples")
            ly, lw = (np.asarray(a, dtype=float) for a in self.table)
            object.__setattr__(self, "_interp", PchipInterpolator(ly, lw, extrapolate=False))

    def param(self, name: str) -> float:
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(name)

    @property
    def t_floor(self) -> float:
        """Smallest t at which the weight may be integrated reliably (0 = none)."""
        if self.family in (Family.EXAMPLE33_P, Family.EXAMPLE33_Q):
            return EXAMPLE33_T_FLOOR
        return 0.0

    @property
    def label(self) -> str:
        if self.family is Family.TABLE:
            return "table"
        inner = ",".join(f"{k}={_fmt(v)}" for k, v in self.params)
        return f"{self.family.value}:{inner}" if inner else self.family.value

    # -- evaluation -------------------------------------------------------
    def log_w(self, y):
        """``log w(t)`` at ``y = log t`` (vectorised)."""
        y = np.asarray(y, dtype=float)
        fam = self.family
        if fam is Family.POWER:
            return self.param("alpha") * y
        if fam is Family.EXPINV:
            return self.param("sign") * np.exp(-self.param("alpha") * y)
        if fam is Family.POWEREXP:
            return self.param("alpha") * y + self.param("sign") * np.exp(-y)
        if fam in (Family.EXAMPLE33_P, Family.EXAMPLE33_Q):
            return self.log_value(np.exp(y))
        return self._table_eval(y)[0]

    def dlog_w(self, y):
        """Logarithmic derivative ``d log w / d log t``."""
        y = np.asarray(y, dtype=float)
        fam = self.family
        if fam is Family.POWER:
            return np.full_like(y, self.param("alpha"))
        if fam is Family.EXPINV:
            a = self.param("alpha")
            return -a * self.param("sign") * np.exp(-a * y)
        if fam is Family.POWEREXP:
            return self.param("alpha") - self.param("sign") * np.exp(-y)
        if fam in (Family.EXAMPLE33_P, Family.EXAMPLE33_Q):
            t = np.exp(y)
            kind = "P" if fam is Family.EXAMPLE33_P else "Q"
            z1, dz1 = _z1(t, kind, self.eta)
            out = 1.0 + t * dz1 / z1
            if kind == "Q":
                out = out - 2.0 / _log_e_eta(t, self.eta)
            return out
        return self._table_eval(y)[1]

    def log_value(self, t):
        """``log w(t)`` evaluated directly in t."""
        t = np.asarray(t, dtype=float)
        fam = self.family
        if fam in (Family.EXAMPLE33_P, Family.EXAMPLE33_Q):
            kind = "P" if fam is Family.EXAMPLE33_P else "Q"
            z1, _ = _z1(t, kind, self.eta)
            out = np.log(t) + np.log(z1)
            if kind == "Q":
                out = out + 2.0 * np.log(_log_e_eta(t, self.eta))
            return out
        with np.errstate(divide="ignore"):
            return self.log_w(np.log(t))

    def __call__(self, t):
        with np.errstate(over="ignore", under="ignore"):
            return np.exp(self.log_value(t))

    def breakpoints(self, y_lo: float, y_hi: float) -> np.ndarray:
        """Points in [y_lo, y_hi] where the weight is only C^1 (interpolation nodes)."""
        if self.family is Family.TABLE:
            ly = np.asarray(self.table[0])
            return ly[(ly >= y_lo) & (ly <= y_hi)]
        if self.family not in (Family.EXAMPLE33_P, Family.EXAMPLE33_Q):
            return np.empty(0)
        t_lo, t_hi = math.exp(y_lo), min(math.exp(y_hi), 1.0)
        if t_lo >= t_hi:
            return np.empty(0)
        k_lo = max(1, math.ceil(1.0 / t_hi))
        k_hi = math.floor(1.0 / t_lo)
        if k_hi - k_lo > 5_000_000:
            raise DomainError("too many interpolation nodes; raise the lower limit")
        k = np.arange(k_hi, k_lo - 1, -1, dtype=float)
        return -np.log(k)

    def _table_eval(self, y):
        ly, lw = self.table
        y_min, y_max = ly[0], ly[-1]
        interp = self._interp
        d = interp.derivative()
        s_lo, s_hi = float(d(y_min)), float(d(y_max))
        yc = np.clip(y, y_min, y_max)
        val = interp(yc)
        der = d(yc)
        val = np.where(y < y_min, lw[0] + s_lo * (y - y_min), val)
        val = np.where(y > y_max, lw[-1] + s_hi * (y - y_max), val)
        der = np.where(y < y_min, s_lo, der)
        der = np.where(y > y_max, s_hi, der)
        return val, der


def _fmt(v: float) -> str:
    return f"{v:g}"


# -- builtin families -------------------------------------------------------

def power(alpha: float, eta: float = 1.0) -> Weight:
    return Weight(Family.POWER, (("alpha", float(alpha)),), eta)


def expinv(sign: int, alpha: float = 1.0, eta: float = 1.0) -> Weight:
    """``exp(sign * t**-alpha)``."""
    if sign not in (1, -1):
        raise ValidationError("sign must be +1 or -1")
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    return Weight(Family.EXPINV, (("sign", float(sign)), ("alpha", float(alpha))), eta)


def powerexp(alpha: float, sign: int, eta: float = 1.0) -> Weight:
    """``t**alpha * exp(sign / t)``."""
    if sign not in (1, -1):
        raise ValidationError("sign must be +1 or -1")
    return Weight(Family.POWEREXP, (("alpha", float(alpha)), ("sign", float(sign))), eta)


def from_table(t, w, eta: float | None = None) -> Weight:
    """Tabulated weight, monotone C^1 interpolation in log-log coordinates.

    Outside the table the weight is continued as a power law with the end slope.
    """
    t = np.asarray(t, dtype=float)
    w = np.asarray(w, dtype=float)
    if t.shape != w.shape or t.size < 4:
        raise ValidationError("table needs at least 4 (t, w) pairs")
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise InvalidWeightError("tabulated weight has a non-positive sample")
    if np.any(t <= 0):
        raise DomainError("tabulated abscissae must be positive")
    order = np.argsort(t)
    t, w = t[order], w[order]
    if np.any(np.diff(t) <= 0):
        raise ValidationError("tabulated abscissae must be distinct")
    eta = float(t[-1]) if eta is None else float(eta)
    ly = tuple(np.log(t).tolist())
    lw = tuple(np.log(w).tolist())
    return Weight(Family.TABLE, (), eta, (ly, lw))


def load_table(path, eta: float | None = None) -> Weight:
    ts, ws = [], []
    with open(Path(path), newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() in ("t", "#t") or row[0].startswith("#"):
                continue
            ts.append(float(row[0]))
            ws.append(float(row[1]))
    return from_table(ts, ws, eta)


def _log_e_eta(t, eta):
    return 1.0 + math.log(eta) - np.log(t)


def _z_envelope(t, kind, eta):
    """The envelope z of the non-doubling example weights and its t-derivative."""
    L = _log_e_eta(t, eta)
    if kind == "P":
        return 1.0 / L, 1.0 / (t * L * L)
    return L, -1.0 / t


def _z1(t, kind, eta):
    """C^1 piecewise cubic Hermite interpolant through the nodes t_k = 1/k.

    Odd nodes carry the value 1 with zero slope, even nodes (k >= 2) touch the
    envelope z tangentially.  Returns (z1, dz1/dt).
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    z1 = np.ones_like(t)
    dz1 = np.zeros_like(t)
    inner = t < 1.0
    if np.any(inner):
        ti = t[inner]
        m = np.floor(1.0 / ti)
        a = 1.0 / (m + 1.0)
        b = 1.0 / m
        # guard the rounding of 1/ti at a node
        lo = ti < a
        m = np.where(lo, m + 1.0, m)
        a = 1.0 / (m + 1.0)
        b = 1.0 / m
        h = b - a
        s = np.clip((ti - a) / h, 0.0, 1.0)
        va, da = _node(m + 1.0, kind, eta)
        vb, db = _node(m, kind, eta)
        s2, s3 = s * s, s * s * s
        val = (
            (2 * s3 - 3 * s2 + 1) * va
            + (s3 - 2 * s2 + s) * h * da
            + (-2 * s3 + 3 * s2) * vb
            + (s3 - s2) * h * db
        )
        der = (
            (6 * s2 - 6 * s) * va / h
            + (3 * s2 - 4 * s + 1) * da
            + (-6 * s2 + 6 * s) * vb / h
            + (3 * s2 - 2 * s) * db
        )
        z1[inner] = val
        dz1[inner] = der
    if scalar:
        return z1[0], dz1[0]
    return z1, dz1


def _node(k, kind, eta):
    tk = 1.0 / k
    zv, zd = _z_envelope(tk, kind, eta)
    even = np.mod(k, 2.0) == 0
    return np.where(even, zv, 1.0), np.where(even, zd, 0.0)


def make_example33(kind: str, eta: float = 2.0) -> Weight:
    """Non-doubling example weight built on the nodes t_k = 1/k (``kind`` is ``"P"`` or ``"Q"``)."""
    if kind not in ("P", "Q"):
        raise ValidationError("kind must be 'P' or 'Q'")
    if not eta > 1:
        raise DomainError("example33 weights need eta > 1")
    fam = Family.EXAMPLE33_P if kind == "P" else Family.EXAMPLE33_Q
    w = Weight(fam, (), float(eta))
    # envelope check on a dense log grid plus the points around every node
    t = np.geomspace(EXAMPLE33_T_FLOOR, eta, 10_000)
    k = np.arange(2, 2001, dtype=float)
    t = np.concatenate([t, 1.0 / k, 1.0 / (k + 0.5), 1.0 / k * (1 + 1e-6), 1.0 / k * (1 - 1e-6)])
    z1, _ = _z1(t, kind, eta)
    z, _ = _z_envelope(t, kind, eta)
    lo, hi = (z, 1.0) if kind == "P" else (1.0, z)
    slack = 1e-12
    if np.any(z1 < lo * (1 - slack)) or np.any(z1 > hi * (1 + slack)):
        raise ConstructionError("interpolant z1 leaves the required envelope")
    return w


def _cell_average(Z: float) -> float:
    """Mean of 1/z1 over one node interval once z is frozen at Z.

    Deep inside (0, t_floor) an interval [1/(m+1), 1/m] is so short relative to
    t that z is constant on it to O(1/m) and the Hermite slopes vanish, leaving
    the profile 1 + (Z - 1)(3s^2 - 2s^3).
    """
    c = Z - 1.0
    width = 1.0 / math.sqrt(max(c, 1.0))
    pts = [p for p in (width, 1.0 - width) if 0.0 < p < 1.0]
    f = lambda s: 1.0 / (1.0 + c * s * s * (3.0 - 2.0 * s))
    val, _ = quad(f, 0.0, 1.0, points=pts or None, epsabs=0.0, epsrel=1e-12, limit=200)
    return val


def example33_tail(w: Weight) -> float:
    """int_0^{t_floor} 1/w for the Q-type example weight, averaged over node cells.

    With w = t z^2 z1 and z = log(e eta / t), the substitution Z = z turns the
    cell-averaged integral into int_{Z_f}^inf A(Z) / Z^2 dZ.  The relative error
    of the averaging is O(t_floor).
    """
    if w.family is not Family.EXAMPLE33_Q:
        raise ValidationError("only defined for the Q-type example weight")
    Zf = float(_log_e_eta(w.t_floor, w.eta))
    val, _ = quad(lambda Z: _cell_average(Z) / (Z * Z), Zf, np.inf, epsabs=0.0, epsrel=1e-10, limit=200)
    return val


# -- classification ---------------------------------------------------------

@dataclass(frozen=True)
class WeightClass:
    kind: str  # "P" or "Q"
    limit_at_zero: float
    confidence: str  # "exact" or "heuristic"

    def __post_init__(self):
        if self.kind not in ("P", "Q"):
            raise ValidationError("kind must be P or Q")
        if self.kind == "P" and self.limit_at_zero != 0.0:
            raise ValidationError("a P-class weight must vanish at the origin")


def _check_samples(w: Weight):
    lo = max(w.t_floor, w.eta * 2.0**-60)
    y = np.linspace(math.log(lo), math.log(w.eta), 512)
    with np.errstate(all="ignore"):
        lw = w.log_w(y)
    if np.any(np.isnan(lw)) or np.any(lw == -np.inf) or np.any(lw == np.inf):
        raise InvalidWeightError(f"weight {w.label} has a non-positive or non-finite sample")


def classify(w: Weight, tol: float = 1e-2) -> WeightClass:
    """P if 1/w is not integrable at the origin, Q otherwise."""
    if not tol > 0:
        raise ValidationError("tol must be positive")
    _check_samples(w)
    fam = w.family
    if fam is Family.POWER:
        a = w.param("alpha")
        lim = 0.0 if a > 0 else (1.0 if a == 0 else math.inf)
        return WeightClass("P" if a >= 1 else "Q", lim, "exact")
    if fam in (Family.EXPINV, Family.POWEREXP):
        if w.param("sign") < 0:
            return WeightClass("P", 0.0, "exact")
        return WeightClass("Q", math.inf, "exact")
    if fam is Family.EXAMPLE33_P:
        return WeightClass("P", 0.0, "exact")
    if fam is Family.EXAMPLE33_Q:
        return WeightClass("Q", 0.0, "exact")
    return _classify_table(w, tol)


def _dyadic_logs(w: Weight, kmax: int) -> np.ndarray:
    """log of ``int_{eta 2^-k}^{eta 2^-(k-1)} 1/w`` for k = 1..kmax."""
    y_hi = math.log(w.eta)
    step = math.log(2.0)
    logs = []
    for k in range(1, kmax + 1):
        edges = np.linspace(y_hi - k * step, y_hi - (k - 1) * step, 9)
        y, wt = composite_nodes(edges)
        logs.append(float(log_integrate(y - w.log_w(y), wt)))
    return np.array(logs)


def dyadic_partial_integrals(w: Weight, kmax: int = 60) -> np.ndarray:
    """``int_{eta 2^-k}^{eta} 1/w`` for k = 1..kmax (log values)."""
    return np.logaddexp.accumulate(_dyadic_logs(w, kmax))


def _classify_table(w: Weight, tol: float) -> WeightClass:
    log_d = _dyadic_logs(w, 60)
    log_partial = np.logaddexp.accumulate(log_d)
    partial = np.exp(log_partial)
    lw0 = float(w.dlog_w(np.array(w.table[0][0])))
    lim = 0.0 if lw0 > 0 else (math.inf if lw0 < 0 else float(math.exp(w.table[1][0])))
    # ratio of consecutive dyadic increments; 1 is the logarithmic borderline
    r = float(np.median(np.exp(np.diff(log_d)[-10:])))
    if log_partial[-1] - log_partial[0] > math.log(1e6) or r >= 1.0 - 1e-9:
        return WeightClass("P", 0.0, "heuristic")
    if r < 1.0 - tol:
        return WeightClass("Q", lim, "heuristic")
    raise InconclusiveError("partial integrals neither diverge nor flatten", partial)


# -- doubling and order -----------------------------------------------------

class DoublingSample(NamedTuple):
    t: float
    ratio: float  # w(2t) / w(t)
    inverse: float  # w(t) / w(2t)


def doubling_profile(w: Weight, t_grid) -> list[DoublingSample]:
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0) or np.any(2.0 * t > w.eta * (1 + 1e-12)):
        raise DomainError("doubling grid must lie in (0, eta/2]")
    with np.errstate(over="ignore"):
        d = w.log_value(2.0 * t) - w.log_value(t)
        ratio = np.exp(d)
        inv = np.exp(-d)
    return [DoublingSample(float(a), float(b), float(c)) for a, b, c in zip(t, ratio, inv)]


@dataclass(frozen=True)
class OrderReport:
    verdict: str
    witnesses: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        infinite = self.verdict.startswith("infinite")
        if infinite != bool(self.witnesses):
            raise ValidationError("witnesses must be present exactly for infinite-order verdicts")


def order_detect(w: Weight, m_max: int = 10, t_floor: float = 1e-12,
                 samples: int = 256, candidates: int = 200) -> OrderReport:
    """Search witnesses t_m for ``w <= t^m`` (P) or ``w >= t^-m`` (Q) on (t_floor, t_m)."""
    if m_max < 2:
        raise ValidationError("m_max must be at least 2")
    cls = classify(w)
    floor = max(t_floor, w.t_floor)
    ly_floor = math.log(floor)
    upper = math.log(w.eta)
    witnesses = []
    sgn = 1.0 if cls.kind == "P" else -1.0
    for m in range(1, m_max + 1):
        found = None
        start = upper if not witnesses else upper - 1e-9
        for c in np.linspace(start, ly_floor + 1.0, candidates):
            y = np.linspace(ly_floor, c, samples + 1)[1:]
            lw = w.log_w(y)
            ok = np.all(lw <= m * y) if sgn > 0 else np.all(lw >= -m * y)
            if ok:
                found = float(c)
                break
        if found is None:
            y0 = ly_floor + 1e-9
            order = float(w.log_w(np.array(y0)) / y0) * sgn
            verdict = "finite-order" if order < m else "inconclusive"
            return OrderReport(verdict)
        witnesses.append((m, math.exp(found)))
        upper = found
    kind = "infinite-order-vanish" if cls.kind == "P" else "infinite-order-blowup"
    return OrderReport(kind, tuple(witnesses))


# -- mini-language ------------------------------------------------------------

def parse_weight(spec: str, eta: float = 1.0) -> Weight:
    """Parse ``power:alpha=1``, ``expinv:sign=-,alpha=1``, ``powerexp:alpha=0,sign=+``,
    ``example33:kind=P`` or ``table:<path>``."""
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    if name == "table":
        if not rest:
            raise ValidationError("table weight needs a path")
        return load_table(rest, None)
    kv = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        if "=" not in item:
            raise ValidationError(f"malformed weight parameter {item!r}")
        k, v = item.split("=", 1)
        kv[k.strip().lower()] = v.strip()

    def sign(key):
        s = kv.get(key, "-")
        if s in ("+", "+1", "1"):
            return 1
        if s in ("-", "-1"):
            return -1
        raise ValidationError(f"sign must be + or -, got {s!r}")

    try:
        if name == "power":
            return power(float(kv["alpha"]), eta)
        if name == "expinv":
            return expinv(sign("sign"), float(kv.get("alpha", 1.0)), eta)
        if name == "powerexp":
            return powerexp(float(kv.get("alpha", 0.0)), sign("sign"), eta)
        if name == "example33":
            return make_example33(kv.get("kind", "P").upper(), eta)
    except KeyError as exc:
        raise ValidationError(f"missing weight parameter {exc}") from None
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc)) from None
    raise ValidationError(f"unknown weight family {name!r}")
