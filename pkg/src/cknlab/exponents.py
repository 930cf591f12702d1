"""Admissible exponent sets (n, p, q, gamma | R, mu, eta)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

from .errors import DomainError, ValidationError

_TOL = 1e-12


@dataclass(frozen=True)
class ExponentSet:
    n: int
    p: float
    q: float
    gamma: float | None = None
    R: float | None = None
    mu: float = 1.0
    eta: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"dimension n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        p, q = float(self.p), float(self.q)
        if not (1 < p <= q < math.inf):
            raise ValidationError(f"need 1 < p <= q < inf, got p={p}, q={q}")
        tau = (q - p) / (p * q)
        if tau < -_TOL or tau > 1 / self.n + _TOL:
            raise ValidationError(f"need 0 <= 1/p - 1/q <= 1/n, got {tau}")
        if self.R is not None and not self.R > 1:
            raise DomainError(f"R must exceed 1, got {self.R}")
        if not self.mu > 0:
            raise DomainError(f"mu must be positive, got {self.mu}")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise DomainError(f"eta must be positive, got {self.eta}")

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1)

    @property
    def tau(self) -> float:
        return (self.q - self.p) / (self.p * self.q)

    def with_(self, **changes) -> "ExponentSet":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)
