"""Model parameters for the SOS interface above an attractive wall.

Canonical internal form is (t, u) with t = exp(-4*beta*J) the cost of a pair
of interface plaquettes and u = 2*beta*(J-K) the gain per site of wall
contact.  Couplings (J, K, beta) are accepted and converted; J is kept so
the conversion can be inverted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParamsInvalid


@dataclass(frozen=True)
class ModelParams:
    t: float
    u: float
    J: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.t < 1.0):
            raise ParamsInvalid(f"t must lie in (0,1), got {self.t}")
        if self.J <= 0.0:
            raise ParamsInvalid(f"J must be positive, got {self.J}")

    @classmethod
    def from_couplings(cls, J: float, K: float, beta: float) -> "ModelParams":
        if J <= 0.0:
            raise ParamsInvalid(f"J must be positive, got {J}")
        if beta <= 0.0:
            raise ParamsInvalid(f"beta must be positive, got {beta}")
        return cls(t=math.exp(-4.0 * beta * J), u=2.0 * beta * (J - K), J=J)

    @classmethod
    def from_tu(cls, t: float, u: float, J: float = 1.0) -> "ModelParams":
        return cls(t=t, u=u, J=J)

    @property
    def beta(self) -> float:
        return -math.log(self.t) / (4.0 * self.J)

    @property
    def K(self) -> float:
        return self.J - self.u / (2.0 * self.beta)

    @property
    def s(self) -> float:
        """Convergence-lemma weight scale s = t * exp(t^(1/4)); always > t."""
        return self.t * math.exp(self.t**0.25)

    @property
    def two_beta_J(self) -> float:
        """2*beta*J = -ln(t)/2, the energy per unit of height gradient (times beta)."""
        return -0.5 * math.log(self.t)


def t1(k: int) -> float:
    """Series trust radius (3k+3)^-4 for elementary cutoff k."""
    return float(3 * k + 3) ** -4
