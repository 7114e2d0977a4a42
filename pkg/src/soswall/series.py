"""Sparse two-generator series with exact rational coefficients.

Terms are c * t^p * e^(m u) keyed by integer (p, m), truncated at a fixed
order in t, plus one distinguished linear-in-u term: the bare -u delta(h)
of the restricted free energy cannot be housed in the monomial basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction


@dataclass
class LaurentSeries:
    order: int
    u_linear: Fraction = Fraction(0)
    coeffs: dict = field(default_factory=dict)  # (p, m) -> Fraction

    def set_term(self, p: int, m: int, c: Fraction) -> None:
        if p > self.order:
            return
        if c == 0:
            self.coeffs.pop((p, m), None)
        else:
            self.coeffs[(p, m)] = c

    def add_term(self, p: int, m: int, c) -> None:
        self.set_term(p, m, self.coeffs.get((p, m), Fraction(0)) + Fraction(c))

    def coeff(self, p: int, m: int) -> Fraction:
        return self.coeffs.get((p, m), Fraction(0))

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        out = LaurentSeries(min(self.order, other.order), self.u_linear + other.u_linear)
        for (p, m), c in self.coeffs.items():
            out.add_term(p, m, c)
        for (p, m), c in other.coeffs.items():
            out.add_term(p, m, c)
        return out

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        out = LaurentSeries(min(self.order, other.order), self.u_linear - other.u_linear)
        for (p, m), c in self.coeffs.items():
            out.add_term(p, m, c)
        for (p, m), c in other.coeffs.items():
            out.add_term(p, m, -c)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return (
            self.u_linear == other.u_linear
            and {k: v for k, v in self.coeffs.items() if v}
            == {k: v for k, v in other.coeffs.items() if v}
        )

    def truncate(self, order: int) -> "LaurentSeries":
        out = LaurentSeries(order, self.u_linear)
        for (p, m), c in self.coeffs.items():
            out.add_term(p, m, c)
        return out

    def evaluate(self, t: float, u: float) -> float:
        """Float value; terms summed smallest exponent last for stability."""
        total = 0.0
        for (p, m), c in sorted(self.coeffs.items(), reverse=True):
            total += float(c) * t**p * math.exp(m * u)
        return total + float(self.u_linear) * u

    def terms(self) -> list[tuple[int, int, Fraction]]:
        return [(p, m, c) for (p, m), c in sorted(self.coeffs.items()) if c]

    def dump(self) -> str:
        """One line per term '2p q numerator denominator', sorted; the bare-u
        term, when present, is carried on a leading 'u' line."""
        lines = []
        if self.u_linear:
            lines.append(f"u {self.u_linear.numerator} {self.u_linear.denominator}")
        for p, m, c in self.terms():
            lines.append(f"{2 * p} {m} {c.numerator} {c.denominator}")
        return "\n".join(lines) + ("\n" if lines else "")
