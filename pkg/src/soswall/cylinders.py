"""Cylinders: the step decomposition of an interface configuration.

A cylinder gamma = (base perimeter, E, I) is a closed dual-lattice curve
with an exterior and an interior level.  The interior site set is the
authoritative representation; the curve, its length and its rounding data
are derived from it (see geometry).  A configuration with constant
boundary level n corresponds to exactly one compatible set of cylinders
with external level n, and the Gibbs weight factorizes over the set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from . import geometry as geo
from .errors import IncompatibleSet, NegativeHeight
from .lattice import Box, HeightConfig
from .params import ModelParams

Site = tuple[int, int]


@dataclass(frozen=True)
class Cylinder:
    interior: frozenset
    E: int
    I: int

    def __post_init__(self):
        if self.E < 0 or self.I < 0:
            raise ValueError("levels must be nonnegative")
        if self.E == self.I:
            raise ValueError("exterior and interior levels must differ")
        if not geo.is_valid_interior(self.interior):
            raise ValueError("interior does not bound a single rounded curve")

    @cached_property
    def bonds(self) -> frozenset:
        return geo.boundary_bonds(self.interior)

    @property
    def sign(self) -> int:
        return 1 if self.I > self.E else -1

    @property
    def length(self) -> int:
        return abs(self.I - self.E)

    @property
    def perimeter(self) -> int:
        return len(self.bonds)

    @cached_property
    def diameter(self) -> int:
        return geo.l1_diameter(self.bonds)

    def translate(self, dx: int, dy: int) -> "Cylinder":
        return Cylinder(frozenset((x + dx, y + dy) for x, y in self.interior), self.E, self.I)


def compatible(g1: Cylinder, g2: Cylinder) -> bool:
    """The pairwise compatibility predicate.

    Same sign: disjoint interiors require disjoint (rounded) perimeters,
    nested interiors do not.  Opposite signs: the perimeter condition moves
    to the nested case.  On top of either, levels must chain: equal E for
    disjoint pairs, E of the inner equal to I of the outer for nested ones.
    """
    a, b = g1.interior, g2.interior
    if a == b:
        return False
    if not (a & b):
        level_ok = g1.E == g2.E
        if g1.sign == g2.sign:
            return level_ok and not geo.perimeters_clash(g1.bonds, g2.bonds)
        return level_ok
    if a < b:
        inner, outer = g1, g2
    elif b < a:
        inner, outer = g2, g1
    else:
        return False
    level_ok = inner.E == outer.I
    if inner.sign == outer.sign:
        return level_ok
    return level_ok and not geo.perimeters_clash(g1.bonds, g2.bonds)


def separated(g1: Cylinder, g2: Cylinder, by: Cylinder) -> bool:
    """True iff `by` separates g1 from g2 (one of the four nesting patterns)."""
    a, b, c = g1.interior, g2.interior, by.interior
    if a == c or b == c:
        return False
    return (
        (a <= c and c <= b)
        or (b <= c and c <= a)
        or (a <= c and not (b & c))
        or (b <= c and not (a & c))
    )


@dataclass(frozen=True)
class CylinderSet:
    cylinders: tuple[Cylinder, ...]
    external_level: int

    def check(self) -> None:
        cyls = self.cylinders
        for i in range(len(cyls)):
            for j in range(i + 1, len(cyls)):
                if compatible(cyls[i], cyls[j]):
                    continue
                if any(
                    separated(cyls[i], cyls[j], cyls[k])
                    for k in range(len(cyls))
                    if k != i and k != j
                ):
                    continue
                raise IncompatibleSet(f"cylinders {i} and {j} clash")
        for g in self.external_cylinders():
            if g.E != self.external_level:
                raise IncompatibleSet("external cylinder not at the external level")

    def external_cylinders(self) -> list[Cylinder]:
        out = []
        for g in self.cylinders:
            if not any(g is not h and g.interior < h.interior for h in self.cylinders):
                out.append(g)
        return out

    def canonical(self) -> tuple:
        return tuple(
            sorted((tuple(sorted(g.interior)), g.E, g.I) for g in self.cylinders)
        )


def decompose_heights(phi: dict, n: int) -> list[Cylinder]:
    """Cylinders of the height field `phi` (sites absent from `phi` sit at n).

    Level-curve construction: for every slice m+1/2 the cut bonds split into
    rounded closed curves; identical curves at consecutive slices stack into
    one cylinder whose E and I are read from the heights on either side.
    """
    if not phi:
        return []
    lo = min(n, min(phi.values()))
    hi = max(n, max(phi.values()))
    if lo == hi:
        return []

    def h(x) -> int:
        return phi.get(x, n)

    bonds = set()
    for (x, y) in phi:
        for dx, dy in geo.N4:
            bonds.add(geo.bond((x, y), (x + dx, y + dy)))
    bonds = sorted(bonds)

    rings: dict[frozenset, list[int]] = {}
    for m in range(lo, hi):
        cut = [b for b in bonds if min(h(b[0]), h(b[1])) <= m < max(h(b[0]), h(b[1]))]
        for loop in geo.split_rounded_curves(cut):
            rings.setdefault(loop, []).append(m)

    cylinders = []
    for loop, slices in rings.items():
        interior = geo.enclosed_cells(loop)
        # a cut bond crossing the loop, used to orient each stack
        probe = next(iter(loop))
        inside_site = probe[0] if probe[0] in interior else probe[1]
        outside_site = probe[1] if probe[0] in interior else probe[0]
        slices.sort()
        start = prev = slices[0]
        runs = []
        for m in slices[1:]:
            if m == prev + 1:
                prev = m
            else:
                runs.append((start, prev))
                start = prev = m
        runs.append((start, prev))
        for a, b in runs:
            if h(inside_site) > h(outside_site):
                cylinders.append(Cylinder(interior, E=a, I=b + 1))
            else:
                cylinders.append(Cylinder(interior, E=b + 1, I=a))
    return cylinders


def decompose(config: HeightConfig) -> CylinderSet:
    phi = {site: config.heights[config.box.site_index(site)] for site in config.box.sites()}
    cyls = decompose_heights(phi, config.box.boundary_level)
    return CylinderSet(tuple(cyls), config.box.boundary_level)


def reconstruct(cyl_set: CylinderSet, box: Box) -> HeightConfig:
    """Inverse of decompose; raises on incompatible sets or negative heights."""
    if cyl_set.external_level != box.boundary_level:
        raise IncompatibleSet("set external level differs from box boundary level")
    cyl_set.check()
    n = box.boundary_level
    delta: dict[Site, int] = {}
    for g in cyl_set.cylinders:
        step = g.I - g.E
        for site in g.interior:
            if not box.contains(site):
                raise IncompatibleSet(f"cylinder interior leaves the box at {site}")
            delta[site] = delta.get(site, 0) + step
    heights = []
    for site in box.sites():
        v = n + delta.get(site, 0)
        if v < 0:
            raise NegativeHeight(f"height {v} at {site}")
        heights.append(v)
    return HeightConfig(box, tuple(heights))


def weight_exponents(g: Cylinder) -> tuple[int, int]:
    """(power of t, power of e^u) of the cylinder weight."""
    p = g.length * g.perimeter // 2
    m = len(g.interior) * ((1 if g.I == 0 else 0) - (1 if g.E == 0 else 0))
    return p, m


def cylinder_weight(g: Cylinder, params: ModelParams) -> float:
    p, m = weight_exponents(g)
    return params.t**p * math.exp(params.u * m)


def total_weight(cyl_set: CylinderSet, params: ModelParams, box: Box) -> float:
    """e^{u delta(n) |Lambda|} times the product of cylinder weights.

    Equals exp(-beta H) of the reconstructed configuration exactly; that
    identity is this module's central test.
    """
    n = cyl_set.external_level
    w = math.exp(params.u * box.n_sites) if n == 0 else 1.0
    for g in cyl_set.cylinders:
        w *= cylinder_weight(g, params)
    return w


def serialize(cyl_set: CylinderSet) -> str:
    """Line-oriented debug form: one cylinder per line as 'E I x,y x,y ...'."""
    lines = []
    for interior, e, i in cyl_set.canonical():
        cells = " ".join(f"{x},{y}" for x, y in interior)
        lines.append(f"{e} {i} {cells}")
    return "\n".join(lines) + ("\n" if lines else "")
