"""Contours: large-cylinder excitations dressed by restricted ensembles.

A contour is a compatible set of large cylinders with a unique external
one, whose non-external members never return to the external level except
through the designated internal cylinders (I = n).  Its statistical weight
involves restricted partition functions of the support pieces, evaluated
here by explicit enumeration of compatible elementary-perturbation sets
under the boundary sign condition.  The two equivalent weight forms are
both computed, which numerically certifies the cancellation identity that
makes them equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from . import geometry as geo
from .clusters import ClusterSpace, get_space
from .cylinders import Cylinder, cylinder_weight
from .errors import NotLargeSet, RegionTooLarge
from .params import ModelParams
from .perturbations import CatalogKey

Site = tuple[int, int]

DEFAULT_REGION_CAP = 30


def is_large(g: Cylinder, k: int) -> bool:
    return g.diameter > 3 * k + 3


def split_large(cylinders, k: int) -> tuple[list[Cylinder], list[Cylinder]]:
    """(large part, elementary remainder) of a compatible cylinder set."""
    large = [g for g in cylinders if is_large(g, k)]
    small = [g for g in cylinders if not is_large(g, k)]
    return large, small


@dataclass(frozen=True)
class Contour:
    external: Cylinder
    middles: tuple[Cylinder, ...]
    internals: tuple[Cylinder, ...]
    level: int

    def __post_init__(self):
        n = self.level
        if self.external.E != n:
            raise ValueError("external cylinder must sit at the contour level")
        for g in self.middles + self.internals:
            if not g.interior < self.external.interior:
                raise ValueError("member not nested in the external cylinder")
            if g.E == n:
                raise ValueError("non-external member at the external level")
        for g in self.internals:
            if g.I != n:
                raise ValueError("internal cylinder must return to the level")
        for g in self.middles:
            if g.I == n:
                raise ValueError("middle cylinder returning to the level")

    @property
    def cylinders(self) -> tuple[Cylinder, ...]:
        return (self.external,) + self.middles + self.internals

    @cached_property
    def support(self) -> frozenset:
        out = set(self.external.interior)
        for g in self.internals:
            out -= g.interior
        return frozenset(out)

    @cached_property
    def support_ext(self) -> frozenset:
        out = set(self.external.interior)
        for g in self.middles + self.internals:
            out -= g.interior
        return frozenset(out)

    def support_of_middle(self, g: Cylinder) -> frozenset:
        out = set(g.interior)
        for h in self.cylinders:
            if h.interior < g.interior:
                out -= h.interior
        return frozenset(out)

    @property
    def norm2(self) -> int:
        return sum(g.length * g.perimeter for g in self.cylinders)

    def support_partition_ok(self) -> bool:
        pieces = [self.support_ext] + [self.support_of_middle(g) for g in self.middles]
        union = set()
        total = 0
        for p in pieces:
            union |= p
            total += len(p)
        return total == len(union) and union == set(self.support)


def _nesting_children(cyls) -> dict:
    """Direct-nesting children map over a compatible set."""
    children = {g: [] for g in cyls}
    for g in cyls:
        parents = [h for h in cyls if g.interior < h.interior]
        if parents:
            parent = min(parents, key=lambda h: len(h.interior))
            children[parent].append(g)
    return children


def contour_decompose(cylinders, level: int, k: int) -> list[Contour]:
    """The unique split of a compatible large-cylinder set into contours."""
    cyls = list(cylinders)
    for g in cyls:
        if not is_large(g, k):
            raise NotLargeSet(f"cylinder of diameter {g.diameter} is elementary for k={k}")
    children = _nesting_children(cyls)
    roots = [
        g for g in cyls if not any(g.interior < h.interior for h in cyls)
    ]
    out = []
    queue = list(roots)
    while queue:
        root = queue.pop()
        if root.E != level:
            raise NotLargeSet("external cylinder not at the boundary level")
        middles = []
        internals = []
        walk = list(children[root])
        while walk:
            g = walk.pop()
            if g.I == level:
                internals.append(g)
                queue.extend(children[g])  # members below restart at the level
            else:
                middles.append(g)
                walk.extend(children[g])
        out.append(
            Contour(
                external=root,
                middles=tuple(sorted(middles, key=lambda g: sorted(g.interior))),
                internals=tuple(sorted(internals, key=lambda g: sorted(g.interior))),
                level=level,
            )
        )
    out.sort(key=lambda c: sorted(c.external.interior))
    return out


@dataclass(frozen=True)
class SignContext:
    """Bounding cylinders of a region with their side, for the sign rule."""

    inside_of: tuple[Cylinder, ...]   # region lies inside these
    outside_of: tuple[Cylinder, ...]  # region lies outside these

    def admits(self, bonds: frozenset, sign: int) -> bool:
        for g in self.inside_of:
            if geo.perimeters_clash(bonds, g.bonds) and sign != g.sign:
                return False
        for g in self.outside_of:
            if geo.perimeters_clash(bonds, g.bonds) and sign != -g.sign:
                return False
        return True


def restricted_partition(
    region: frozenset,
    level: int,
    k: int,
    order: int,
    context: SignContext,
    region_cap: int = DEFAULT_REGION_CAP,
    norm_cap: int | None = None,
) -> dict:
    """Z*_k(region, level): exact term counts (norm, contacts) -> int over
    compatible sets of elementary perturbations with support in the region,
    obeying the boundary sign condition, truncated at total order norm_cap."""
    if len(region) > region_cap:
        raise RegionTooLarge(f"{len(region)} sites exceed cap {region_cap}")
    if norm_cap is None:
        norm_cap = 2 * order
    space: ClusterSpace = get_space(CatalogKey(k=k, level=level, order=order))
    perts = space.perts

    placements = []
    if region:
        xs = [x for x, _ in region]
        ys = [y for _, y in region]
        for i, p in enumerate(perts):
            pw = [x for x, _ in p.cells]
            ph = [y for _, y in p.cells]
            for dx in range(min(xs) - min(pw), max(xs) - max(pw) + 1):
                for dy in range(min(ys) - min(ph), max(ys) - max(ph) + 1):
                    if not all((x + dx, y + dy) in region for x, y in p.cells):
                        continue
                    bonds = frozenset(
                        ((x1 + dx, y1 + dy), (x2 + dx, y2 + dy))
                        for (x1, y1), (x2, y2) in p.bonds
                    )
                    if not context.admits(bonds, p.ext_sign):
                        continue
                    placements.append((i, (dx, dy)))

    placements.sort(key=lambda pl: perts[pl[0]].norm)
    n = len(placements)
    compat = [0] * n
    for a in range(n):
        ia, (xa, ya) = placements[a]
        for b in range(a + 1, n):
            ib, (xb, yb) = placements[b]
            if space.placed_compatible(ia, ib, (xb - xa, yb - ya)):
                compat[a] |= 1 << b
                compat[b] |= 1 << a

    norms = [perts[i].norm for i, _ in placements]
    ms = [perts[i].contacts for i, _ in placements]
    terms: dict = {}

    def rec(allowed: int, p_sum: int, m_sum: int):
        key = (p_sum, m_sum)
        terms[key] = terms.get(key, 0) + 1
        budget = norm_cap - p_sum
        cand = allowed
        while cand:
            low = cand & -cand
            idx = low.bit_length() - 1
            cand ^= low
            if norms[idx] > budget:
                break  # placements sorted by norm: the rest are heavier
            rec(cand & compat[idx], p_sum + norms[idx], m_sum + ms[idx])

    rec((1 << n) - 1, 0, 0)
    return terms


def _eval_terms(terms: dict, t: float, u: float) -> float:
    return math.fsum(
        c * t**p * math.exp(m * u) for (p, m), c in sorted(terms.items(), reverse=True)
    )


@dataclass
class ContourWeights:
    direct: float       # the perturbation-dressed product form
    plaquette: float    # the t^|Gamma| form with corrected prefactors

    @property
    def relative_gap(self) -> float:
        scale = max(abs(self.direct), abs(self.plaquette))
        return abs(self.direct - self.plaquette) / scale if scale else 0.0


def contour_weight(
    contour: Contour,
    params: ModelParams,
    k: int,
    order: int,
    region_cap: int = DEFAULT_REGION_CAP,
) -> ContourWeights:
    """Both forms of the contour weight; they must agree (the e^{u...}
    bookkeeping identity behind the second form has no other check)."""
    t, u = params.t, params.u
    n = contour.level
    children = _nesting_children(contour.cylinders)

    regions = []  # (region, inner level, SignContext)
    ext_ctx = SignContext(
        inside_of=(contour.external,), outside_of=tuple(children[contour.external])
    )
    regions.append((contour.support_ext, contour.external.I, ext_ctx))
    for g in contour.middles:
        ctx = SignContext(inside_of=(g,), outside_of=tuple(children[g]))
        regions.append((contour.support_of_middle(g), g.I, ctx))

    denom_ctx = SignContext(
        inside_of=(contour.external,), outside_of=contour.internals
    )

    def zstar(region, lvl, ctx):
        return restricted_partition(region, lvl, k, order, ctx, region_cap)

    num_direct = 1.0
    num_plq = 1.0
    for region, lvl, ctx in regions:
        terms = zstar(region, lvl, ctx)
        z = _eval_terms(terms, t, u)
        num_direct *= z
        # Z-tilde carries the plateau prefactor of its own level
        num_plq *= z * (math.exp(u * len(region)) if lvl == 0 else 1.0)
    den_terms = zstar(contour.support, n, denom_ctx)
    den = _eval_terms(den_terms, t, u)
    den_plq = den * (math.exp(u * len(contour.support)) if n == 0 else 1.0)

    phi_product = 1.0
    for g in contour.cylinders:
        phi_product *= cylinder_weight(g, params)

    direct = phi_product * num_direct / den
    plaquette = t ** (contour.norm2 // 2) * num_plq / den_plq
    return ContourWeights(direct=direct, plaquette=plaquette)
