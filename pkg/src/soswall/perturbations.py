"""Elementary perturbations: enumeration, classification, tornadoes.

An elementary perturbation is a compatible set of elementary cylinders with
a unique external one; equivalently a height pattern on a single filled
support that differs from the surrounding plateau along the whole support
boundary.  The catalog enumerates all of them, up to translation, whose
weight order (half the vertical plaquette count) does not exceed a cap.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property

from . import geometry as geo
from .cylinders import Cylinder, decompose_heights
from .errors import NonElementaryCylinder, OrderTooLarge, SiteNotAtZero

Site = tuple[int, int]

MAX_ORDER = 11  # guard rail: shape enumeration grows like exp(order)


@dataclass(frozen=True)
class Perturbation:
    """A height excitation above/below the plateau at `level`.

    `cells` is the support (the filled interior of the external cylinder),
    sorted by (y, x); `heights` aligns with it.  The canonical placement
    used by catalogs puts the least support site at the origin.
    """

    level: int
    cells: tuple[Site, ...]
    heights: tuple[int, ...]

    @cached_property
    def support(self) -> frozenset:
        return frozenset(self.cells)

    @cached_property
    def height_of(self) -> dict:
        return dict(zip(self.cells, self.heights))

    @cached_property
    def norm2(self) -> int:
        """Number of vertical plaquettes = twice the weight order."""
        sup = self.support
        hmap = self.height_of
        total = 0
        for (x, y), hv in hmap.items():
            for dx, dy in ((1, 0), (0, 1)):
                q = (x + dx, y + dy)
                if q in sup:
                    total += abs(hv - hmap[q])
                else:
                    total += abs(hv - self.level)
            for dx, dy in ((-1, 0), (0, -1)):
                q = (x + dx, y + dy)
                if q not in sup:
                    total += abs(hv - self.level)
        return total

    @property
    def norm(self) -> int:
        if self.norm2 % 2:
            raise ValueError("odd vertical plaquette count")
        return self.norm2 // 2

    @cached_property
    def contacts(self) -> int:
        """Weight exponent of e^u: wall plaquettes, counted relative to the
        plateau (negative of the non-contact count when the plateau itself
        sits on the wall)."""
        zeros = sum(1 for h in self.heights if h == 0)
        if self.level == 0:
            return zeros - len(self.cells)
        return zeros

    @cached_property
    def ext_sign(self) -> int:
        for c, hv in zip(self.cells, self.heights):
            x, y = c
            if any((x + dx, y + dy) not in self.support for dx, dy in geo.N4):
                return 1 if hv > self.level else -1
        raise ValueError("support has no boundary cell")

    @cached_property
    def bonds(self) -> frozenset:
        return geo.boundary_bonds(self.support)

    @cached_property
    def diameter(self) -> int:
        return geo.l1_diameter(self.bonds)

    @cached_property
    def cylinders(self) -> tuple[Cylinder, ...]:
        return tuple(decompose_heights(self.height_of, self.level))

    def canonical(self) -> tuple["Perturbation", Site]:
        """(anchored copy, offset): least support site moved to the origin."""
        ax, ay = min(self.cells, key=lambda c: (c[1], c[0]))
        if (ax, ay) == (0, 0):
            return self, (0, 0)
        cells = tuple(sorted(((x - ax, y - ay) for x, y in self.cells), key=lambda c: (c[1], c[0])))
        order = sorted(range(len(self.cells)), key=lambda i: (self.cells[i][1], self.cells[i][0]))
        heights = tuple(self.heights[i] for i in order)
        return Perturbation(self.level, cells, heights), (ax, ay)

    def translate(self, dx: int, dy: int) -> "Perturbation":
        cells = tuple((x + dx, y + dy) for x, y in self.cells)
        return Perturbation(self.level, cells, self.heights)


def compatible_perturbations(p1: Perturbation, p2: Perturbation) -> bool:
    """Supports must not intersect; touching support boundaries are allowed
    exactly when the external cylinders would be compatible, which reduces
    to opposite external signs or perimeters disjoint after rounding."""
    if p1.support & p2.support:
        return False
    if p1.ext_sign != p2.ext_sign:
        return True
    return not geo.perimeters_clash(p1.bonds, p2.bonds)


@dataclass(frozen=True)
class CatalogKey:
    k: int
    level: int
    order: int

    def __post_init__(self):
        if self.k < 8:
            raise ValueError("elementary cutoff k must be at least 8")
        if self.level < 0:
            raise ValueError("external level must be nonnegative")
        if self.order < 2:
            raise ValueError("order cap below the smallest excitation")
        if self.order > MAX_ORDER:
            raise OrderTooLarge(f"order {self.order} exceeds guard {MAX_ORDER}")


_shape_cache: dict[int, list[frozenset]] = {}


def enumerate_interiors(max_perimeter: int) -> list[frozenset]:
    """All valid cylinder interiors, up to translation, with boundary length
    <= max_perimeter.  Grown over the rounding connectivity so NW-SE
    diagonal composites are included; holes and SW-NE contacts are not.

    Anchored depth-first growth in the Redelmeier style: shapes are rooted
    at their (y, x)-least cell, so each translation class is visited exactly
    once and no dedup set is needed.  The perimeter is tracked incrementally
    and only shapes inside the cap get the full validity check.
    """
    if max_perimeter in _shape_cache:
        return _shape_cache[max_perimeter]
    max_area = (max_perimeter // 4) * ((max_perimeter + 3) // 4)
    max_span = max_perimeter // 2  # bbox width + height, monotone under growth

    shapes: list[frozenset] = []
    occupied: set = set()
    state = {"perim": 0, "x0": 0, "x1": 0, "y0": 0, "y1": 0}

    def allowed(c) -> bool:
        x, y = c
        return y > 0 or (y == 0 and x >= 0)

    def rec(candidates: list, offered: set):
        local = list(candidates)
        while local:
            c = local.pop()
            x, y = c
            nx0 = min(state["x0"], x)
            nx1 = max(state["x1"], x)
            ny0 = min(state["y0"], y)
            ny1 = max(state["y1"], y)
            if (nx1 - nx0 + 1) + (ny1 - ny0 + 1) > max_span:
                continue
            edge_nbrs = sum(1 for dx, dy in geo.N4 if (x + dx, y + dy) in occupied)
            new_perim = state["perim"] + 4 - 2 * edge_nbrs
            saved = dict(state)
            state.update(perim=new_perim, x0=nx0, x1=nx1, y0=ny0, y1=ny1)
            occupied.add(c)
            if new_perim <= max_perimeter:
                shapes.append(frozenset(occupied))
            if len(occupied) < max_area:
                fresh = []
                for dx, dy in geo.CONN:
                    q = (x + dx, y + dy)
                    if allowed(q) and q not in occupied and q not in offered:
                        fresh.append(q)
                offered.update(fresh)
                rec(local + fresh, offered)
                offered.difference_update(fresh)
            occupied.remove(c)
            state.update(saved)

    rec([(0, 0)], {(0, 0)})
    shapes = [s for s in shapes if geo.is_valid_interior(s)]
    shapes.sort(key=lambda s: (len(s), sorted(s)))
    _shape_cache[max_perimeter] = shapes
    return shapes


def _height_patterns(shape: frozenset, level: int, budget: int):
    """Yield height assignments on `shape` with total bond cost <= budget.

    Cells carrying an edge of the support boundary must differ from the
    plateau, all on the same side (a necessary feature of any single
    external cylinder).
    """
    cells = sorted(shape, key=lambda c: (c[1], c[0]))
    m = len(cells)
    pos = {c: i for i, c in enumerate(cells)}
    earlier: list[list[int]] = [[] for _ in range(m)]
    n_out = [0] * m
    is_boundary = [False] * m
    for i, (x, y) in enumerate(cells):
        for dx, dy in geo.N4:
            q = (x + dx, y + dy)
            if q in shape:
                j = pos[q]
                if j < i:
                    earlier[i].append(j)
            else:
                n_out[i] += 1
                is_boundary[i] = True
    span = budget // 4 + 1
    lo = max(0, level - span)
    hi = level + span
    heights = [0] * m

    def rec(i: int, cost: int, side: int):
        if i == m:
            yield tuple(heights), cost
            return
        nout = n_out[i]
        for hv in range(lo, hi + 1):
            if is_boundary[i]:
                if hv == level:
                    continue
                s = 1 if hv > level else -1
                if side and s != side:
                    continue
                new_side = s
            else:
                new_side = side
            c = cost + nout * abs(hv - level)
            if c > budget:
                continue
            ok = True
            for j in earlier[i]:
                c += abs(hv - heights[j])
                if c > budget:
                    ok = False
                    break
            if not ok:
                continue
            heights[i] = hv
            yield from rec(i + 1, c, new_side)

    yield from rec(0, 0, 0)


def _is_single_perturbation(p: Perturbation) -> bool:
    """True iff the pattern decomposes with a unique external cylinder whose
    interior is exactly the support."""
    externals = [
        g
        for g in p.cylinders
        if not any(g is not h and g.interior < h.interior for h in p.cylinders)
    ]
    return len(externals) == 1 and externals[0].interior == p.support


@dataclass
class Catalog:
    key: CatalogKey
    perturbations: tuple[Perturbation, ...]

    @cached_property
    def by_norm_contacts(self) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for p in self.perturbations:
            k = (p.norm, p.contacts)
            out[k] = out.get(k, 0) + 1
        return out

    def count(self, norm: int, contacts: int) -> int:
        """Perturbations per site with the given weight exponents."""
        return self.by_norm_contacts.get((norm, contacts), 0)

    def content_hash(self) -> str:
        return hashlib.sha256(serialize_catalog(self).encode()).hexdigest()


def build_catalog(key: CatalogKey) -> Catalog:
    k, level, order = key.k, key.level, key.order
    max_diam = 3 * k + 3
    budget = 2 * order
    out = []
    for shape in enumerate_interiors(budget):
        if geo.l1_diameter(geo.boundary_bonds(shape)) > max_diam:
            continue
        cells = tuple(sorted(shape, key=lambda c: (c[1], c[0])))
        for heights, cost in _height_patterns(shape, level, budget):
            p = Perturbation(level, cells, heights)
            if p.norm2 != cost:
                raise AssertionError("bond cost bookkeeping broke")
            if _is_single_perturbation(p):
                out.append(p)
    out.sort(key=lambda p: (p.norm, p.contacts, p.cells, p.heights))
    return Catalog(key, tuple(out))


_catalog_cache: dict[CatalogKey, Catalog] = {}


def get_catalog(key: CatalogKey) -> Catalog:
    got = _catalog_cache.get(key)
    if got is None:
        got = build_catalog(key)
        _catalog_cache[key] = got
    return got


CATALOG_FORMAT = "soswall-catalog-v1"


def serialize_catalog(cat: Catalog) -> str:
    lines = []
    for p in cat.perturbations:
        cells = ";".join(f"{x},{y}" for x, y in p.cells)
        hts = ";".join(str(h) for h in p.heights)
        lines.append(f"{cells} {hts}")
    return "\n".join(lines) + ("\n" if lines else "")


def save_catalog(cat: Catalog, path) -> None:
    body = serialize_catalog(cat)
    digest = hashlib.sha256(body.encode()).hexdigest()
    key = cat.key
    with open(path, "w") as f:
        f.write(f"{CATALOG_FORMAT} k={key.k} level={key.level} order={key.order} sha256={digest}\n")
        f.write(body)


def load_catalog(path) -> Catalog:
    with open(path) as f:
        header = f.readline().split()
        body = f.read()
    if not header or header[0] != CATALOG_FORMAT:
        raise ValueError("not a catalog file")
    meta = dict(part.split("=", 1) for part in header[1:])
    if hashlib.sha256(body.encode()).hexdigest() != meta["sha256"]:
        raise ValueError("catalog content hash mismatch")
    key = CatalogKey(int(meta["k"]), int(meta["level"]), int(meta["order"]))
    perts = []
    for line in body.splitlines():
        cells_s, hts_s = line.split(" ")
        cells = tuple(tuple(int(v) for v in c.split(",")) for c in cells_s.split(";"))
        hts = tuple(int(v) for v in hts_s.split(";"))
        perts.append(Perturbation(key.level, cells, hts))
    return Catalog(key, tuple(perts))


def decompose_into_perturbations(cylinders, external_level: int, k: int) -> list[Perturbation]:
    """Partition a compatible set of elementary cylinders into its
    perturbations (grouped by external cylinder); placement is preserved."""
    max_diam = 3 * k + 3
    cyls = list(cylinders)
    for g in cyls:
        if g.diameter > max_diam:
            raise NonElementaryCylinder(f"diameter {g.diameter} exceeds {max_diam}")
    externals = [
        g for g in cyls if not any(g is not h and g.interior < h.interior for h in cyls)
    ]
    out = []
    for ext in externals:
        group = [g for g in cyls if g.interior <= ext.interior]
        delta: dict[Site, int] = {}
        for g in group:
            step = g.I - g.E
            for c in g.interior:
                delta[c] = delta.get(c, 0) + step
        cells = tuple(sorted(ext.interior, key=lambda c: (c[1], c[0])))
        heights = tuple(external_level + delta.get(c, 0) for c in cells)
        out.append(Perturbation(external_level, cells, heights))
    return out


def classify(p: Perturbation) -> dict:
    """Touching/multi-touching/small/big/simple flags of a perturbation."""
    touching = [g for g in p.cylinders if g.I == 0]
    flags = {
        "touching": bool(touching),
        "multi_touching": len(touching) >= 2,
        "small_touching": sum(1 for g in touching if g.perimeter <= 6),
        "big_touching": sum(1 for g in touching if g.perimeter >= 8),
        "simple": len(p.cylinders) == 1
        and p.cylinders[0].sign == -1
        and p.cylinders[0].length == 1,
    }
    return flags


@dataclass(frozen=True)
class Tornado:
    """A maximal nested chain of cylinders reaching the wall under a site."""

    chain: tuple[Cylinder, ...]  # innermost first; last is the external one

    def __post_init__(self):
        if not self.chain:
            raise ValueError("empty tornado")
        if self.chain[0].I != 0:
            raise ValueError("innermost cylinder must reach the wall")
        for inner, outer in zip(self.chain, self.chain[1:]):
            if not inner.interior < outer.interior or inner.E != outer.I:
                raise ValueError("chain is not nested with matching levels")

    @property
    def semi_monotone(self) -> bool:
        levels = [g.I for g in self.chain]
        return all(a < b for a, b in zip(levels, levels[1:]))

    def fully_monotone(self, level: int) -> bool:
        return self.semi_monotone and level > self.chain[-1].I


def tornado_at(p: Perturbation, site: Site) -> Tornado:
    """The unique maximal nested family above `site`, which must sit at 0."""
    if p.height_of.get(site) != 0:
        raise SiteNotAtZero(f"height at {site} is not zero")
    containing = sorted(
        (g for g in p.cylinders if site in g.interior), key=lambda g: len(g.interior)
    )
    chain = [g for g in containing if g.I == 0][:1]
    if not chain:
        raise SiteNotAtZero("no wall-reaching cylinder above the site")
    # climb the nesting tree: each parent is the smallest strictly containing
    # cylinder, and levels chain by compatibility
    while True:
        cur = chain[-1]
        parents = [g for g in containing if cur.interior < g.interior]
        if not parents:
            break
        nxt = min(parents, key=lambda g: len(g.interior))
        chain.append(nxt)
    return Tornado(tuple(chain))


def monotonize(t: Tornado) -> Tornado:
    """Semi-monotone tornado obtained by keeping the cylinders whose interior
    level undercuts everything above them, truncated to stack contiguously."""
    chain = t.chain
    r = len(chain)
    crit = []
    for i in range(r):
        if i == r - 1 or chain[i].I < min(g.I for g in chain[i + 1:]):
            crit.append(i)
    new = []
    for pos, i in enumerate(crit):
        if pos == len(crit) - 1:
            new.append(chain[i])
        else:
            upper = chain[crit[pos + 1]].I
            new.append(Cylinder(chain[i].interior, E=upper, I=chain[i].I))
    return Tornado(tuple(new))
