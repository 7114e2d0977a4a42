"""Clusters over the perturbation catalog and truncated free energies.

A cluster is a multiset of placed perturbations connected through pairwise
incompatibility.  Its combinatorial factor a^T is the alternating sum over
spanning connected subgraphs of the incompatibility graph divided by the
multiset factorial; the cluster contributes a^T * t^{|X|} * e^{u m(X)} to
the log of the restricted partition function per unit volume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from . import geometry as geo
from .errors import Disconnected, ParamsOutOfRange
from .params import ModelParams, t1
from .perturbations import (
    Catalog,
    CatalogKey,
    Perturbation,
    get_catalog,
)
from .series import LaurentSeries

Site = tuple[int, int]


def _factorial(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


class ClusterSpace:
    """Pairwise incompatibility machinery over one catalog, with caches."""

    def __init__(self, catalog: Catalog):
        self.catalog = catalog
        self.perts = catalog.perturbations
        self._delta_cache: dict[tuple[int, int], tuple] = {}
        self._vertices = [
            sorted({v for b in p.bonds for v in geo.edge_vertices(b)})
            for p in self.perts
        ]

    def placed_compatible(self, i: int, j: int, delta: Site) -> bool:
        p, q = self.perts[i], self.perts[j]
        dx, dy = delta
        sup_p = p.support
        for x, y in q.cells:
            if (x + dx, y + dy) in sup_p:
                return False
        if p.ext_sign != q.ext_sign:
            return True
        # same external sign: perimeters must be disjoint after rounding
        shifted = frozenset(
            ((x1 + dx, y1 + dy), (x2 + dx, y2 + dy)) for (x1, y1), (x2, y2) in q.bonds
        )
        return not geo.perimeters_clash(p.bonds, shifted)

    def incompatible_deltas(self, i: int, j: int) -> tuple:
        """All offsets d for which pert j placed at d clashes with pert i at 0."""
        key = (i, j)
        got = self._delta_cache.get(key)
        if got is not None:
            return got
        p, q = self.perts[i], self.perts[j]
        cand = set()
        for x1, y1 in p.cells:
            for x2, y2 in q.cells:
                cand.add((x1 - x2, y1 - y2))
        if p.ext_sign == q.ext_sign:
            for v1 in self._vertices[i]:
                for v2 in self._vertices[j]:
                    cand.add((v1[0] - v2[0], v1[1] - v2[1]))
        out = tuple(sorted(d for d in cand if not self.placed_compatible(i, j, d)))
        self._delta_cache[key] = out
        return out


Occurrence = tuple[int, Site]  # (catalog index, offset)


def _canonical_occurrences(occs) -> tuple[Occurrence, ...]:
    occs = sorted(occs, key=lambda o: (o[1][1], o[1][0], o[0]))
    (i0, (ax, ay)) = occs[0]
    if ax == 0 and ay == 0:
        return tuple(occs)
    return tuple((i, (x - ax, y - ay)) for i, (x, y) in occs)


@dataclass(frozen=True)
class Cluster:
    occurrences: tuple[Occurrence, ...]  # canonical: first offset at origin
    norm: int
    contacts: int
    a_t: Fraction

    @property
    def size(self) -> int:
        return len(self.occurrences)


_AT_GRAPH_CACHE: dict[tuple, Fraction] = {}


def _a_t_from_edges(r: int, edges: frozenset, multiplicity_factorial: int) -> Fraction:
    key = (r, edges, multiplicity_factorial)
    got = _AT_GRAPH_CACHE.get(key)
    if got is not None:
        return got
    edge_list = sorted(edges)
    total = 0
    full = (1 << r) - 1
    for k in range(len(edge_list) + 1):
        for sub in combinations(edge_list, k):
            # spanning and connected over vertices 0..r-1
            reach = 1
            frontier = [0]
            adj = [0] * r
            for a, b in sub:
                adj[a] |= 1 << b
                adj[b] |= 1 << a
            while frontier:
                v = frontier.pop()
                new = adj[v] & ~reach
                while new:
                    low = new & -new
                    reach |= low
                    frontier.append(low.bit_length() - 1)
                    new ^= low
            if reach == full:
                total += -1 if k % 2 else 1
    out = Fraction(total, multiplicity_factorial)
    _AT_GRAPH_CACHE[key] = out
    return out


def truncated_factor(space: ClusterSpace, occs) -> Fraction:
    """a^T(X) = (X!)^-1 sum over spanning connected subgraphs of (-1)^edges."""
    r = len(occs)
    if r == 1:
        return Fraction(1)
    edges = set()
    for a in range(r):
        ia, (xa, ya) = occs[a]
        for b in range(a + 1, r):
            ib, (xb, yb) = occs[b]
            if not space.placed_compatible(ia, ib, (xb - xa, yb - ya)):
                edges.add((a, b))
    # connectivity of g(X) is required
    adj = {a: set() for a in range(r)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != r:
        raise Disconnected("incompatibility graph is not connected")
    counts: dict[Occurrence, int] = {}
    for o in occs:
        counts[o] = counts.get(o, 0) + 1
    mult_fact = 1
    for c in counts.values():
        mult_fact *= _factorial(c)
    return _a_t_from_edges(r, frozenset(edges), mult_fact)


def enumerate_clusters(space: ClusterSpace, order: int) -> list[Cluster]:
    """All clusters, up to translation, with total weight order <= `order`.

    Growth by incompatibility adjacency with canonical dedup: every
    connected multiset is reachable by removing a non-cut occurrence, so
    breadth-first extension from singletons is complete.
    """
    perts = space.perts
    norms = [p.norm for p in perts]
    contacts = [p.contacts for p in perts]
    out: list[Cluster] = []
    seen: set = set()
    frontier: list[tuple[tuple[Occurrence, ...], int, int]] = []
    for i, p in enumerate(perts):
        if norms[i] <= order:
            occs = ((i, (0, 0)),)
            out.append(Cluster(occs, norms[i], contacts[i], Fraction(1)))
            if norms[i] + 2 <= order:
                frontier.append((occs, norms[i], contacts[i]))
    min_norm = min(norms) if norms else 0
    partner_pool = [i for i, nv in enumerate(norms) if nv + min_norm <= order]
    while frontier:
        nxt = []
        for occs, norm, m in frontier:
            budget = order - norm
            for i, (xa, ya) in set(occs):
                for j in partner_pool:
                    if norms[j] > budget:
                        continue
                    for dx, dy in space.incompatible_deltas(i, j):
                        new_occ = (j, (xa + dx, ya + dy))
                        new_occs = _canonical_occurrences(occs + (new_occ,))
                        if new_occs in seen:
                            continue
                        seen.add(new_occs)
                        a_t = truncated_factor(space, new_occs)
                        cl = Cluster(new_occs, norm + norms[j], m + contacts[j], a_t)
                        out.append(cl)
                        if cl.norm + min_norm <= order:
                            nxt.append((new_occs, cl.norm, cl.contacts))
        frontier = nxt
    return out


_SPACE_CACHE: dict[CatalogKey, ClusterSpace] = {}
_CLUSTER_CACHE: dict[tuple[CatalogKey, int], list[Cluster]] = {}


def get_space(key: CatalogKey) -> ClusterSpace:
    got = _SPACE_CACHE.get(key)
    if got is None:
        got = ClusterSpace(get_catalog(key))
        _SPACE_CACHE[key] = got
    return got


def get_clusters(key: CatalogKey) -> list[Cluster]:
    ckey = (key, key.order)
    got = _CLUSTER_CACHE.get(ckey)
    if got is None:
        got = enumerate_clusters(get_space(key), key.order)
        _CLUSTER_CACHE[ckey] = got
    return got


def cluster_sum_series(key: CatalogKey) -> LaurentSeries:
    """Per-site sum over clusters anchored anywhere: S_h = sum a^T t^|X| e^{u m(X)}."""
    s = LaurentSeries(key.order)
    for cl in get_clusters(key):
        s.add_term(cl.norm, cl.contacts, cl.a_t)
    return s


def free_energy(level: int, k: int, order: int) -> LaurentSeries:
    """Truncated restricted free energy f_k(level) = -u delta(level) - S_level."""
    key = CatalogKey(k=k, level=level, order=order)
    s = cluster_sum_series(key)
    out = LaurentSeries(order, u_linear=Fraction(-1) if level == 0 else Fraction(0))
    for (p, m), c in s.coeffs.items():
        out.add_term(p, m, -c)
    return out


@dataclass
class CoefficientReport:
    """Named leading coefficients extracted from cluster sums.

    Cells c_h(p, m) are per-site cluster-sum coefficients at external level
    h.  A and C sit in clean cells; E, I are read at level h+1; G needs the
    lifted-and-extended images of the level-h (3h,1) cell subtracted;
    B1/D1 are the (2h+1,1) and (3h+1,2) cells; the L4m(1) row lives at
    level 1, order-4 cells.
    """

    h: int
    order: int
    values: dict = field(default_factory=dict)
    computable: dict = field(default_factory=dict)

    def ok(self, expected: dict) -> bool:
        return all(
            self.computable.get(name) and self.values.get(name) == Fraction(value)
            for name, value in expected.items()
        )


def extract_coefficients(h: int, k: int, order: int) -> CoefficientReport:
    rep = CoefficientReport(h=h, order=order)
    s_h = cluster_sum_series(CatalogKey(k=k, level=h, order=order))

    def put(name, needed_order, value):
        rep.computable[name] = needed_order <= order
        if rep.computable[name]:
            rep.values[name] = value

    put("A", 2 * h, s_h.coeff(2 * h, 1))
    put("C", 3 * h, s_h.coeff(3 * h, 2))
    put("B1", 2 * h + 1, s_h.coeff(2 * h + 1, 1))
    put("D1", 3 * h + 1, s_h.coeff(3 * h + 1, 2))
    up_needed = max(2 * h + 2, 3 * h + 2, 3 * h + 3)
    if up_needed <= order:
        s_up = cluster_sum_series(CatalogKey(k=k, level=h + 1, order=order))
        put("E", 2 * h + 2, s_up.coeff(2 * h + 2, 1))
        put("I", 3 * h + 3, s_up.coeff(3 * h + 3, 2))
        # remove the lifted-and-extended images of level-h one-contact
        # clusters of order 3h, which share the (3h+2, 1) cell with G
        put("G", 3 * h + 2, s_up.coeff(3 * h + 2, 1) - s_h.coeff(3 * h, 1))
    else:
        rep.computable["E"] = rep.computable["I"] = rep.computable["G"] = False
    if h == 1:
        put("L42", 4, s_h.coeff(4, 2))
        put("L43", 4, s_h.coeff(4, 3))
        put("L44", 4, s_h.coeff(4, 4))
        put("L45", 4, s_h.coeff(4, 5))  # isoperimetric vanishing: must be 0
    return rep


def free_energy_difference(h: int, k: int, order: int) -> LaurentSeries:
    """f_k(h+1) - f_k(h), exact to the common truncation order."""
    return free_energy(h + 1, k, order) - free_energy(h, k, order)


def reference_difference_h0(order: int) -> LaurentSeries:
    """The closed form u - t^2(1+e^u-e^-u) - 2t^3(1+e^2u-e^-2u), truncated."""
    s = LaurentSeries(order, u_linear=Fraction(1))
    for p, m, c in (
        (2, 0, -1),
        (2, 1, -1),
        (2, -1, 1),
        (3, 0, -2),
        (3, 2, -2),
        (3, -2, 2),
    ):
        s.add_term(p, m, Fraction(c))
    return s


@dataclass
class DominanceReport:
    level: int
    values: dict
    margins: dict
    series_trusted: bool


def dominant_level(
    params: ModelParams, k: int, order: int, h_max: int
) -> DominanceReport:
    """Level h in 0..h_max minimizing the truncated f_k(h) at (t, u).

    Levels are compared through exactly-differenced series, so margins far
    below the scale of f itself survive float evaluation.  Ties break to
    the smaller level.  u above sqrt(t) is outside the window regime the
    series is built for and raises; t above the trust radius t1(k) only
    clears the `series_trusted` flag.
    """
    t, u = params.t, params.u
    if u > math.sqrt(t) * (1 + 1e-12):
        raise ParamsOutOfRange(f"u={u} exceeds sqrt(t)={math.sqrt(t)}")
    d = [free_energy_difference(h, k, order).evaluate(t, u) for h in range(h_max)]

    def gap(lo: int, hi: int) -> float:
        """f(hi) - f(lo) for lo <= hi, summed over the small differences only
        so margins far below |f| survive."""
        return math.fsum(d[lo:hi])

    best = 0
    for h in range(1, h_max + 1):
        # f(h) - f(best); strict improvement moves the minimum (ties keep
        # the smaller level)
        if gap(best, h) < 0:
            best = h
    margins = {
        h: (gap(best, h) if h >= best else -gap(h, best)) for h in range(h_max + 1)
    }
    f0 = free_energy(0, k, order).evaluate(t, u)
    values = {h: f0 + gap(0, h) for h in range(h_max + 1)}
    return DominanceReport(
        level=best,
        values=values,
        margins=margins,
        series_trusted=t < t1(k),
    )


@dataclass
class ConvergenceReport:
    t: float
    u: float
    s: float
    rows: list  # (index, norm, contacts, mu_sum, mu_bound_ok, ratio)
    worst_ratio: float

    @property
    def all_ok(self) -> bool:
        return self.worst_ratio <= 1.0 and all(r[4] for r in self.rows)


def convergence_check(key: CatalogKey, params: ModelParams) -> ConvergenceReport:
    """Audit of the convergence condition with mu = phi_{s,0}, s = t e^{t^1/4}.

    For every cataloged perturbation: the truncated sum of mu over
    incompatible placements must stay below s^(1/2) |support|, and
    |phi(omega)| <= mu(omega) exp(-sum mu) must hold.  Failures are
    reported, not raised.
    """
    space = get_space(key)
    t, u, s = params.t, params.u, params.s
    n = len(space.perts)
    mu = [s ** p.norm for p in space.perts]
    rows = []
    worst = 0.0
    for i, p in enumerate(space.perts):
        mu_sum = 0.0
        for j in range(n):
            mu_sum += len(space.incompatible_deltas(i, j)) * mu[j]
        bound_ok = mu_sum <= math.sqrt(s) * len(p.cells)
        phi = t**p.norm * math.exp(u * p.contacts)
        ratio = phi / (mu[i] * math.exp(-mu_sum))
        worst = max(worst, ratio)
        rows.append((i, p.norm, p.contacts, mu_sum, bound_ok, ratio))
    return ConvergenceReport(t=t, u=u, s=s, rows=rows, worst_ratio=worst)
