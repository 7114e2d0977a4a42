"""Dual-lattice geometry for level curves of integer height fields.

Cells are sites (x, y) of Z^2.  A dual vertex (i, j) stands for the point
(i+1/2, j+1/2); the four cells around it are SW=(i,j), SE=(i+1,j),
NW=(i,j+1), NE=(i+1,j+1).  A bond is an unordered pair of edge-adjacent
cells and is identified with the dual edge separating them.

Where four boundary edges meet at a dual vertex, the curve is split by
connecting south to west and north to east (rounded corners).  The two
little arcs cut off the SW and NE corners, so cells touching across the
NW-SE diagonal stay connected through the vertex while cells touching
across the SW-NE diagonal are pinched apart.  That asymmetry is what makes
the curve diagram of any height field decompose into simple closed curves.
"""

from __future__ import annotations

from functools import lru_cache

Site = tuple[int, int]
Bond = tuple[Site, Site]

N4 = ((1, 0), (-1, 0), (0, 1), (0, -1))
# NW-SE diagonal contacts: connected through a rounded crossing.
DIAG_CONNECT = ((1, -1), (-1, 1))
CONN = N4 + DIAG_CONNECT


def bond(a: Site, b: Site) -> Bond:
    return (a, b) if a <= b else (b, a)


def edge_vertices(b: Bond) -> tuple[tuple[int, int], tuple[int, int]]:
    """Endpoints (as dual vertices) of the dual edge separating the bond's cells."""
    (x1, y1), (x2, y2) = b
    if y1 == y2:  # horizontally adjacent cells -> vertical dual edge at x1+1/2
        return (x1, y1 - 1), (x1, y1)
    # vertically adjacent cells -> horizontal dual edge at y1+1/2
    return (x1 - 1, y1), (x1, y1)


def _vertex_dirs(bonds) -> dict[tuple[int, int], dict[str, Bond]]:
    """Map dual vertex -> {direction: incident bond} for the given edge set.

    Directions are those of the dual edge as seen from the vertex:
    N separates cells (i,j+1),(i+1,j+1); S separates (i,j),(i+1,j);
    E separates (i+1,j),(i+1,j+1); W separates (i,j),(i,j+1).
    """
    out: dict[tuple[int, int], dict[str, Bond]] = {}
    for b in bonds:
        (x1, y1), (x2, y2) = b
        if y1 == y2:  # vertical dual edge, vertices (x1,y1-1)-(x1,y1)
            out.setdefault((x1, y1 - 1), {})["N"] = b
            out.setdefault((x1, y1), {})["S"] = b
        else:  # horizontal dual edge, vertices (x1-1,y1)-(x1,y1)
            out.setdefault((x1 - 1, y1), {})["E"] = b
            out.setdefault((x1, y1), {})["W"] = b
    return out


def split_rounded_curves(bonds) -> list[frozenset]:
    """Split an even-degree dual edge set into closed curves, rounding corners.

    At a four-valent vertex the south edge joins the west edge and the north
    edge joins the east edge.  Raises ValueError on odd-degree vertices
    (impossible for level diagrams of a height field).
    """
    bonds = set(bonds)
    if not bonds:
        return []
    parent: dict[Bond, Bond] = {b: b for b in bonds}

    def find(b):
        while parent[b] is not b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        return b

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra is not rb:
            parent[ra] = rb

    for v, dirs in _vertex_dirs(bonds).items():
        if len(dirs) == 2:
            d1, d2 = dirs.values()
            union(d1, d2)
        elif len(dirs) == 4:
            union(dirs["S"], dirs["W"])
            union(dirs["N"], dirs["E"])
        else:
            raise ValueError(f"odd vertex degree {len(dirs)} at {v}")
    groups: dict[Bond, set] = {}
    for b in bonds:
        groups.setdefault(find(b), set()).add(b)
    return [frozenset(g) for g in groups.values()]


def enclosed_cells(bonds) -> frozenset:
    """Cells enclosed by a union of closed dual curves (even-odd rule).

    A cell (x, y) is inside iff an odd number of vertical dual edges of the
    curve lie to its west in row y.
    """
    rows: dict[int, list[int]] = {}
    for (x1, y1), (x2, y2) in bonds:
        if y1 == y2:  # vertical dual edge between (x1,y1) and (x1+1,y1)
            rows.setdefault(y1, []).append(x1)
    cells = set()
    for y, xs in rows.items():
        xs.sort()
        if len(xs) % 2:
            raise ValueError("open curve: odd number of crossings in a row")
        for i in range(0, len(xs), 2):
            for x in range(xs[i] + 1, xs[i + 1] + 1):
                cells.add((x, y))
    return frozenset(cells)


@lru_cache(maxsize=200_000)
def boundary_bonds(cells: frozenset) -> frozenset:
    """Dual edges separating `cells` from its complement."""
    out = set()
    for c in cells:
        x, y = c
        for dx, dy in N4:
            d = (x + dx, y + dy)
            if d not in cells:
                out.add(bond(c, d))
    return frozenset(out)


@lru_cache(maxsize=200_000)
def is_valid_interior(cells: frozenset) -> bool:
    """True iff the boundary of `cells` rounds to a single simple closed curve
    enclosing exactly `cells` (connected under the rounding rule, no holes)."""
    if not cells:
        return False
    try:
        loops = split_rounded_curves(boundary_bonds(cells))
    except ValueError:
        return False
    return len(loops) == 1 and enclosed_cells(loops[0]) == cells


def conn_components(cells) -> list[set]:
    """Components under edge adjacency plus the NW-SE diagonal contact."""
    cells = set(cells)
    comps = []
    while cells:
        seed = cells.pop()
        comp = {seed}
        frontier = [seed]
        while frontier:
            x, y = frontier.pop()
            for dx, dy in CONN:
                q = (x + dx, y + dy)
                if q in cells:
                    cells.remove(q)
                    comp.add(q)
                    frontier.append(q)
        comps.append(comp)
    return comps


def fill_holes(cells) -> frozenset:
    """Add the finite complement components of `cells` (holes)."""
    cells = set(cells)
    if not cells:
        return frozenset()
    xs = [x for x, _ in cells]
    ys = [y for _, y in cells]
    x0, x1 = min(xs) - 1, max(xs) + 1
    y0, y1 = min(ys) - 1, max(ys) + 1
    outside = set()
    frontier = [(x0, y0)]
    outside.add((x0, y0))
    while frontier:
        x, y = frontier.pop()
        for dx, dy in CONN:
            q = (x + dx, y + dy)
            if x0 <= q[0] <= x1 and y0 <= q[1] <= y1 and q not in outside and q not in cells:
                outside.add(q)
                frontier.append(q)
    filled = set(cells)
    for x in range(x0, x1 + 1):
        for y in range(y0, y1 + 1):
            if (x, y) not in outside:
                filled.add((x, y))
    return frozenset(filled)


def l1_diameter(bonds) -> int:
    """l1 diameter of the dual vertices of an edge set."""
    s_min = d_min = 10**9
    s_max = d_max = -(10**9)
    for b in bonds:
        for i, j in edge_vertices(b):
            s = i + j
            d = i - j
            s_min = min(s_min, s)
            s_max = max(s_max, s)
            d_min = min(d_min, d)
            d_max = max(d_max, d)
    return max(s_max - s_min, d_max - d_min)


def _deg2_vertex_pairs(bonds) -> dict[tuple[int, int], frozenset]:
    """Direction pairs at vertices where the curve passes once.

    Four-valent vertices are omitted: any other curve through such a vertex
    necessarily shares one of the four edges, which is caught by the bond
    intersection test.
    """
    out = {}
    for v, dirs in _vertex_dirs(bonds).items():
        if len(dirs) == 2:
            out[v] = frozenset(dirs)
    return out


_SW = frozenset(("S", "W"))
_NE = frozenset(("N", "E"))


@lru_cache(maxsize=200_000)
def _clash_data(bonds: frozenset):
    return _deg2_vertex_pairs(bonds)


def perimeters_clash(bonds_a: frozenset, bonds_b: frozenset) -> bool:
    """True iff two closed curves intersect after rounding.

    They intersect when they share a dual edge, or pass through a common
    vertex with any direction pairing other than {S,W} against {N,E} (the
    one split the rounding convention resolves).
    """
    if bonds_a & bonds_b:
        return True
    pa = _clash_data(bonds_a)
    pb = _clash_data(bonds_b)
    if len(pb) < len(pa):
        pa, pb = pb, pa
    for v, pair_a in pa.items():
        pair_b = pb.get(v)
        if pair_b is None:
            continue
        if not ((pair_a == _SW and pair_b == _NE) or (pair_a == _NE and pair_b == _SW)):
            return True
    return False


_PAIRING = {"S": "W", "W": "S", "N": "E", "E": "N"}


def trace_path(bonds) -> list[tuple[int, int]]:
    """Canonical vertex walk of a single rounded closed curve.

    Starts at the lexicographically least dual vertex, oriented
    counterclockwise (positive signed area).  Four-valent vertices appear
    twice.  Intended for debugging and serialization.
    """
    dirs_at = _vertex_dirs(set(bonds))

    def dir_of(b: Bond, v) -> str:
        for d, bb in dirs_at[v].items():
            if bb == b:
                return d
        raise ValueError("vertex not on bond")

    start = min(dirs_at)
    start_dir = sorted(dirs_at[start])[0]
    walk = [start]
    v, d_out = start, start_dir
    while True:
        b = dirs_at[v][d_out]
        v1, v2 = edge_vertices(b)
        v_next = v2 if v1 == v else v1
        d_arrive = dir_of(b, v_next)
        dirs = dirs_at[v_next]
        if len(dirs) == 2:
            d_next = next(d for d in dirs if d != d_arrive)
        else:
            d_next = _PAIRING[d_arrive]
        if v_next == start and d_next == start_dir:
            break
        walk.append(v_next)
        v, d_out = v_next, d_next
        if len(walk) > 2 * len(bonds) + 4:
            raise ValueError("trace did not close")
    # orient counterclockwise
    area2 = 0
    for (x1, y1), (x2, y2) in zip(walk, walk[1:] + walk[:1]):
        area2 += x1 * y2 - x2 * y1
    if area2 < 0:
        walk = [walk[0]] + walk[:0:-1]
    return walk
