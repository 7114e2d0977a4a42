"""Brute-force polymer gas of elementary perturbations on a small torus.

The restricted partition function (up to its plateau prefactor) is the sum
over pairwise-compatible sets of placed perturbations.  Enumerating those
sets directly, with exact integer counts per weight exponent, gives an
oracle for the cluster expansion: log Z per site must match the truncated
per-site cluster sum up to the first omitted order.

Placements wrap around the torus; compatibility is checked against every
periodic image that can reach.  A placement whose own images clash (its
support or perimeter wraps into itself) is excluded from the gas, which is
the polymer-model convention; on windows smaller than the largest support
in the catalog this visibly shifts the density, so comparisons should use
a window that the catalog fits in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .clusters import ClusterSpace, get_space
from .perturbations import CatalogKey


@dataclass
class GasResult:
    window: int
    norm_cap: int
    n_placements: int
    terms: dict  # (total norm, total contacts) -> exact subset count

    def log_z(self, t: float, u: float) -> float:
        small = math.fsum(
            c * t**p * math.exp(m * u)
            for (p, m), c in sorted(self.terms.items(), reverse=True)
            if (p, m) != (0, 0)
        )
        return math.log1p(small)

    def log_z_per_site(self, t: float, u: float) -> float:
        return self.log_z(t, u) / self.window**2


def formal_log_per_site(terms: dict, cells: int, t_max: int) -> dict:
    """Exact per-site log of a gas polynomial, truncated at t^t_max.

    Returns (p, m) -> Fraction.  Comparing this with the per-site cluster
    sum is the sharpest available consistency check: both sides are exact
    rationals, so agreement through the truncation order is all-or-nothing.
    """
    from fractions import Fraction

    a = {pm: Fraction(c) for pm, c in terms.items() if pm != (0, 0) and pm[0] <= t_max}
    out: dict = {}
    power = dict(a)
    k = 1
    sign = 1
    while power:
        for pm, c in power.items():
            out[pm] = out.get(pm, Fraction(0)) + Fraction(sign, k) * c
        k += 1
        sign = -sign
        nxt: dict = {}
        for (p1, m1), c1 in power.items():
            for (p2, m2), c2 in a.items():
                if p1 + p2 <= t_max:
                    key = (p1 + p2, m1 + m2)
                    nxt[key] = nxt.get(key, Fraction(0)) + c1 * c2
        power = nxt
    return {pm: c / cells for pm, c in out.items() if c}


def _images(window: int):
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            yield a * window, b * window


def torus_gas(key: CatalogKey, window: int, norm_cap: int | None = None) -> GasResult:
    """Enumerate all compatible placement sets with total order <= norm_cap."""
    if norm_cap is None:
        norm_cap = 2 * key.order + 1
    space: ClusterSpace = get_space(key)
    perts = space.perts
    norms = [p.norm for p in perts]
    contacts = [p.contacts for p in perts]

    classes = []
    for i in range(len(perts)):
        if norms[i] > norm_cap:
            continue
        self_deltas = space.incompatible_deltas(i, i)
        if any(img in self_deltas for img in _images(window) if img != (0, 0)):
            continue  # wraps into itself: not realizable as a torus polymer
        classes.append(i)

    # placements grouped by class, classes sorted by norm so a budget cutoff
    # is a prefix property of the placement indexing
    classes.sort(key=lambda i: norms[i])
    cells = window * window
    placements = [(i, (o % window, o // window)) for i in classes for o in range(cells)]
    n = len(placements)
    base = {i: ci * cells for ci, i in enumerate(classes)}
    pl_norm = [norms[i] for i, _ in placements]
    pl_m = [contacts[i] for i, _ in placements]

    # incompatibility is translation invariant: transfer each class-pair
    # delta set to all torus offsets at once
    incompat = [0] * n
    for ai, i in enumerate(classes):
        for j in classes:
            if norms[i] + norms[j] > norm_cap:
                continue  # never co-selected, mask irrelevant
            torus_deltas = {
                (dx % window, dy % window) for dx, dy in space.incompatible_deltas(i, j)
            }
            bj = base[j]
            for o in range(cells):
                ox, oy = o % window, o // window
                acc = 0
                for dx, dy in torus_deltas:
                    acc |= 1 << (bj + ((oy + dy) % window) * window + ((ox + dx) % window))
                incompat[base[i] + o] |= acc
    full = (1 << n) - 1
    compat_mask = [(full & ~m) & ~(1 << a) for a, m in enumerate(incompat)]

    # bits allowed at a given remaining budget: prefix masks by norm
    budget_mask = [0] * (norm_cap + 1)
    for idx in range(n):
        for b in range(pl_norm[idx], norm_cap + 1):
            budget_mask[b] |= 1 << idx

    terms: dict = {}

    def count(p_sum: int, m_sum: int) -> None:
        keypm = (p_sum, m_sum)
        terms[keypm] = terms.get(keypm, 0) + 1

    def rec(allowed: int, p_sum: int, m_sum: int) -> None:
        count(p_sum, m_sum)
        cand = allowed & budget_mask[norm_cap - p_sum]
        while cand:
            low = cand & -cand
            idx = low.bit_length() - 1
            cand ^= low
            # bits above idx only (ascending pops), so each subset comes once
            rec(cand & compat_mask[idx], p_sum + pl_norm[idx], m_sum + pl_m[idx])

    rec((1 << n) - 1, 0, 0)
    return GasResult(window=window, norm_cap=norm_cap, n_placements=n, terms=terms)
