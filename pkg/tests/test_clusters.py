"""Truncated functions, cluster sums, free energies, and their oracles."""

import math
from fractions import Fraction

import pytest

from soswall.clusters import (
    Cluster,
    ClusterSpace,
    CatalogKey,
    cluster_sum_series,
    convergence_check,
    dominant_level,
    enumerate_clusters,
    extract_coefficients,
    free_energy,
    free_energy_difference,
    get_clusters,
    get_space,
    reference_difference_h0,
    truncated_factor,
)
from soswall.errors import Disconnected, ParamsOutOfRange
from soswall.gas import formal_log_per_site, torus_gas
from soswall.params import ModelParams, t1
from soswall.perturbations import get_catalog
from soswall.series import LaurentSeries


def space(level, order, k=8) -> ClusterSpace:
    return get_space(CatalogKey(k=k, level=level, order=order))


def find_pert(sp, hmap, level):
    cells = tuple(sorted(hmap, key=lambda c: (c[1], c[0])))
    heights = tuple(hmap[c] for c in cells)
    for i, p in enumerate(sp.perts):
        if p.cells == cells and p.heights == heights:
            return i
    raise LookupError("perturbation not in catalog")


class TestTruncatedFactor:
    def test_singleton(self):
        sp = space(1, 4)
        i = find_pert(sp, {(0, 0): 0}, 1)
        assert truncated_factor(sp, ((i, (0, 0)),)) == 1

    def test_incompatible_pair(self):
        sp = space(1, 4)
        i = find_pert(sp, {(0, 0): 0}, 1)
        j = find_pert(sp, {(0, 0): 2}, 1)
        # same support: always incompatible
        assert truncated_factor(sp, ((i, (0, 0)), (j, (0, 0)))) == -1

    def test_multiplicity_two(self):
        sp = space(1, 4)
        i = find_pert(sp, {(0, 0): 0}, 1)
        assert truncated_factor(sp, ((i, (0, 0)), (i, (0, 0)))) == Fraction(-1, 2)

    def test_triangle(self):
        sp = space(1, 6)
        i = find_pert(sp, {(0, 0): 0}, 1)
        occs = ((i, (0, 0)), (i, (0, 0)), (i, (0, 0)))
        # K3 with multiplicity 3!: (edges - triangles...) brute value:
        # subsets of 3 edges that span and connect: 3 pairs (sign +) and the
        # triangle (sign -): (3 - 1)/6... compute against the formula
        got = truncated_factor(sp, occs)
        assert got == Fraction(3 - 1, 6) * (-1) ** 2 or got == Fraction(1, 3)
        # the exact value for a triple point is 1/3
        assert got == Fraction(1, 3)

    def test_distinct_triangle_is_plus_two(self):
        # three mutually incompatible distinct perturbations
        sp = space(1, 6)
        i = find_pert(sp, {(0, 0): 0}, 1)
        j = find_pert(sp, {(0, 0): 2}, 1)
        l = find_pert(sp, {(0, 0): 3}, 1)
        occs = ((i, (0, 0)), (j, (0, 0)), (l, (0, 0)))
        assert truncated_factor(sp, occs) == 2

    def test_disconnected_raises(self):
        sp = space(1, 4)
        i = find_pert(sp, {(0, 0): 0}, 1)
        with pytest.raises(Disconnected):
            truncated_factor(sp, ((i, (0, 0)), (i, (50, 50))))


def _log_coefficient(sp, occs) -> Fraction:
    """Independent a^T oracle: multivariate log of the finite compatibility
    polynomial over the distinct placed polymers of the cluster."""
    distinct = sorted(set(occs))
    mult = tuple(occs.count(o) for o in distinct)
    d = len(distinct)
    compat = {}
    for a in range(d):
        for b in range(a + 1, d):
            (ia, (xa, ya)), (ib, (xb, yb)) = distinct[a], distinct[b]
            compat[(a, b)] = sp.placed_compatible(ia, ib, (xb - xa, yb - ya))
    # Z as a polynomial over exponent vectors in {0,1}^d
    z = {}
    for mask in range(1 << d):
        bits = [a for a in range(d) if mask >> a & 1]
        if all(compat[(a, b)] for ai, a in enumerate(bits) for b in bits[ai + 1:]):
            exp = tuple(1 if a in bits else 0 for a in range(d))
            z[exp] = Fraction(1)
    # log(Z) to total degree sum(mult)
    deg = sum(mult)
    zero = tuple([0] * d)
    a_poly = {e: c for e, c in z.items() if e != zero}
    out = {}
    power = dict(a_poly)
    k, sign = 1, 1
    while power and k <= deg:
        for e, c in power.items():
            out[e] = out.get(e, Fraction(0)) + Fraction(sign, k) * c
        k += 1
        sign = -sign
        nxt = {}
        for e1, c1 in power.items():
            for e2, c2 in a_poly.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                if sum(e) <= deg:
                    nxt[e] = nxt.get(e, Fraction(0)) + c1 * c2
        power = nxt
    return out.get(mult, Fraction(0))


class TestTruncatedFactorOracle:
    @pytest.mark.parametrize("level,order", [(1, 6), (0, 6)])
    def test_against_log_expansion(self, level, order):
        sp = space(level, order)
        checked = 0
        for cl in get_clusters(CatalogKey(k=8, level=level, order=order)):
            if cl.size < 2 or cl.size > 4:
                continue
            want = _log_coefficient(sp, list(cl.occurrences))
            assert cl.a_t == want, f"a^T mismatch on {cl.occurrences}"
            checked += 1
        assert checked > 50


class TestEnumerateClusters:
    def test_below_minimum_is_empty(self):
        sp = space(3, 5)  # at level 3 the cheapest touching cost is 6 but
        # floating units exist at 2; check the genuinely empty case instead
        out = [c for c in enumerate_clusters(sp, 5) if c.contacts != 0]
        assert out == []

    def test_h1_order4_contents(self):
        key = CatalogKey(k=8, level=1, order=4)
        cls = get_clusters(key)
        singles = [c for c in cls if c.size == 1]
        pairs = [c for c in cls if c.size == 2]
        # the unit column appears as a singleton, and the doubled column as
        # a multiplicity-2 cluster
        assert any(c.norm == 2 and c.contacts == 1 for c in singles)
        assert any(
            c.norm == 4 and c.contacts == 2 and c.a_t == Fraction(-1, 2) for c in pairs
        )
        for c in cls:
            assert c.norm <= 4

    def test_cluster_cells_match_figure_counts(self):
        s1 = cluster_sum_series(CatalogKey(k=8, level=1, order=6))
        # the (4, 2) cell collects +1 (diagonal pair) -1/2 (doubled column)
        # -2 (edge-adjacent pairs) -1 (crossing diagonal pair)
        assert s1.coeff(4, 2) == Fraction(-5, 2)


class TestFreeEnergy:
    def test_f0_leading_terms(self):
        f0 = free_energy(0, 8, 3)
        assert f0.u_linear == -1
        assert f0.coeff(2, -1) == -1
        assert f0.coeff(3, -2) == -2
        assert len(f0.coeffs) == 2

    def test_equation_10(self):
        assert free_energy_difference(0, 8, 3) == reference_difference_h0(3)

    def test_h4_leading_cells_at_order9(self):
        s4 = cluster_sum_series(CatalogKey(k=8, level=4, order=9))
        assert s4.coeff(8, 1) == 1  # A at h=4
        assert s4.coeff(9, 1) == 4  # B1 at h=4

    def test_lift_extension_identities(self):
        # the (2h+2, 1) cell upstairs equals A; the (3h+2, 1) cell equals
        # G + B_h-images; both pinned at h=1
        rep = extract_coefficients(1, 8, 6)
        assert rep.values["A"] == 1
        assert rep.values["E"] == 1
        assert rep.values["G"] == 4
        assert rep.values["I"] == 2

    def test_dump_golden(self):
        assert free_energy(0, 8, 3).dump() == "u -1 1\n4 -1 -1 1\n6 -2 -2 1\n"

    def test_series_arithmetic(self):
        a = LaurentSeries(5)
        a.add_term(2, 1, Fraction(3, 2))
        b = LaurentSeries(5)
        b.add_term(2, 1, Fraction(1, 2))
        b.add_term(3, 0, Fraction(1))
        c = a - b
        assert c.coeff(2, 1) == 1 and c.coeff(3, 0) == -1
        assert (a + b).coeff(2, 1) == 2
        val = c.evaluate(0.1, 0.2)
        assert math.isclose(val, 0.01 * math.exp(0.2) - 0.001)


def window_mid(n, t, eps=1.0):
    lo = -math.log1p(-t * t) + (2 + eps) * t ** (n + 3)
    hi = math.sqrt(t) if n == 0 else -math.log1p(-t * t) + (2 - eps) * t ** (n + 2)
    return 0.5 * (lo + hi)


class TestDominantLevel:
    def test_window_edges_from_spec(self):
        t = 0.002
        u = -math.log1p(-t * t) + 3 * t**3
        rep = dominant_level(ModelParams(t=t, u=u), 8, 6, 3)
        assert rep.level == 0
        u_mid1 = math.sqrt(
            (-math.log1p(-t * t) + 3 * t**4) * (-math.log1p(-t * t) + t**3)
        )
        rep = dominant_level(ModelParams(t=t, u=u_mid1), 8, 6, 3)
        assert rep.level == 1
        rep = dominant_level(ModelParams(t=t, u=0.9 * math.sqrt(t)), 8, 6, 3)
        assert rep.level == 0

    def test_out_of_range(self):
        with pytest.raises(ParamsOutOfRange):
            dominant_level(ModelParams(t=0.01, u=0.5), 8, 4, 2)

    def test_trust_flag(self):
        rep = dominant_level(ModelParams(t=1e-7, u=1e-14), 8, 4, 2)
        assert rep.series_trusted
        rep = dominant_level(ModelParams(t=0.01, u=0.0001), 8, 4, 2)
        assert not rep.series_trusted


class TestConvergence:
    def test_small_t_all_ok(self):
        rep = convergence_check(CatalogKey(k=8, level=1, order=6), ModelParams(t=0.001, u=math.sqrt(0.001)))
        assert rep.all_ok
        assert rep.worst_ratio <= 1.0

    def test_large_t_flags_violations(self):
        rep = convergence_check(CatalogKey(k=8, level=1, order=4), ModelParams(t=0.2, u=0.0))
        assert not rep.all_ok

    def test_mu_dominates_phi_in_window(self):
        # phi <= mu pointwise when u <= sqrt(t)
        key = CatalogKey(k=8, level=1, order=5)
        params = ModelParams(t=0.004, u=math.sqrt(0.004))
        sp = get_space(key)
        s = params.s
        for p in sp.perts:
            phi = params.t**p.norm * math.exp(params.u * p.contacts)
            assert phi <= s**p.norm * (1 + 1e-12)


class TestGasOracle:
    """Exact-rational agreement between the torus gas log and the cluster
    sum through the truncation order; the decisive cross-check."""

    @pytest.mark.parametrize("level", [0, 1])
    def test_series_match(self, level):
        order = 5
        key = CatalogKey(k=8, level=level, order=order)
        gas = torus_gas(key, window=6, norm_cap=order)
        log_terms = formal_log_per_site(gas.terms, 36, order)
        s = cluster_sum_series(key)
        for pm in set(log_terms) | set(s.coeffs):
            if pm[0] <= order:
                assert log_terms.get(pm, Fraction(0)) == s.coeff(*pm), pm
