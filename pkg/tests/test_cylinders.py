"""Cylinder geometry: rounding, compatibility, the bijection, and weights."""

import math
import random

import pytest

from soswall import geometry as geo
from soswall.cylinders import (
    Cylinder,
    CylinderSet,
    compatible,
    cylinder_weight,
    decompose,
    decompose_heights,
    reconstruct,
    separated,
    serialize,
    total_weight,
    weight_exponents,
)
from soswall.errors import IncompatibleSet, NegativeHeight
from soswall.lattice import Box, HeightConfig, energy
from soswall.params import ModelParams


def cyl(cells, E, I):
    return Cylinder(frozenset(cells), E, I)


UNIT = [(0, 0)]
PARAMS = ModelParams(t=0.1, u=0.3)


class TestInteriorValidity:
    def test_single_cell(self):
        assert geo.is_valid_interior(frozenset(UNIT))

    def test_nw_se_diagonal_pair_is_one_curve(self):
        # rounding connects cells touching across the NW-SE diagonal
        assert geo.is_valid_interior(frozenset([(0, 1), (1, 0)]))

    def test_sw_ne_diagonal_pair_is_not(self):
        assert not geo.is_valid_interior(frozenset([(0, 0), (1, 1)]))

    def test_hole_rejected(self):
        ring = {(x, y) for x in range(3) for y in range(3)} - {(1, 1)}
        assert not geo.is_valid_interior(frozenset(ring))

    def test_perimeter_lengths(self):
        assert len(geo.boundary_bonds(frozenset(UNIT))) == 4
        assert len(geo.boundary_bonds(frozenset([(0, 0), (1, 0)]))) == 6
        assert len(geo.boundary_bonds(frozenset([(0, 1), (1, 0)]))) == 8

    def test_trace_path_closes(self):
        walk = geo.trace_path(geo.boundary_bonds(frozenset([(0, 1), (1, 0)])))
        assert len(walk) == 8
        assert walk[0] == min(walk)


class TestCompatibility:
    def test_identical_interiors_incompatible(self):
        assert not compatible(cyl(UNIT, 1, 2), cyl(UNIT, 2, 1))

    def test_disjoint_same_sign_clean(self):
        g1 = cyl([(0, 0)], 1, 2)
        g2 = cyl([(3, 3)], 1, 2)
        assert compatible(g1, g2)

    def test_disjoint_same_sign_touching_perimeters(self):
        g1 = cyl([(0, 0)], 1, 2)
        g2 = cyl([(1, 0)], 1, 2)
        assert not compatible(g1, g2)

    def test_disjoint_opposite_sign_touching_ok(self):
        g1 = cyl([(0, 0)], 1, 2)
        g2 = cyl([(1, 0)], 1, 0)
        assert compatible(g1, g2)

    def test_sw_ne_corner_same_sign_ok(self):
        # rounded apart, perimeters do not intersect
        g1 = cyl([(0, 0)], 1, 0)
        g2 = cyl([(1, 1)], 1, 0)
        assert compatible(g1, g2)

    def test_nw_se_corner_same_sign_clash(self):
        g1 = cyl([(0, 1)], 1, 0)
        g2 = cyl([(1, 0)], 1, 0)
        assert not compatible(g1, g2)

    def test_figure5_left_pair(self):
        # big base at n -> n+1 with an inner base dug to n-1: opposite signs
        # and nested interiors, so the perimeters must be disjoint after
        # rounding; strictly interior placement qualifies
        n = 1
        big = {(x, y) for x in range(4) for y in range(4)}
        inner = {(1, 1), (2, 1), (1, 2), (2, 2)}
        g1 = cyl(big, n, n + 1)
        g2 = cyl(inner, n + 1, n - 1)
        assert compatible(g1, g2)

    def test_nested_corner_touch_resolved_by_rounding(self):
        # inner perimeter meeting a notched outer perimeter at one dual
        # vertex: the {S,W}/{N,E} passage is resolved by rounding, any other
        # passage crosses
        square = {(x, y) for x in range(3) for y in range(3)}
        outer_ne_notch = cyl(square - {(2, 2)}, 1, 2)
        inner = cyl([(1, 1)], 2, 0)
        assert compatible(outer_ne_notch, inner)
        outer_se_notch = cyl(square - {(2, 0)}, 1, 2)
        assert not compatible(outer_se_notch, inner)

    def test_levels_must_chain(self):
        outer = cyl({(x, y) for x in range(3) for y in range(3)}, 1, 2)
        assert compatible(cyl([(1, 1)], 2, 3), outer)
        assert not compatible(cyl([(1, 1)], 1, 3), outer)

    def test_separated(self):
        small = cyl([(1, 1)], 2, 3)
        mid = cyl({(x, y) for x in range(3) for y in range(3)}, 1, 2)
        big = cyl({(x, y) for x in range(-1, 4) for y in range(-1, 4)}, 0, 1)
        far = cyl([(9, 9)], 0, 1)
        assert separated(small, big, by=mid)
        assert separated(small, far, by=mid)
        assert not separated(small, big, by=small)
        assert not separated(mid, big, by=mid)


class TestDecompose:
    def test_flat_is_empty(self):
        box = Box(3, 3, boundary_level=2)
        cfg = HeightConfig(box, (2,) * 9)
        assert decompose(cfg).cylinders == ()

    def test_single_raised_site(self):
        box = Box(3, 3, boundary_level=1)
        hs = [1] * 9
        hs[box.site_index((1, 1))] = 2
        cs = decompose(HeightConfig(box, tuple(hs)))
        assert len(cs.cylinders) == 1
        g = cs.cylinders[0]
        assert g.interior == frozenset([(1, 1)]) and g.E == 1 and g.I == 2

    def test_tall_column_is_one_cylinder(self):
        cyls = decompose_heights({(0, 0): 3}, n=1)
        assert len(cyls) == 1
        assert cyls[0].E == 1 and cyls[0].I == 3

    def test_terrace(self):
        cyls = sorted(
            decompose_heights({(0, 0): 1, (1, 0): 2}, n=0),
            key=lambda g: len(g.interior),
        )
        assert len(cyls) == 2
        assert cyls[1].interior == frozenset([(0, 0), (1, 0)])
        assert (cyls[1].E, cyls[1].I) == (0, 1)
        assert cyls[0].interior == frozenset([(1, 0)])
        assert (cyls[0].E, cyls[0].I) == (1, 2)

    def test_crater(self):
        n = 1
        phi = {(x, y): 2 for x in range(3) for y in range(3)}
        phi[(1, 1)] = 0
        cyls = sorted(decompose_heights(phi, n), key=lambda g: len(g.interior))
        assert len(cyls) == 2
        pit, rim = cyls
        assert rim.E == 1 and rim.I == 2
        assert pit.interior == frozenset([(1, 1)]) and pit.E == 2 and pit.I == 0

    def test_figure5_right_two_diggings(self):
        # two disjoint pits below a raised plateau share the external level
        n = 2
        phi = {(0, 0): 1, (3, 0): 1}
        cyls = decompose_heights(phi, n)
        assert len(cyls) == 2
        assert all(g.E == n and g.I == 1 for g in cyls)

    def test_decompose_order_independent(self):
        box = Box(4, 4, boundary_level=1)
        rng = random.Random(7)
        hs = tuple(rng.randint(0, 3) for _ in range(16))
        c1 = decompose(HeightConfig(box, hs)).canonical()
        c2 = decompose(HeightConfig(box, hs[::-1][::-1])).canonical()
        assert c1 == c2


class TestRoundTrip:
    @pytest.mark.parametrize("seed", range(6))
    def test_random_round_trip(self, seed):
        rng = random.Random(seed)
        for _ in range(300):
            w, h = rng.randint(1, 5), rng.randint(1, 5)
            n = rng.randint(0, 3)
            box = Box(w, h, boundary_level=n)
            hs = tuple(rng.randint(0, 4) for _ in range(w * h))
            cfg = HeightConfig(box, hs)
            cs = decompose(cfg)
            back = reconstruct(cs, box)
            assert back == cfg
            assert decompose(back).canonical() == cs.canonical()

    def test_reconstruct_errors(self):
        box = Box(2, 2, boundary_level=0)
        with pytest.raises(IncompatibleSet):
            # external level of the set disagrees with the box boundary
            reconstruct(CylinderSet((cyl(UNIT, 1, 0),), 1), box)
        bad = CylinderSet((cyl(UNIT, 0, 1), cyl(UNIT, 1, 2)), 0)
        with pytest.raises(IncompatibleSet):
            reconstruct(bad, box)


class TestWeights:
    def test_unit_base_weight(self):
        g = cyl(UNIT, 1, 2)
        assert weight_exponents(g) == (2, 0)
        assert math.isclose(cylinder_weight(g, PARAMS), PARAMS.t**2)

    def test_unit_to_wall(self):
        n = 3
        g = cyl(UNIT, n, 0)
        assert weight_exponents(g) == (2 * n, 1)
        assert math.isclose(cylinder_weight(g, PARAMS), PARAMS.t ** (2 * n) * math.exp(PARAMS.u))

    def test_domino_to_wall(self):
        h = 2
        g = cyl([(0, 0), (1, 0)], h, 0)
        assert weight_exponents(g) == (3 * h, 2)

    def test_empty_set_weights(self):
        box0 = Box(3, 2, boundary_level=0)
        assert math.isclose(
            total_weight(CylinderSet((), 0), PARAMS, box0), math.exp(PARAMS.u * 6)
        )
        box1 = Box(3, 2, boundary_level=1)
        assert total_weight(CylinderSet((), 1), PARAMS, box1) == 1.0

    @pytest.mark.parametrize("seed", range(4))
    def test_weight_identity_random(self, seed):
        rng = random.Random(100 + seed)
        for _ in range(250):
            w, h = rng.randint(1, 4), rng.randint(1, 4)
            n = rng.randint(0, 3)
            box = Box(w, h, boundary_level=n)
            cfg = HeightConfig(box, tuple(rng.randint(0, 4) for _ in range(w * h)))
            cs = decompose(cfg)
            lhs = total_weight(cs, PARAMS, box)
            rhs = math.exp(-energy(cfg, PARAMS))
            assert math.isclose(lhs, rhs, rel_tol=1e-12)

    def test_serialize_stable(self):
        phi = {(0, 0): 1, (1, 0): 2}
        cyls = decompose_heights(phi, 0)
        text = serialize(CylinderSet(tuple(cyls), 0))
        assert text == "0 1 0,0 1,0\n1 2 1,0\n"
