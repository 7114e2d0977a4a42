"""Contour layer: splitting, decomposition, supports, and the weight identity."""

import random

import pytest

from soswall.contours import (
    Contour,
    SignContext,
    contour_decompose,
    contour_weight,
    restricted_partition,
    split_large,
    is_large,
)
from soswall.cylinders import Cylinder
from soswall.errors import NotLargeSet, RegionTooLarge
from soswall.params import ModelParams


def rect(x0, y0, w, h):
    return frozenset((x, y) for x in range(x0, x0 + w) for y in range(y0, y0 + h))


PARAMS = ModelParams(t=0.05, u=0.01)


class TestSplitAndDecompose:
    def test_all_elementary(self):
        g = Cylinder(rect(0, 0, 2, 2), 0, 1)
        large, small = split_large([g], k=8)
        assert large == [] and small == [g]

    def test_mixed_split_re_merges(self):
        big = Cylinder(rect(0, 0, 6, 6), 0, 1)
        pit = Cylinder(rect(2, 2, 1, 1), 1, 0)
        large, small = split_large([big, pit], k=1)
        assert large == [big] and small == [pit]
        assert sorted(large + small, key=id) == sorted([big, pit], key=id)

    def test_single_large_cylinder(self):
        g = Cylinder(rect(0, 0, 5, 5), 0, 1)
        (c,) = contour_decompose([g], level=0, k=0)
        assert c.external is g and c.middles == () and c.internals == ()

    def test_tower_with_internal_return(self):
        ext = Cylinder(rect(0, 0, 5, 5), 1, 2)
        inner = Cylinder(rect(1, 1, 3, 3), 2, 1)
        (c,) = contour_decompose([ext, inner], level=1, k=0)
        assert c.internals == (inner,)

    def test_two_disjoint_externals(self):
        g1 = Cylinder(rect(0, 0, 4, 4), 0, 1)
        g2 = Cylinder(rect(6, 0, 4, 4), 0, 2)
        cs = contour_decompose([g1, g2], level=0, k=0)
        assert len(cs) == 2

    def test_internal_restarts_new_contour(self):
        ext = Cylinder(rect(0, 0, 7, 7), 0, 1)
        ret = Cylinder(rect(1, 1, 5, 5), 1, 0)  # returns to the level
        deep = Cylinder(rect(2, 2, 3, 3), 0, 2)  # new contour inside
        cs = contour_decompose([ext, ret, deep], level=0, k=0)
        assert len(cs) == 2
        outer = next(c for c in cs if c.external is ext)
        assert outer.internals == (ret,)
        inner = next(c for c in cs if c.external is deep)
        assert inner.middles == () and inner.internals == ()

    def test_decompose_order_invariant(self):
        ext = Cylinder(rect(0, 0, 7, 7), 0, 1)
        ret = Cylinder(rect(1, 1, 5, 5), 1, 0)
        deep = Cylinder(rect(2, 2, 3, 3), 0, 2)
        ref = contour_decompose([ext, ret, deep], level=0, k=0)
        for _ in range(5):
            cyls = [ext, ret, deep]
            random.Random(_).shuffle(cyls)
            got = contour_decompose(cyls, level=0, k=0)
            assert [(c.external, c.middles, c.internals) for c in got] == [
                (c.external, c.middles, c.internals) for c in ref
            ]

    def test_not_large_rejected(self):
        g = Cylinder(rect(0, 0, 2, 2), 0, 1)
        with pytest.raises(NotLargeSet):
            contour_decompose([g], level=0, k=8)


class TestSupports:
    def test_partition_identity(self):
        ext = Cylinder(rect(0, 0, 7, 7), 0, 1)
        mid = Cylinder(rect(1, 1, 5, 5), 1, 3)
        ret = Cylinder(rect(2, 2, 2, 2), 3, 0)
        c = Contour(external=ext, middles=(mid,), internals=(ret,), level=0)
        assert c.support_partition_ok()
        assert c.support == ext.interior - ret.interior

    def test_boundary_of_support(self):
        from soswall import geometry as geo

        ext = Cylinder(rect(0, 0, 6, 6), 0, 1)
        ret = Cylinder(rect(2, 2, 2, 2), 1, 0)
        c = Contour(external=ext, middles=(), internals=(ret,), level=0)
        assert geo.boundary_bonds(c.support) == ext.bonds | ret.bonds


class TestRestrictedPartition:
    def test_empty_region(self):
        terms = restricted_partition(frozenset(), 1, 8, 4, SignContext((), ()))
        assert terms == {(0, 0): 1}

    def test_region_cap(self):
        with pytest.raises(RegionTooLarge):
            restricted_partition(rect(0, 0, 8, 8), 1, 8, 4, SignContext((), ()))

    def test_sign_condition_prunes(self):
        region = rect(0, 0, 3, 3)
        bounding = Cylinder(rect(0, 0, 3, 3), 0, 1)
        free = restricted_partition(region, 1, 8, 4, SignContext((), ()))
        constrained = restricted_partition(
            region, 1, 8, 4, SignContext(inside_of=(bounding,), outside_of=())
        )
        assert sum(constrained.values()) < sum(free.values())


def random_contour(rng) -> Contour:
    n = rng.choice((0, 1))
    w = rng.randint(3, 5)
    h = rng.randint(3, 5 if w < 5 else 4)
    ei = rng.choice([v for v in range(0, 4) if v != n])
    ext = Cylinder(rect(0, 0, w, h), n, ei)
    middles = []
    internals = []
    if w >= 4 and h >= 4 and rng.random() < 0.7:
        iw = rng.randint(1, w - 2)
        ih = rng.randint(1, h - 2)
        inner = rect(1, 1, iw, ih)
        if rng.random() < 0.5:
            internals.append(Cylinder(inner, ei, n))
        else:
            v = rng.choice([v for v in range(0, 4) if v not in (ei, n)])
            middles.append(Cylinder(inner, ei, v))
    return Contour(external=ext, middles=tuple(middles), internals=tuple(internals), level=n)


class TestWeightIdentity:
    def test_t_to_zero_limit(self):
        # with an empty decoration catalog contribution the weight tends to
        # t^{|Gamma|} times the plateau prefactors
        c = Contour(external=Cylinder(rect(0, 0, 3, 3), 1, 0), middles=(), internals=(), level=1)
        p = ModelParams(t=1e-4, u=0.3)
        w = contour_weight(c, p, k=8, order=2)
        bare = p.t ** (c.norm2 // 2) * __import__("math").exp(p.u * 9)
        assert abs(w.direct - bare) / bare < 0.05
        assert w.relative_gap < 1e-10

    def test_spec_square_example(self):
        c = Contour(external=Cylinder(rect(0, 0, 5, 5), 1, 0), middles=(), internals=(), level=1)
        w = contour_weight(c, PARAMS, k=8, order=5)
        assert w.relative_gap < 1e-10

    def test_nested_example(self):
        c = Contour(
            external=Cylinder(rect(0, 0, 5, 5), 1, 2),
            middles=(),
            internals=(Cylinder(rect(1, 1, 3, 3), 2, 1),),
            level=1,
        )
        w = contour_weight(c, PARAMS, k=8, order=5)
        assert w.relative_gap < 1e-10

    def test_randomized_corpus(self):
        rng = random.Random(2024)
        seen = 0
        while seen < 12:  # the acceptance suite runs the full 50
            c = random_contour(rng)
            w = contour_weight(c, PARAMS, k=8, order=4)
            assert w.relative_gap < 1e-10, c
            assert c.support_partition_ok()
            seen += 1
