import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import naive_diagrams
from toposeries.persistence import (
    DEFAULT_PRIME,
    FieldSpec,
    PersistenceDiagram,
    UnionFind,
    dumps,
    h0_unionfind,
    inv,
    is_prime,
    loads,
    mul,
    reduce,
    reduce_explicit,
    union,
)
from toposeries.rips import Filtration, FiltrationError, distance_matrix, rips_filtration


def ms(d):
    return Counter(map(tuple, d.pairs.tolist()))


class TestField:
    def test_default_prime(self):
        assert DEFAULT_PRIME == 6972593 and is_prime(DEFAULT_PRIME)

    def test_inverse(self):
        f = FieldSpec(7)
        assert [mul(a, inv(a, f), f) for a in range(1, 7)] == [1] * 6

    def test_zero_has_no_inverse(self):
        with pytest.raises(ZeroDivisionError):
            inv(0, FieldSpec(5))

    @pytest.mark.parametrize("p", [1, 4, 9, 6972591])
    def test_composite_rejected(self, p):
        with pytest.raises(ValueError):
            FieldSpec(p)

    def test_large_product_is_exact(self):
        f = FieldSpec()
        a = f.p - 1
        assert f.mul(a, a) == 1


class TestDiagram:
    def test_drops_zero_length_and_sorts(self):
        d = PersistenceDiagram(0, [(0, 2), (0, 0), (0, 1)])
        assert d.pairs.tolist() == [[0, 1], [0, 2]]

    def test_birth_after_death(self):
        with pytest.raises(ValueError):
            PersistenceDiagram(1, [(2, 1)])

    def test_union_adds_multiplicity(self):
        a = PersistenceDiagram(1, [(0, 1)])
        assert ms(union(a, a)) == Counter({(0.0, 1.0): 2})

    def test_json_roundtrip_with_infinity(self):
        ds = [PersistenceDiagram(0, [(0, 1), (0, math.inf)]), PersistenceDiagram(1)]
        text = dumps(ds)
        assert "null" in text
        assert loads(text) == ds


class TestReduction:
    def test_square(self):
        dm = distance_matrix(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float))
        h0, h1 = reduce(rips_filtration(dm))
        assert h1.pairs.tolist() == [[1.0, math.sqrt(2)]]
        assert h0.n_infinite == 1 and sorted(h0.deaths.tolist())[:3] == [1.0, 1.0, 1.0]

    def test_explicit_matches_implicit(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            dm = distance_matrix(rng.normal(size=(int(rng.integers(2, 14)), 3)))
            f = rips_filtration(dm)
            a = reduce(f, method="explicit")
            b = reduce(f, method="implicit")
            assert [ms(x) for x in a] == [ms(x) for x in b]

    def test_small_prime_same_as_default_on_rips(self):
        # Rips complexes of points in the plane have no torsion at this size
        dm = distance_matrix(np.random.default_rng(1).normal(size=(10, 2)))
        f = rips_filtration(dm)
        assert [ms(x) for x in reduce(f, FieldSpec(2))] == [ms(x) for x in reduce(f)]

    def test_hollow_tetrahedron_h2(self):
        # boundary of a 3-simplex: one 2-cycle, never filled
        verts = [(i,) for i in range(4)]
        edges = [(a, b) for a in range(4) for b in range(a + 1, 4)]
        tris = [(a, b, c) for a in range(4) for b in range(a + 1, 4) for c in range(b + 1, 4)]
        f = Filtration([(v, 0.0) for v in verts] + [(e, 1.0) for e in edges] + [(t, 2.0) for t in tris])
        h0, h1, h2 = reduce(f, top_dimension=True)
        assert h0.n_infinite == 1 and h1.pairs.tolist() == [[1.0, 2.0]] * 3
        assert h2.pairs.tolist() == [[2.0, math.inf]]

    def test_invalid_filtration(self):
        with pytest.raises(FiltrationError):
            reduce(Filtration([((0, 1), 0.0)]))

    def test_implicit_requires_rips(self):
        with pytest.raises(ValueError):
            reduce(Filtration([((0,), 0.0)]), method="implicit")

    def test_max_dim_zero(self):
        dm = distance_matrix(np.zeros((3, 1)) + np.arange(3)[:, None])
        (h0,) = reduce(rips_filtration(dm, max_dim=0))
        assert h0.n_infinite == 3

    def test_duplicate_points(self):
        pts = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
        h0, _ = reduce(rips_filtration(distance_matrix(pts)))
        assert h0.n_zero == 1
        assert ms(h0) == Counter({(0.0, 1.0): 1, (0.0, math.inf): 1})

    def test_tie_heavy_grid_against_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            pts = rng.integers(0, 3, (int(rng.integers(4, 11)), 3)).astype(float)
            dm = distance_matrix(pts)
            f = rips_filtration(dm)
            ref = naive_diagrams(dm.entries, 2, f.max_scale)
            got = reduce(f)
            assert ms(got[0]) == ref[0] and ms(got[1]) == ref[1]


class TestUnionFind:
    def test_structure(self):
        uf = UnionFind(4)
        assert uf.union(0, 1) and uf.union(2, 3) and uf.union(1, 3)
        assert not uf.union(0, 2)
        assert uf.find(0) == uf.find(3)

    def test_scale_cut_leaves_components(self):
        dm = distance_matrix(np.array([[0.0], [1.0], [5.0]]))
        d = h0_unionfind(dm, max_scale=2.0)
        assert d.n_infinite == 2


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 9), st.integers(1, 4)), elements=st.floats(-5, 5)))
def test_reduce_matches_oracle(pts):
    dm = distance_matrix(pts)
    f = rips_filtration(dm)
    ref = naive_diagrams(dm.entries, 2, f.max_scale)
    got = reduce(f)
    assert ms(got[0]) == ref[0] and ms(got[1]) == ref[1]
    assert ms(h0_unionfind(dm, f.max_scale)) == ref[0]


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 10), st.integers(1, 3)), elements=st.floats(-5, 5)))
def test_h0_has_one_infinite_bar_per_component(pts):
    dm = distance_matrix(pts)
    (h0, _) = reduce(rips_filtration(dm, max_scale=math.inf))
    assert h0.n_infinite == 1
    assert len(h0) + h0.n_zero == dm.n
