import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_betti
from toposeries.embedding import PointCloud
from toposeries.persistence import PersistenceDiagram, reduce
from toposeries.represent import (
    DiagramPointSet,
    SampledCurve,
    betti_curve,
    curve_to_text,
    expected_betti,
    impute_curve_median,
    landscape_fn,
    load_curve,
    persistence_entropy,
    silhouette,
    to_point_set,
    torus_rank_check,
    uniform_grid,
)
from toposeries.rips import distance_matrix, rips_filtration

bars = st.lists(
    st.tuples(st.floats(0, 10), st.floats(1e-3, 10)).map(lambda t: (t[0], t[0] + t[1])), min_size=1, max_size=12
)


class TestPointSet:
    def test_basic(self):
        ps = to_point_set(PersistenceDiagram(0, [(0, 2)]), 10.0)
        assert ps.points.tolist() == [[1.0, 1.0]]

    def test_square_bar(self):
        r2 = math.sqrt(2)
        ps = to_point_set(PersistenceDiagram(1, [(1, r2)]), 5.0)
        assert ps.points.tolist() == [[(1 + r2) / 2, (r2 - 1) / 2]]

    def test_infinite_substitute(self):
        ps = to_point_set(PersistenceDiagram(0, [(0, math.inf)]), 5.0)
        assert ps.points.tolist() == [[2.5, 2.5]]

    def test_substitute_too_small(self):
        with pytest.raises(ValueError):
            to_point_set(PersistenceDiagram(0, [(0, 3), (0, math.inf)]), 2.0)

    def test_halflife_positive(self):
        with pytest.raises(ValueError):
            DiagramPointSet([[1.0, 0.0]])


class TestLandscape:
    def test_tent(self):
        assert landscape_fn((0, 2), 1) == 1
        assert landscape_fn((0, 2), -1) == 0 and landscape_fn((0, 2), 3) == 0
        assert landscape_fn((1, 3), 1.5) == 0.5

    def test_vectorised(self):
        assert landscape_fn((0, 2), np.array([0.0, 0.5, 1.0, 2.0])).tolist() == [0, 0.5, 1, 0]

    @settings(max_examples=60, deadline=None)
    @given(st.floats(-100, 100), st.floats(0, 100))
    def test_peak_exact(self, b, length):
        d = b + length
        assert landscape_fn((b, d), (b + d) / 2) == (d - b) / 2


class TestSilhouette:
    def test_single_bar_is_tent(self):
        grid = np.linspace(0, 2, 9)
        for power in (0.5, 1, 3):
            c = silhouette(np.array([[0.0, 2.0]]), power, grid)
            assert np.allclose(c.values, landscape_fn((0, 2), grid))

    def test_multiplicity_cancels(self):
        grid = np.linspace(0, 2, 9)
        one = silhouette(np.array([[0.0, 2.0]]), 2, grid)
        two = silhouette(np.array([[0.0, 2.0], [0.0, 2.0]]), 2, grid)
        assert np.allclose(one.values, two.values)

    def test_weighted_example(self):
        c = silhouette(np.array([[0.0, 4.0], [0.0, 2.0]]), 2, np.array([1.0, 3.0]))
        assert c.values[0] == pytest.approx(1.0, abs=1e-12)
        assert c.values[1] == pytest.approx(0.8, abs=1e-12)

    def test_empty_flagged(self):
        c = silhouette(PersistenceDiagram(1), 1, (5, 0.0, 1.0))
        assert c.flagged and not c.values.any()

    def test_infinite_needs_substitute(self):
        with pytest.raises(ValueError):
            silhouette(PersistenceDiagram(0, [(0, math.inf)]), 1, (5, 0.0, 1.0))

    def test_power_bounds(self):
        with pytest.raises(ValueError):
            silhouette(np.array([[0.0, 1.0]]), 0, (3, 0.0, 1.0))

    @settings(max_examples=40, deadline=None)
    @given(bars, st.floats(0.1, 4))
    def test_convex_combination(self, pairs, power):
        grid = np.linspace(0, 20, 41)
        c = silhouette(np.array(pairs), power, grid)
        upper = np.max([landscape_fn(b, grid) for b in pairs], axis=0)
        assert np.all(c.values >= 0) and np.all(c.values <= upper + 1e-9)


class TestBettiCurve:
    def test_interval_counting(self):
        c = betti_curve(np.array([[0.0, 2.0], [1.0, 3.0]]), np.array([0.5, 1.5, 2.5]))
        assert c.values.tolist() == [1, 2, 1]

    def test_empty(self):
        assert not betti_curve(PersistenceDiagram(1), (4, 0.0, 1.0)).values.any()

    def test_h0_at_zero_counts_points(self):
        pts = np.random.default_rng(0).normal(size=(100, 2))
        f = rips_filtration(distance_matrix(pts))
        h0 = reduce(f)[0]
        c = betti_curve(h0, uniform_grid(50, 0.0, f.max_scale))
        assert c.values[0] == 100
        assert np.all(np.diff(c.values) <= 0)

    @settings(max_examples=40, deadline=None)
    @given(bars)
    def test_matches_brute(self, pairs):
        grid = np.linspace(0, 20, 37)
        c = betti_curve(np.array(pairs), grid)
        assert c.values.tolist() == [brute_betti(pairs, s) for s in grid]


class TestEntropy:
    def test_single_bar(self):
        assert persistence_entropy(np.array([[0.0, 3.0]]), normalized=False) == 0.0

    def test_two_equal(self):
        pairs = np.array([[0.0, 1.0], [2.0, 3.0]])
        assert persistence_entropy(pairs, normalized=False) == 1.0
        assert persistence_entropy(pairs) == 1.0

    def test_lengths_112(self):
        pairs = np.array([[0.0, 1.0], [0.0, 1.0], [0.0, 2.0]])
        assert persistence_entropy(pairs, normalized=False) == pytest.approx(1.5, abs=1e-12)
        assert persistence_entropy(pairs) == pytest.approx(1.5 / math.log2(3), abs=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError):
            persistence_entropy(PersistenceDiagram(0))
        with pytest.raises(ValueError):
            persistence_entropy(np.array([[0.0, 1.0]]), normalized=True)

    def test_pooled_diagrams(self):
        a = PersistenceDiagram(0, [(0, 1)])
        b = PersistenceDiagram(1, [(0, 1)])
        assert persistence_entropy([a, b]) == 1.0

    @settings(max_examples=40, deadline=None)
    @given(bars, st.floats(0.01, 100), st.randoms())
    def test_invariances(self, pairs, scale, rnd):
        arr = np.array(pairs)
        base = persistence_entropy(arr, normalized=False)
        order = list(range(len(arr)))
        rnd.shuffle(order)
        shuffled = arr[order]
        assert persistence_entropy(shuffled, normalized=False) == pytest.approx(base, abs=1e-9)
        assert persistence_entropy(arr * scale, normalized=False) == pytest.approx(base, abs=1e-9)


class TestTorusRank:
    def test_expected_betti(self):
        assert expected_betti(2, 1) == 2
        assert expected_betti(1, 1) == 1
        assert expected_betti(3, 2) == 3

    def test_gap(self):
        d = PersistenceDiagram(1, [(0, 10), (0, 9), (0, 1), (0, 0.8)])
        res = torus_rank_check(d, prominence=5)
        assert res.n == 2 and res.betti == {0: 1, 1: 2, 2: 1}

    def test_single_bar(self):
        assert torus_rank_check(PersistenceDiagram(1, [(0, 1)])).n == 1

    def test_empty(self):
        assert torus_rank_check(PersistenceDiagram(1)).n == 0

    def test_prominence_must_exceed_one(self):
        with pytest.raises(ValueError):
            torus_rank_check(PersistenceDiagram(1), prominence=1)


class TestCurves:
    def test_impute(self):
        c = SampledCurve([0, 1, 2], [1, math.nan, 3])
        assert impute_curve_median(c).values.tolist() == [1, 2, 3]

    def test_impute_identity(self):
        c = SampledCurve([0, 1], [1, 2])
        assert impute_curve_median(c) is c

    def test_impute_all_missing(self):
        with pytest.raises(ValueError):
            impute_curve_median(SampledCurve([0, 1], [math.inf, math.nan]))

    def test_grid_must_be_uniform(self):
        with pytest.raises(ValueError):
            SampledCurve([0, 1, 3], [0, 0, 0])

    def test_text_roundtrip(self):
        c = SampledCurve(uniform_grid(7, 0.0, 1.3), np.random.default_rng(1).normal(size=7))
        text = curve_to_text(c)
        assert text.startswith("s,value\n")
        assert load_curve(io.StringIO(text)) == c
