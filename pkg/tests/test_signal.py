import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toposeries.signal import (
    SeriesError,
    TimeSeries,
    choose_bin_size,
    estimate_delay,
    estimate_dimension,
    fnn_fraction,
    impute_median,
    load_series,
    make_partition,
    median_partition,
    mutual_information,
    sample_windows,
    turning_points,
)


def sine(n=2000, period=100):
    return TimeSeries(np.sin(2 * np.pi * np.arange(n) / period), id="sine")


class TestLoad:
    def test_single_column_with_header_and_missing(self):
        ts = load_series(io.StringIO("value\n1.5\n\nNaN\nnull\n2\n"), id="x")
        assert ts.id == "x"
        assert len(ts) == 4
        assert ts.missing.tolist() == [False, True, True, False]

    def test_timestamp_column(self):
        ts = load_series(io.StringIO("2024-01-01,1\n2024-01-02,2\n2024-01-03,\n"))
        assert ts.values[:2].tolist() == [1.0, 2.0]
        assert ts.missing.tolist() == [False, False, True]

    def test_file_stem_is_id(self, tmp_path):
        p = tmp_path / "pump_7.csv"
        p.write_text("1\n2\n3\n")
        assert load_series(p).id == "pump_7"

    @pytest.mark.parametrize("text", ["", "\n\n", "value\n"])
    def test_empty(self, text):
        with pytest.raises(SeriesError):
            load_series(io.StringIO(text))

    def test_garbage_row(self):
        with pytest.raises(SeriesError, match="row 3"):
            load_series(io.StringIO("1\n2\nabc\n"))


class TestImpute:
    def test_median_fill(self):
        ts = TimeSeries([1.0, math.nan, 3.0])
        out = impute_median(ts)
        assert out.values.tolist() == [1.0, 2.0, 3.0]
        assert not out.missing.any()

    def test_identity_without_missing(self):
        ts = TimeSeries([4.0, 5.0])
        assert impute_median(ts) is ts

    def test_all_missing(self):
        with pytest.raises(SeriesError):
            impute_median(TimeSeries([math.nan, math.nan]))

    def test_estimators_refuse_missing(self):
        with pytest.raises(SeriesError):
            estimate_delay(TimeSeries([1.0, math.nan] * 10))


class TestBins:
    def test_turning_points(self):
        count, idx = turning_points(TimeSeries([0, 1, 0, 1, 1, 0]))
        assert count == 2 and idx == [1, 2]

    def test_partition_equal_occupancy(self):
        x = np.random.default_rng(0).normal(size=600)
        part = make_partition(x, 50)
        assert part.bin_count == 12
        assert np.bincount(part.assign(x)).tolist() == [50] * 12

    def test_bin_size_divides(self):
        part = choose_bin_size(sine(1000))
        assert 1000 % part.bin_size == 0

    def test_constant_series(self):
        part = choose_bin_size(TimeSeries(np.ones(100)))
        assert part.bin_size == 2

    @pytest.mark.parametrize("n", [3, 7, 101])
    def test_prime_length_rejected(self, n):
        with pytest.raises(SeriesError, match="divisor"):
            choose_bin_size(TimeSeries(np.arange(n, dtype=float)))

    def test_median_partition(self):
        part = median_partition(TimeSeries(np.arange(10, dtype=float)))
        assert part.bin_count == 2
        assert np.bincount(part.assign(np.arange(10))).tolist() == [5, 5]


class TestMutualInformation:
    def test_identical_copy_has_full_information(self):
        x = TimeSeries(np.tile([0.0, 1.0], 500))
        # tau = 2 maps every value onto itself: one full bit
        assert mutual_information(x, 2, median_partition(x)) == pytest.approx(1.0)

    def test_nonnegative_and_bounded(self):
        ts = TimeSeries(np.random.default_rng(1).normal(size=1000))
        part = make_partition(ts.values, 100)
        for tau in (1, 5, 20):
            mi = mutual_information(ts, tau, part)
            assert 0.0 <= mi <= math.log2(part.bin_count)

    def test_tau_out_of_range(self):
        with pytest.raises(SeriesError):
            mutual_information(sine(100), 0)

    @pytest.mark.parametrize("period", [40, 64, 100])
    def test_quarter_period(self, period):
        est = estimate_delay(sine(2000, period))
        assert abs(est.tau - period / 4) <= 1

    def test_constant_is_degenerate(self):
        est = estimate_delay(TimeSeries(np.ones(200)))
        assert est.tau == 1 and est.degenerate

    def test_profile_shape(self):
        est = estimate_delay(sine(400), tau_max=30)
        assert [t for t, _ in est.mi_profile] == list(range(1, 31))


class TestFalseNeighbours:
    def test_sine_unfolds_in_two(self):
        ts = sine(2000, 64)
        est = estimate_dimension(ts, 16)
        assert est.m == 2
        assert fnn_fraction(ts, 2, 16) < 0.01

    def test_noise_stays_false(self):
        ts = TimeSeries(np.random.default_rng(2).normal(size=2000))
        assert fnn_fraction(ts, 1, 1, epsilon=0.5) > 0.5

    def test_constant(self):
        assert fnn_fraction(TimeSeries(np.ones(100)), 1, 1) == 0.0

    def test_bad_arguments(self):
        with pytest.raises(SeriesError):
            fnn_fraction(sine(100), 0, 1)
        with pytest.raises(SeriesError):
            fnn_fraction(sine(100), 1, 1, epsilon=0)
        with pytest.raises(SeriesError):
            fnn_fraction(sine(10), 5, 3)


class TestWindows:
    def test_seeded_and_distinct(self):
        ts = sine(3000)
        a = sample_windows(ts, 500, 5, seed=3)
        b = sample_windows(ts, 500, 5, seed=3)
        assert [w.id for w in a] == [w.id for w in b]
        assert len({w.id for w in a}) == 5
        assert all(len(w) == 500 for w in a)

    def test_too_long(self):
        with pytest.raises(SeriesError):
            sample_windows(sine(100), 500)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=8, max_size=60), st.integers(1, 3))
def test_mi_symmetric_bounds(values, tau):
    ts = TimeSeries(values)
    part = median_partition(ts)
    mi = mutual_information(ts, tau, part)
    assert 0.0 <= mi <= 1.0 + 1e-12
