"""Time-series ingestion, cleaning and delay-embedding parameter estimation.

The two embedding parameters are estimated independently:

* the time delay ``tau`` from the first minimum of the binned mutual
  information between ``t_i`` and ``t_{i+tau}``;
* the embedding dimension ``m`` from the fraction of false nearest neighbours.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np
from scipy.spatial import cKDTree

MISSING_SENTINELS = frozenset({"", "nan", "null"})


class SeriesError(ValueError):
    """Raised for malformed or degenerate time-series input."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Real-valued sequence in row order with a missing-value mask."""

    values: np.ndarray
    missing: np.ndarray = None
    id: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if values.size == 0:
            raise SeriesError("time series must contain at least one value")
        if self.missing is None:
            missing = ~np.isfinite(values)
        else:
            missing = np.asarray(self.missing, dtype=bool).reshape(-1)
            if missing.shape != values.shape:
                raise SeriesError("missing mask length differs from values")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "missing", _frozen(missing))

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.id == other.id
            and np.array_equal(self.missing, other.missing)
            and np.array_equal(self.values[~self.missing], other.values[~other.missing])
        )

    @property
    def has_missing(self) -> bool:
        return bool(self.missing.any())

    @property
    def std(self) -> float:
        """Population standard deviation (``1/n`` normalisation)."""
        return float(np.std(self._clean_values()))

    def _clean_values(self) -> np.ndarray:
        if self.has_missing:
            raise SeriesError(f"series {self.id!r} has missing values; impute first")
        return self.values

    def with_values(self, values, id: str | None = None) -> "TimeSeries":
        return TimeSeries(values, id=self.id if id is None else id)


@dataclass(frozen=True)
class BinPartition:
    """Equal-occupancy partition of the value range.

    The sorted values are cut into ``bin_count`` consecutive runs of
    ``bin_size`` order statistics; ``edges`` holds the ``bin_count + 1``
    boundaries from the minimum to the maximum value.
    """

    bin_size: int
    bin_count: int
    edges: np.ndarray = field(repr=False)

    def assign(self, values: np.ndarray) -> np.ndarray:
        """Bin index in ``[0, bin_count)`` for every value."""
        inner = self.edges[1:-1]
        return np.searchsorted(inner, np.asarray(values, dtype=float), side="right")


@dataclass(frozen=True)
class DelayEstimate:
    tau: int
    mi_profile: tuple[tuple[int, float], ...]

    @property
    def degenerate(self) -> bool:
        """True when the mutual information is zero for every delay."""
        return all(bits == 0.0 for _, bits in self.mi_profile)


@dataclass(frozen=True)
class DimensionEstimate:
    m: int
    fnn_profile: tuple[tuple[int, float], ...]


# -- ingestion -----------------------------------------------------------------


def _parse_cell(cell: str) -> float | None:
    """Return the float value, or None for a missing-value sentinel."""
    text = cell.strip()
    if text.lower() in MISSING_SENTINELS:
        return None
    return float(text)


def load_series(
    source: str | os.PathLike | IO,
    delimiter: str = ",",
    value_column: int = -1,
    header: bool | None = None,
    id: str | None = None,
) -> TimeSeries:
    """Read a single-column (optionally timestamped) delimited table.

    Parameters
    ----------
    source : path or file object
        Text or byte stream. A leading timestamp column is allowed; rows are
        kept in file order.
    delimiter : str
        Field separator.
    value_column : int
        Column holding the values (default: last column).
    header : bool or None
        ``None`` detects a header from a non-numeric first row.
    id : str, optional
        Series label; defaults to the file stem for paths.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            raw = fh.read()
        if id is None:
            id = os.path.splitext(os.path.basename(os.fspath(source)))[0]
    else:
        raw = source.read()
    text = raw.decode("utf-8-sig") if isinstance(raw, bytes) else raw

    rows = [r for r in csv.reader(io.StringIO(text), delimiter=delimiter) if any(c.strip() for c in r)]
    if not rows:
        raise SeriesError("empty input")

    values: list[float] = []
    missing: list[bool] = []
    for lineno, row in enumerate(rows, start=1):
        try:
            cell = row[value_column]
        except IndexError:
            raise SeriesError(f"row {lineno}: no column {value_column}") from None
        try:
            v = _parse_cell(cell)
        except ValueError:
            if lineno == 1 and header is not False:
                continue
            raise SeriesError(f"row {lineno}: cannot parse {cell!r} as a number") from None
        if lineno == 1 and header:
            continue
        values.append(math.nan if v is None else v)
        missing.append(v is None or not math.isfinite(v))
    if not values:
        raise SeriesError("empty input")
    return TimeSeries(np.array(values), np.array(missing), id=id or "")


def impute_median(ts: TimeSeries) -> TimeSeries:
    """Replace missing entries with the median of the observed ones."""
    if not ts.has_missing:
        return ts
    observed = ts.values[~ts.missing]
    if observed.size == 0:
        raise SeriesError(f"series {ts.id!r}: all values missing, nothing to impute from")
    values = np.where(ts.missing, np.median(observed), ts.values)
    return TimeSeries(values, np.zeros(len(ts), dtype=bool), id=ts.id)


# -- turning points and bins ----------------------------------------------------


def turning_points(ts: TimeSeries) -> tuple[int, list[int]]:
    """Indices ``i`` where the first difference changes sign strictly."""
    x = ts._clean_values()
    if x.size < 3:
        return 0, []
    d = np.diff(x)
    idx = np.flatnonzero(d[:-1] * d[1:] < 0) + 1
    return int(idx.size), idx.tolist()


def _admissible_divisors(n: int) -> list[int]:
    return [s for s in range(2, n // 2 + 1) if n % s == 0]


def choose_bin_size(ts: TimeSeries) -> BinPartition:
    """Pick the bin size ``s`` (a divisor of the series length).

    The series is cut into ``n/s`` consecutive time blocks and turning points
    are counted per block. Among divisors whose mean count per block does not
    exceed one, the one with the largest mean wins (blocks hold about one
    half-oscillation each); ties go to the smaller ``s``. When every divisor
    exceeds one per block the divisor with the smallest mean is used.
    """
    x = ts._clean_values()
    n = x.size
    divisors = _admissible_divisors(n)
    if not divisors:
        raise SeriesError(
            f"series {ts.id!r}: length {n} has no divisor in [2, n/2]; "
            "truncate the series to a composite length"
        )
    _, tps = turning_points(ts)
    tps = np.asarray(tps, dtype=int)

    means = []
    for s in divisors:
        per_bin = np.bincount(tps // s, minlength=n // s)
        means.append(per_bin.mean())
    means = np.asarray(means)

    ok = np.flatnonzero(means <= 1.0)
    if ok.size:
        best = ok[np.argmax(means[ok])]  # argmax keeps the first, i.e. smallest s
    else:
        best = int(np.argmin(means))
    return make_partition(x, divisors[best])


def make_partition(values: np.ndarray, bin_size: int) -> BinPartition:
    """Equal-occupancy value bins with ``bin_size`` order statistics each."""
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if bin_size < 1 or n % bin_size:
        raise SeriesError(f"bin size {bin_size} does not divide length {n}")
    count = n // bin_size
    edges = np.concatenate([v[::bin_size][:count], v[-1:]])
    edges.setflags(write=False)
    return BinPartition(bin_size=bin_size, bin_count=count, edges=edges)


# -- mutual information ----------------------------------------------------------


def median_partition(ts: TimeSeries) -> BinPartition:
    """Two equal-occupancy bins split at the median.

    Odd lengths drop the last sample when locating the split; the edges still
    span the full value range.
    """
    x = ts._clean_values()
    if x.size < 2:
        raise SeriesError("need at least two values for a median split")
    half = x.size // 2
    v = np.sort(x[: 2 * half])
    edges = np.array([x.min(), v[half], x.max()])
    edges.setflags(write=False)
    return BinPartition(bin_size=half, bin_count=2, edges=edges)


def mutual_information(ts: TimeSeries, tau: int, bins: BinPartition | None = None) -> float:
    """Mutual information in bits between ``t_i`` and ``t_{i+tau}``.

    Pairs are counted into the value bins of ``bins`` (chosen with
    :func:`choose_bin_size` when omitted). Empty joint cells contribute zero.
    """
    x = ts._clean_values()
    if tau < 1 or tau >= x.size:
        raise SeriesError(f"delay {tau} out of range for length {x.size}")
    if bins is None:
        bins = choose_bin_size(ts)
    k = bins.assign(x)
    a, b = k[:-tau], k[tau:]
    nb = bins.bin_count
    joint = np.bincount(a * nb + b, minlength=nb * nb).reshape(nb, nb) / a.size
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    nz = joint > 0
    ratio = joint[nz] / np.outer(pa, pb)[nz]
    mi = float(np.sum(joint[nz] * np.log2(ratio)))
    return max(mi, 0.0)


def _first_local_minimum(profile: Sequence[float]) -> int:
    """Index of the first interior local minimum, else of the global minimum.

    A plateau counts as a minimum when it is entered by a strict decrease and
    left by a strict increase; its first index is returned.
    """
    y = list(profile)
    i = 1
    while i < len(y) - 1:
        if y[i] < y[i - 1]:
            j = i
            while j + 1 < len(y) and y[j + 1] == y[i]:
                j += 1
            if j + 1 < len(y) and y[j + 1] > y[i]:
                return i
            i = j + 1
        else:
            i += 1
    return int(np.argmin(y))


def estimate_delay(ts: TimeSeries, tau_max: int | None = None, bins: BinPartition | None = None) -> DelayEstimate:
    """Time delay at the first minimum of the mutual-information profile.

    The default partition is the median split. Finer partitions (for example
    from :func:`choose_bin_size`) alias with the sampling grid of periodic
    signals and produce spurious early minima; pass ``bins`` to use one anyway.
    Ties and flat profiles resolve to the smallest delay.
    """
    n = len(ts)
    if tau_max is None:
        tau_max = default_tau_max(n)
    if tau_max < 1 or tau_max >= n / 2:
        raise SeriesError(f"tau_max={tau_max} must lie in [1, n/2) for length {n}")
    if bins is None:
        bins = median_partition(ts)
    profile = [mutual_information(ts, tau, bins) for tau in range(1, tau_max + 1)]
    tau = _first_local_minimum(profile) + 1
    return DelayEstimate(tau=tau, mi_profile=tuple(zip(range(1, tau_max + 1), profile)))


def default_tau_max(n: int) -> int:
    return max(1, min(100, (n - 1) // 2))


# -- false nearest neighbours ----------------------------------------------------


def _delay_vectors(x: np.ndarray, m: int, tau: int, count: int) -> np.ndarray:
    return np.stack([x[j * tau : j * tau + count] for j in range(m)], axis=1)


def fnn_fraction(ts: TimeSeries, m: int, tau: int, epsilon: float = 2.0) -> float:
    """Fraction of nearest-neighbour pairs that separate in the next coordinate.

    Points are the ``m``-dimensional delay vectors ``(t_i, ..., t_{i+(m-1)tau})``.
    For each point and its nearest neighbour ``k`` the pair is false when
    ``|t_{i+m*tau} - t_{k+m*tau}| / sigma > epsilon``, with ``sigma`` the
    population standard deviation of the series. ``epsilon=2`` flags
    differences larger than two standard deviations.
    """
    x = ts._clean_values()
    if m < 1 or tau < 1:
        raise SeriesError("m and tau must be positive")
    if epsilon <= 0:
        raise SeriesError("epsilon must be positive")
    count = x.size - m * tau
    if count < 2:
        raise SeriesError(f"series of length {x.size} too short for m={m}, tau={tau}")
    sigma = float(np.std(x))
    if sigma == 0.0:
        return 0.0

    pts = _delay_vectors(x, m, tau, count)
    nxt = x[m * tau : m * tau + count]
    tree = cKDTree(pts)
    k = min(count, 3)
    _, idx = tree.query(pts, k=k)
    rows = np.arange(count)
    # exact duplicates may put another index ahead of the point itself
    nn = np.where(idx[:, 0] != rows, idx[:, 0], idx[:, 1])
    ratio = np.abs(nxt - nxt[nn]) / sigma
    return float(np.mean(ratio > epsilon))


def estimate_dimension(
    ts: TimeSeries,
    tau: int,
    m_max: int = 10,
    tol: float = 0.01,
    epsilon: float = 2.0,
) -> DimensionEstimate:
    """Smallest ``m`` whose false-neighbour fraction is within ``tol`` of the minimum."""
    if m_max < 1:
        raise SeriesError("m_max must be at least 1")
    profile = [fnn_fraction(ts, m, tau, epsilon) for m in range(1, m_max + 1)]
    floor = min(profile)
    m = next(i for i, f in enumerate(profile, start=1) if f <= floor + tol)
    return DimensionEstimate(m=m, fnn_profile=tuple(zip(range(1, m_max + 1), profile)))


# -- sampling --------------------------------------------------------------------


def sample_windows(ts: TimeSeries, window_len: int = 500, count: int = 1, seed: int = 0) -> list[TimeSeries]:
    """Draw ``count`` contiguous windows with distinct start indices."""
    n = len(ts)
    if window_len < 1 or window_len > n:
        raise SeriesError(f"window length {window_len} exceeds series length {n}")
    starts_available = n - window_len + 1
    if count > starts_available:
        raise SeriesError(
            f"requested {count} windows but only {starts_available} start positions exist"
        )
    rng = np.random.default_rng(seed)
    starts = np.sort(rng.choice(starts_available, size=count, replace=False))
    return [
        TimeSeries(
            ts.values[s : s + window_len],
            ts.missing[s : s + window_len],
            id=f"{ts.id}@{s}" if count > 1 or starts_available > 1 else ts.id,
        )
        for s in starts.tolist()
    ]
