"""Functional summaries of persistence diagrams.

Tents (landscape functions), weighted silhouettes, Betti curves and
persistence entropy, all sampled on uniform grids, plus a rank check that
reads the number of independent periods off an H1 diagram.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .persistence.diagram import PersistenceDiagram

POWER_CAP = 64.0


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Real function sampled on a uniform, strictly increasing grid.

    ``flagged`` marks curves that are placeholders (for instance the zero
    silhouette of an empty diagram).
    """

    grid: np.ndarray
    values: np.ndarray
    flagged: bool = False

    def __post_init__(self):
        g = np.array(self.grid, dtype=float).reshape(-1)
        v = np.array(self.values, dtype=float).reshape(-1)
        if g.shape != v.shape:
            raise ValueError("grid and values differ in length")
        if g.size == 0:
            raise ValueError("empty curve")
        if g.size > 1:
            step = np.diff(g)
            if np.any(step <= 0):
                raise ValueError("grid must be strictly increasing")
            if not np.allclose(step, step[0], rtol=1e-9, atol=1e-12 * max(1.0, abs(g[-1]))):
                raise ValueError("grid must be uniform")
        g.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, SampledCurve):
            return NotImplemented
        return np.array_equal(self.grid, other.grid) and np.array_equal(self.values, other.values)


@dataclass(frozen=True, eq=False)
class DiagramPointSet:
    """Diagram as a multiset of ``(midlife, halflife)`` points."""

    points: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        if np.any(pts[:, 1] <= 0):
            raise ValueError("halflife must be positive")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]


def uniform_grid(resolution: int, lo: float, hi: float) -> np.ndarray:
    """``resolution`` evenly spaced abscissae from ``lo`` to ``hi`` inclusive."""
    if resolution < 1:
        raise ValueError("resolution must be positive")
    if resolution == 1:
        return np.array([float(lo)])
    if not hi > lo:
        raise ValueError(f"empty grid range [{lo}, {hi}]")
    return np.linspace(lo, hi, resolution)


def _grid(grid) -> np.ndarray:
    if isinstance(grid, SampledCurve):
        return grid.grid
    if isinstance(grid, tuple) and len(grid) == 3 and isinstance(grid[0], (int, np.integer)):
        return uniform_grid(*grid)
    return np.asarray(grid, dtype=float).reshape(-1)


def finite_pairs(pairs: np.ndarray, infinity_substitute: float | None) -> np.ndarray:
    """Copy of ``pairs`` with infinite deaths replaced.

    Raises ``ValueError`` if an infinite death is present and no substitute
    was given, or if the substitute undercuts a finite death.
    """
    pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
    inf = np.isinf(pairs[:, 1])
    if not inf.any():
        return pairs.copy()
    if infinity_substitute is None:
        raise ValueError("diagram has infinite bars; pass infinity_substitute")
    finite_deaths = pairs[~inf, 1]
    if finite_deaths.size and infinity_substitute < finite_deaths.max():
        raise ValueError(
            f"infinity_substitute {infinity_substitute} is below the largest finite death {finite_deaths.max()}"
        )
    out = pairs.copy()
    out[inf, 1] = infinity_substitute
    return out[out[:, 1] > out[:, 0]]


def _pairs_of(d) -> np.ndarray:
    if isinstance(d, PersistenceDiagram):
        return d.pairs
    if isinstance(d, np.ndarray):
        return d.reshape(-1, 2)
    items = list(d)
    if items and all(isinstance(x, PersistenceDiagram) for x in items):
        return np.vstack([x.pairs for x in items])
    return np.asarray(items, dtype=float).reshape(-1, 2)


def to_point_set(d: PersistenceDiagram, infinity_substitute: float) -> DiagramPointSet:
    """Map each bar ``(b, d)`` to ``((b + d) / 2, (d - b) / 2)``."""
    pairs = finite_pairs(_pairs_of(d), infinity_substitute)
    b, e = pairs[:, 0], pairs[:, 1]
    return DiagramPointSet(np.column_stack([(b + e) / 2.0, (e - b) / 2.0]))


def landscape_fn(bar: tuple[float, float], t):
    """Tent of a finite bar: rises from ``b``, peaks at the midpoint, falls to ``d``.

    Works on scalars and arrays.
    """
    b, d = float(bar[0]), float(bar[1])
    if not (math.isfinite(b) and math.isfinite(d)) or b > d:
        raise ValueError(f"bar must be finite with birth <= death, got {bar}")
    t_arr = np.asarray(t, dtype=float)
    val = np.maximum(np.minimum(t_arr - b, d - t_arr), 0.0)
    # the peak is computed exactly rather than through the min above
    val = np.where(t_arr == (b + d) / 2.0, (d - b) / 2.0, val)
    return float(val) if np.ndim(t) == 0 else val


def silhouette(
    d,
    power: float = 1.0,
    grid=None,
    infinity_substitute: float | None = None,
) -> SampledCurve:
    """Weighted average of tents, weights ``(death - birth) ** power``.

    ``grid`` is an array of abscissae, a ``(resolution, lo, hi)`` tuple or an
    existing curve whose grid is reused. An empty diagram gives a flagged
    all-zero curve.
    """
    if not 0 < power <= POWER_CAP:
        raise ValueError(f"power must lie in (0, {POWER_CAP}]")
    t = _grid(grid)
    pairs = finite_pairs(_pairs_of(d), infinity_substitute)
    if pairs.shape[0] == 0:
        return SampledCurve(t, np.zeros_like(t), flagged=True)
    b = pairs[:, 0, None]
    e = pairs[:, 1, None]
    w = (pairs[:, 1] - pairs[:, 0]) ** power
    tents = np.maximum(np.minimum(t[None, :] - b, e - t[None, :]), 0.0)
    return SampledCurve(t, w @ tents / w.sum())


def betti_curve(d, grid=None) -> SampledCurve:
    """Number of bars with ``birth <= s <= death`` at every grid point ``s``."""
    t = _grid(grid)
    pairs = _pairs_of(d)
    if pairs.shape[0] == 0:
        return SampledCurve(t, np.zeros_like(t))
    births = np.sort(pairs[:, 0])
    deaths = np.sort(pairs[:, 1])
    alive = np.searchsorted(births, t, side="right") - np.searchsorted(deaths, t, side="left")
    return SampledCurve(t, alive.astype(float))


def persistence_entropy(d, normalized: bool = True, infinity_substitute: float | None = None) -> float:
    """Shannon entropy (bits) of the bar-length distribution.

    ``d`` may be one diagram, several diagrams (pooled) or a raw pair array.
    Normalisation divides by ``log2`` of the bar count.
    """
    pairs = finite_pairs(_pairs_of(d), infinity_substitute)
    lengths = pairs[:, 1] - pairs[:, 0]
    lengths = lengths[lengths > 0]
    if lengths.size == 0:
        raise ValueError("no bars of positive length")
    if normalized and lengths.size < 2:
        raise ValueError("normalised entropy needs at least two bars")
    q = lengths / lengths.sum()
    h = float(-(q * np.log2(q)).sum())
    h = max(h, 0.0)
    if normalized:
        h = min(h / math.log2(lengths.size), 1.0)
    return h


def expected_betti(n: int, k: int) -> int:
    """Betti number ``k`` of the ``n``-torus."""
    if n < 0 or k < 0:
        raise ValueError("n and k must be nonnegative")
    return math.comb(n, k)


@dataclass(frozen=True)
class TorusRank:
    n: int
    betti: dict
    persistence: tuple[float, ...]


def torus_rank_check(d1: PersistenceDiagram, prominence: float = 5.0, infinity_substitute: float | None = None) -> TorusRank:
    """Count prominent H1 classes and tabulate the matching torus Betti numbers.

    Persistences are sorted in decreasing order with a trailing zero; ``n``
    is the first ``k`` whose ``k``-th persistence exceeds ``prominence``
    times the ``k+1``-th, i.e. the bars above the first large gap.
    """
    if not prominence > 1:
        raise ValueError("prominence must exceed 1")
    pairs = finite_pairs(_pairs_of(d1), infinity_substitute)
    pers = np.sort(pairs[:, 1] - pairs[:, 0])[::-1]
    n = 0
    ext = np.append(pers, 0.0)
    for k in range(pers.size):
        if ext[k] > prominence * ext[k + 1]:
            n = k + 1
            break
    return TorusRank(n=n, betti={k: expected_betti(n, k) for k in range(n + 1)}, persistence=tuple(pers.tolist()))


def impute_curve_median(c: SampledCurve) -> SampledCurve:
    """Replace non-finite curve values with the median of the finite ones."""
    v = c.values
    bad = ~np.isfinite(v)
    if not bad.any():
        return c
    if bad.all():
        raise ValueError("curve has no finite values to impute from")
    return SampledCurve(c.grid, np.where(bad, np.median(v[~bad]), v), flagged=c.flagged)


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def curve_to_text(c: SampledCurve) -> str:
    lines = ["s,value"]
    lines.extend(f"{format_float(s)},{format_float(v)}" for s, v in zip(c.grid, c.values))
    return "\n".join(lines) + "\n"


def save_curve(c: SampledCurve, dest: str | os.PathLike | IO) -> None:
    text = curve_to_text(c)
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        dest.write(text)


def load_curve(source: str | os.PathLike | IO) -> SampledCurve:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "s,value":
        raise ValueError("curve file must start with the header 's,value'")
    rows = [ln.split(",") for ln in lines[1:]]
    arr = np.array([[float(a), float(b)] for a, b in rows]).reshape(-1, 2)
    return SampledCurve(arr[:, 0], arr[:, 1])
