"""Sliding-window embedding, point-cloud normalisation and test-signal generators."""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .signal import SeriesError, TimeSeries


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Finite set of points in R^d, stored as an ``(n, d)`` array."""

    points: np.ndarray
    source_window: tuple[int, int] | None = None  # (M, tau) when built from a series
    zero_points: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValueError("points must form a 2-D array")
        pts = np.array(pts, copy=True)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.zero_points is not None:
            z = np.asarray(self.zero_points, dtype=bool)
            z.setflags(write=False)
            object.__setattr__(self, "zero_points", z)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        return self.source_window == other.source_window and np.array_equal(self.points, other.points)


def sliding_window(ts: TimeSeries, m: int, tau: int) -> PointCloud:
    """Delay vectors ``[t_i, t_{i+tau}, ..., t_{i+m*tau}]`` for every start ``i``.

    Returns ``n - m*tau`` points in R^(m+1).
    """
    x = ts._clean_values()
    if m < 0 or tau < 1:
        raise SeriesError("m must be >= 0 and tau >= 1")
    count = x.size - m * tau
    if count < 1:
        raise SeriesError(f"series of length {x.size} too short for m={m}, tau={tau}")
    pts = np.stack([x[j * tau : j * tau + count] for j in range(m + 1)], axis=1)
    return PointCloud(pts, source_window=(m, tau))


def center(pc: PointCloud) -> PointCloud:
    """Subtract from every point its coordinate mean times the all-ones vector."""
    if len(pc) == 0:
        raise ValueError("cannot center an empty cloud")
    pts = pc.points - pc.points.mean(axis=1, keepdims=True)
    return PointCloud(pts, source_window=pc.source_window)


def normalize_unit(pc: PointCloud) -> PointCloud:
    """Scale every point to unit Euclidean norm.

    Zero points stay at the origin and are flagged in ``zero_points``.
    """
    if len(pc) == 0:
        raise ValueError("cannot normalise an empty cloud")
    norms = np.linalg.norm(pc.points, axis=1)
    zero = norms == 0.0
    safe = np.where(zero, 1.0, norms)
    return PointCloud(pc.points / safe[:, None], source_window=pc.source_window, zero_points=zero)


def gen_periodic(L: int, n: int, harmonics: Sequence[tuple[float, float]], id: str = "") -> TimeSeries:
    """Sample an ``L``-periodic signal on a uniform grid over [0, 2*pi).

    Harmonic ``h`` (1-based) with ``(amplitude, phase)`` contributes
    ``amplitude * sin(h * L * t + phase)``.
    """
    if n < 2:
        raise ValueError("need at least two samples")
    if not harmonics:
        raise ValueError("harmonic list is empty")
    t = 2.0 * math.pi * np.arange(n) / n
    x = np.zeros(n)
    for h, (amp, phase) in enumerate(harmonics, start=1):
        x += amp * np.sin(h * L * t + phase)
    return TimeSeries(x, id=id)


def gen_quasi_periodic(omegas: Sequence[float], lambdas: Sequence[float], n: int) -> PointCloud:
    """Points ``(lambda_l * exp(j * omega_l * t))_l`` for integer ``t = 0..n-1``.

    Each complex coordinate is stored as a (real, imaginary) pair, so the cloud
    lives in R^(2 * len(omegas)).
    """
    if len(omegas) != len(lambdas):
        raise ValueError("omegas and lambdas differ in length")
    if not omegas:
        raise ValueError("need at least one frequency")
    if n < 1:
        raise ValueError("need at least one sample")
    t = np.arange(n, dtype=float)
    cols = []
    for w, lam in zip(omegas, lambdas):
        cols.append(lam * np.cos(w * t))
        cols.append(lam * np.sin(w * t))
    return PointCloud(np.stack(cols, axis=1))


def save_point_cloud(pc: PointCloud, dest: str | os.PathLike | IO, delimiter: str = ",") -> None:
    """Write one point per row with ``repr``-exact floats."""
    lines = [delimiter.join(repr(float(v)) for v in row) for row in pc.points]
    text = "\n".join(lines) + "\n"
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        dest.write(text)


def load_point_cloud(source: str | os.PathLike | IO, delimiter: str = ",") -> PointCloud:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    rows = [line.split(delimiter) for line in text.splitlines() if line.strip()]
    if not rows:
        raise ValueError("empty point cloud file")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"inconsistent row widths {sorted(widths)}")
    return PointCloud(np.array([[float(c) for c in r] for r in rows]))


def cloud_to_text(pc: PointCloud) -> str:
    buf = io.StringIO()
    save_point_cloud(pc, buf)
    return buf.getvalue()
