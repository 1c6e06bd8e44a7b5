"""Vietoris-Rips filtrations over Euclidean point clouds."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import IO, Iterator, NamedTuple, Sequence

import numpy as np

from .embedding import PointCloud

ENCLOSING = "enclosing"


class FiltrationError(ValueError):
    """Raised when a simplex list does not form a valid filtration."""


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric matrix of pairwise distances with zero diagonal."""

    entries: np.ndarray

    def __post_init__(self):
        d = np.array(self.entries, dtype=float, copy=True)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        if not np.all(np.isfinite(d)):
            raise ValueError("distances must be finite")
        if np.any(np.diag(d) != 0.0):
            raise ValueError("diagonal must be zero")
        if not np.array_equal(d, d.T):
            raise ValueError("distance matrix must be symmetric")
        if np.any(d < 0):
            raise ValueError("distances must be nonnegative")
        d.setflags(write=False)
        object.__setattr__(self, "entries", d)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def enclosing_radius(self) -> float:
        """Smallest eccentricity; the Rips complex is a cone beyond it."""
        if self.n <= 1:
            return 0.0
        return float(self.entries.max(axis=1).min())


def distance_matrix(pc: PointCloud | np.ndarray) -> DistanceMatrix:
    """Exact pairwise Euclidean distances (coordinate differences, no Gram trick)."""
    pts = pc.points if isinstance(pc, PointCloud) else np.asarray(pc, dtype=float)
    if pts.ndim != 2:
        raise ValueError("points must have identical dimension")
    if pts.shape[0] == 0:
        raise ValueError("empty point cloud")
    sq = np.zeros((pts.shape[0], pts.shape[0]))
    for c in range(pts.shape[1]):
        diff = pts[:, c, None] - pts[None, :, c]
        sq += diff * diff
    d = np.sqrt(sq)
    d = np.maximum(d, d.T)  # sums are symmetric already; guards against any reassociation
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d)


class Simplex(NamedTuple):
    vertices: tuple[int, ...]
    value: float
    dim: int


class Filtration:
    """Ordered simplices with filtration values.

    Faces must precede cofaces and carry values no larger than their cofaces;
    :meth:`validate` checks both.
    """

    def __init__(self, simplices: Sequence[Simplex | tuple], max_dim: int | None = None, max_scale: float = math.inf):
        items = [s if isinstance(s, Simplex) else Simplex(tuple(s[0]), float(s[1]), len(s[0]) - 1) for s in simplices]
        self._simplices = items
        self.max_dim = max(s.dim for s in items) if max_dim is None and items else (max_dim or 0)
        self.max_scale = max_scale

    @property
    def simplices(self) -> list[Simplex]:
        return self._simplices

    def __len__(self) -> int:
        return len(self.simplices)

    def __iter__(self) -> Iterator[Simplex]:
        return iter(self.simplices)

    def counts(self) -> list[int]:
        """Number of simplices per dimension ``0..max_dim``."""
        out = [0] * (self.max_dim + 1)
        for s in self.simplices:
            out[s.dim] += 1
        return out

    def validate(self) -> None:
        seen: dict[tuple[int, ...], float] = {}
        for pos, s in enumerate(self.simplices):
            if list(s.vertices) != sorted(set(s.vertices)):
                raise FiltrationError(f"simplex {pos}: vertices must be strictly increasing")
            if s.dim > 0:
                for i in range(len(s.vertices)):
                    face = s.vertices[:i] + s.vertices[i + 1 :]
                    fv = seen.get(face)
                    if fv is None:
                        raise FiltrationError(f"simplex {s.vertices} appears before its face {face}")
                    if fv > s.value:
                        raise FiltrationError(
                            f"non-monotone filtration: face {face}@{fv} exceeds {s.vertices}@{s.value}"
                        )
            if s.vertices in seen:
                raise FiltrationError(f"duplicate simplex {s.vertices}")
            seen[s.vertices] = s.value

    def dump(self, dest: str | os.PathLike | IO | None = None) -> str:
        """Debug listing, one ``value dim v0 v1 ...`` line per simplex."""
        text = "".join(
            f"{s.value!r} {s.dim} {' '.join(map(str, s.vertices))}\n" for s in self.simplices
        )
        if isinstance(dest, (str, os.PathLike)):
            with open(dest, "w", encoding="utf-8") as fh:
                fh.write(text)
        elif dest is not None:
            dest.write(text)
        return text


class RipsFiltration(Filtration):
    """Vietoris-Rips filtration of a distance matrix.

    Vertices and edges are built eagerly; higher simplices are enumerated only
    when :attr:`simplices` is accessed, so large clouds can go straight to the
    implicit persistence kernel.
    """

    def __init__(self, dm: DistanceMatrix, max_dim: int = 2, max_scale: float | str = ENCLOSING):
        if max_dim < 0:
            raise ValueError("max_dim must be nonnegative")
        if isinstance(max_scale, str):
            if max_scale != ENCLOSING:
                raise ValueError(f"unknown max_scale {max_scale!r}")
            max_scale = dm.enclosing_radius()
        if max_scale < 0 or math.isnan(max_scale):
            raise ValueError("max_scale must be nonnegative")
        self.dm = dm
        self.max_dim = max_dim
        self.max_scale = float(max_scale)

    @cached_property
    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Edges ``(i, j, value)`` with ``i < j``, sorted by (value, i, j)."""
        d = self.dm.entries
        i, j = np.triu_indices(self.dm.n, k=1)
        v = d[i, j]
        keep = v <= self.max_scale
        i, j, v = i[keep], j[keep], v[keep]
        order = np.lexsort((j, i, v))
        return i[order].astype(np.int64), j[order].astype(np.int64), v[order]

    @cached_property
    def simplices(self) -> list[Simplex]:
        n = self.dm.n
        d = self.dm.entries
        out = [Simplex((v,), 0.0, 0) for v in range(n)]
        if self.max_dim >= 1:
            ei, ej, ev = self.edges
            out.extend(Simplex((int(a), int(b)), float(w), 1) for a, b, w in zip(ei, ej, ev))
        if self.max_dim >= 2:
            adj = d <= self.max_scale
            np.fill_diagonal(adj, False)
            higher: list[Simplex] = []

            def extend(verts: tuple[int, ...], value: float, common: np.ndarray):
                for w in np.flatnonzero(common):
                    w = int(w)
                    val = max(value, float(d[verts, w].max()))
                    simplex = verts + (w,)
                    higher.append(Simplex(simplex, val, len(simplex) - 1))
                    if len(simplex) - 1 < self.max_dim:
                        nxt = common & adj[w]
                        nxt[: w + 1] = False
                        extend(simplex, val, nxt)

            ei, ej, ev = self.edges
            for a, b, w in zip(ei.tolist(), ej.tolist(), ev.tolist()):
                common = adj[a] & adj[b]
                common[: b + 1] = False
                extend((a, b), w, common)
            out.extend(higher)
        out.sort(key=lambda s: (s.value, s.dim, s.vertices))
        return out

    def counts(self) -> list[int]:
        if self.max_dim <= 1:
            return [self.dm.n, len(self.edges[0])][: self.max_dim + 1]
        return super().counts()


def rips_filtration(dm: DistanceMatrix, max_dim: int = 2, max_scale: float | str = ENCLOSING) -> RipsFiltration:
    """Rips filtration up to simplices of dimension ``max_dim``.

    ``max_scale`` is a distance cutoff or ``"enclosing"`` for the enclosing
    radius, past which the complex is contractible and no class of positive
    dimension survives.
    """
    if max_dim < 0:
        raise ValueError("max_dim must be nonnegative")
    return RipsFiltration(dm, max_dim=max_dim, max_scale=max_scale)
