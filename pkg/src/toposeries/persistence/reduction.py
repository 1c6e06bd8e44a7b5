"""Boundary-matrix reduction over Z/pZ with clearing."""

from __future__ import annotations

import math

import numpy as np

from ..rips import Filtration, FiltrationError, RipsFiltration
from .diagram import PersistenceDiagram
from .field import FieldSpec


def _boundary(vertices: tuple[int, ...], index: dict, p: int) -> dict[int, int]:
    col = {}
    for i in range(len(vertices)):
        face = vertices[:i] + vertices[i + 1 :]
        col[index[face]] = 1 if i % 2 == 0 else p - 1
    return col


def reduce_explicit(f: Filtration, field: FieldSpec = FieldSpec(), top_dimension: bool = False) -> list[PersistenceDiagram]:
    """Persistence pairs of an explicit filtration.

    Columns are reduced one dimension at a time, highest first. Once a column
    with pivot ``tau`` is reduced, ``tau`` is a creator and its own column is
    cleared without work. Diagrams are returned for dimensions
    ``0..max_dim-1``; ``top_dimension=True`` also returns the cycles of
    dimension ``max_dim`` (always infinite, as no cofaces are present).
    """
    f.validate()
    p = field.p
    simplices = f.simplices
    index = {s.vertices: pos for pos, s in enumerate(simplices)}
    values = [s.value for s in simplices]
    dims = [s.dim for s in simplices]
    max_dim = max(dims) if dims else 0
    max_dim = max(max_dim, f.max_dim)

    by_dim: list[list[int]] = [[] for _ in range(max_dim + 1)]
    for pos, d in enumerate(dims):
        by_dim[d].append(pos)

    cleared = [False] * len(simplices)
    paired_with: dict[int, int] = {}  # creator -> destroyer
    zero_col = [False] * len(simplices)

    for d in range(max_dim, 0, -1):
        pivot_owner: dict[int, int] = {}
        reduced: dict[int, dict[int, int]] = {}
        for j in by_dim[d]:
            if cleared[j]:
                continue
            col = _boundary(simplices[j].vertices, index, p)
            while col:
                low = max(col)
                owner = pivot_owner.get(low)
                if owner is None:
                    break
                other = reduced[owner]
                factor = (-col[low] * pow(other[low], p - 2, p)) % p
                for r, c in other.items():
                    v = (col.get(r, 0) + factor * c) % p
                    if v:
                        col[r] = v
                    else:
                        col.pop(r, None)
            if col:
                low = max(col)
                pivot_owner[low] = j
                reduced[j] = col
                paired_with[low] = j
                cleared[low] = True
            else:
                zero_col[j] = True
    for j in by_dim[0]:
        zero_col[j] = True

    # max_dim == 0 still reports the (all-infinite) H0
    n_out = max(max_dim + 1 if top_dimension else max_dim, 1)
    pairs: list[list[tuple[float, float]]] = [[] for _ in range(n_out)]
    n_zero = [0] * n_out
    for pos, s in enumerate(simplices):
        if s.dim >= len(pairs):
            continue
        if pos in paired_with:
            death = values[paired_with[pos]]
            if death > s.value:
                pairs[s.dim].append((s.value, death))
            else:
                n_zero[s.dim] += 1
        elif zero_col[pos]:
            pairs[s.dim].append((s.value, math.inf))
    return [PersistenceDiagram(k, np.array(pairs[k]).reshape(-1, 2), n_zero[k]) for k in range(n_out)]


def reduce(
    f: Filtration,
    field: FieldSpec = FieldSpec(),
    method: str = "auto",
    top_dimension: bool = False,
) -> list[PersistenceDiagram]:
    """Persistence diagrams of ``f`` for dimensions ``0..max_dim-1``.

    ``method="auto"`` sends Rips filtrations with ``max_dim <= 2`` to the
    compiled implicit kernel and everything else to :func:`reduce_explicit`.
    """
    if method not in ("auto", "implicit", "explicit"):
        raise ValueError(f"unknown method {method!r}")
    implicit_ok = isinstance(f, RipsFiltration) and f.max_dim <= 2 and not top_dimension
    if method == "implicit" and not implicit_ok:
        raise ValueError("implicit reduction needs a Rips filtration with max_dim <= 2")
    if method == "explicit" or not implicit_ok:
        return reduce_explicit(f, field, top_dimension=top_dimension)

    from ._rips_kernel import rips_persistence

    return rips_persistence(f, field)


__all__ = ["reduce", "reduce_explicit", "FiltrationError"]
