"""Persistence diagrams as multisets of (birth, death) pairs."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Bars of one homology dimension; ``death`` may be ``math.inf``.

    Stored pairs all have ``birth < death``; ``n_zero`` counts the
    zero-persistence pairs the reduction discarded.
    """

    dim: int
    pairs: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    n_zero: int = 0

    def __post_init__(self):
        arr = np.asarray(self.pairs, dtype=float).reshape(-1, 2)
        if np.any(np.isnan(arr)):
            raise ValueError("NaN in persistence pairs")
        if np.any(arr[:, 0] > arr[:, 1]):
            raise ValueError("birth exceeds death")
        arr = arr[arr[:, 0] < arr[:, 1]]
        order = np.lexsort((arr[:, 1], arr[:, 0]))
        arr = np.array(arr[order], copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "pairs", arr)

    def __len__(self) -> int:
        return self.pairs.shape[0]

    @property
    def births(self) -> np.ndarray:
        return self.pairs[:, 0]

    @property
    def deaths(self) -> np.ndarray:
        return self.pairs[:, 1]

    @property
    def n_infinite(self) -> int:
        return int(np.isinf(self.deaths).sum())

    def finite(self) -> "PersistenceDiagram":
        return PersistenceDiagram(self.dim, self.pairs[np.isfinite(self.deaths)])

    def persistence(self) -> np.ndarray:
        return self.deaths - self.births

    def as_multiset(self) -> Counter:
        return Counter(map(tuple, self.pairs.tolist()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.pairs, other.pairs)

    def __repr__(self) -> str:
        return f"PersistenceDiagram(dim={self.dim}, pairs={self.pairs.tolist()})"

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "pairs": [[b, None if math.isinf(d) else d] for b, d in self.pairs.tolist()],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "PersistenceDiagram":
        pairs = [(b, math.inf if d is None else d) for b, d in obj["pairs"]]
        return cls(int(obj["dim"]), np.array(pairs, dtype=float).reshape(-1, 2))


def union(a: PersistenceDiagram, b: PersistenceDiagram) -> PersistenceDiagram:
    """Multiset union: multiplicities add."""
    if a.dim != b.dim:
        raise ValueError("cannot merge diagrams of different dimension")
    return PersistenceDiagram(a.dim, np.vstack([a.pairs, b.pairs]), a.n_zero + b.n_zero)


def combined_pairs(diagrams: Iterable[PersistenceDiagram]) -> np.ndarray:
    """All pairs of several diagrams stacked, ignoring dimension."""
    arrs = [d.pairs for d in diagrams]
    return np.vstack(arrs) if arrs else np.empty((0, 2))


def dumps(diagrams: Sequence[PersistenceDiagram]) -> str:
    """Deterministic JSON text for a list of diagrams."""
    return json.dumps([d.to_dict() for d in diagrams], sort_keys=True, indent=1) + "\n"


def loads(text: str) -> list[PersistenceDiagram]:
    obj = json.loads(text)
    if isinstance(obj, dict):
        obj = [obj]
    return [PersistenceDiagram.from_dict(o) for o in obj]
