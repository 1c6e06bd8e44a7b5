"""Zero-dimensional persistence from a minimum spanning forest."""

from __future__ import annotations

import math

import numpy as np

from ..rips import DistanceMatrix
from .diagram import PersistenceDiagram


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def h0_unionfind(dm: DistanceMatrix, max_scale: float = math.inf) -> PersistenceDiagram:
    """H0 diagram from Kruskal merges of edges no longer than ``max_scale``.

    Every vertex is born at 0; a merge at edge length ``d`` kills one
    component, and each component left at the end is an infinite bar.
    """
    n = dm.n
    i, j = np.triu_indices(n, k=1)
    w = dm.entries[i, j]
    keep = w <= max_scale
    i, j, w = i[keep], j[keep], w[keep]
    order = np.argsort(w, kind="stable")

    uf = UnionFind(n)
    deaths: list[float] = []
    n_zero = 0
    components = n
    for e in order.tolist():
        if components == 1:
            break
        if uf.union(int(i[e]), int(j[e])):
            components -= 1
            if w[e] > 0:
                deaths.append(float(w[e]))
            else:
                n_zero += 1
    deaths.extend([math.inf] * components)
    pairs = np.column_stack([np.zeros(len(deaths)), np.array(deaths, dtype=float)])
    return PersistenceDiagram(0, pairs, n_zero=n_zero)
