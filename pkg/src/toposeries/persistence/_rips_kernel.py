"""Compiled persistence for Rips filtrations up to dimension 1.

H0 comes from reducing the edge boundary columns. The edges it pairs with
vertices are cleared from the H1 pass, which reduces coboundary columns of
the remaining edges in reverse filtration order. Triangles are never
materialised: a coboundary is regenerated from the distance matrix whenever a
column has to be added.

Inside the kernel, ties in value are broken by reverse colexicographic rank
(larger combinatorial index first). With that order an edge whose cheapest
cofacet has the same value is usually that triangle's youngest facet, so
tie-heavy clouds (exactly periodic signals) still pair without column
additions. Diagrams do not depend on the tie-break.
"""

from __future__ import annotations

import heapq
import math

import numba as nb
import numpy as np

from ..rips import RipsFiltration
from .diagram import PersistenceDiagram
from .field import FieldSpec


@nb.njit(cache=True)
def _inv(a, p):
    # extended Euclid; a in (0, p)
    t, new_t = 0, 1
    r, new_r = p, a
    while new_r != 0:
        q = r // new_r
        t, new_t = new_t, t - q * new_t
        r, new_r = new_r, r - q * new_r
    if t < 0:
        t += p
    return t


@nb.njit(cache=True)
def _h0(n, ei, ej, p):
    m = ei.size
    death = np.zeros(m, dtype=np.bool_)
    owned = np.zeros(n, dtype=np.bool_)
    own_other = np.zeros(n, dtype=np.int64)
    own_clow = np.zeros(n, dtype=np.int64)
    own_cother = np.zeros(n, dtype=np.int64)
    merges = 0
    for r in range(m):
        if merges == n - 1:
            break
        # boundary of [a, b] is +b - a
        low, clow = ej[r], np.int64(1)
        other, cother = ei[r], np.int64(p - 1)
        while True:
            if not owned[low]:
                owned[low] = True
                own_other[low] = other
                own_clow[low] = clow
                own_cother[low] = cother
                death[r] = True
                merges += 1
                break
            factor = (p - clow) * _inv(own_clow[low], p) % p
            o = own_other[low]
            co = factor * own_cother[low] % p
            if o == other:
                # reduced edge columns keep coefficient sum zero, so this cancels
                break
            if o > other:
                low, clow = o, co
            else:
                low, clow = other, cother
                other, cother = o, co
    return death, merges


@nb.njit(cache=True)
def _colex3(a, b, c):
    return c * (c - 1) * (c - 2) // 6 + b * (b - 1) // 2 + a


@nb.njit(cache=True)
def _tri(i, j, k):
    # colex rank of the sorted triangle and the coefficient of edge (i, j) in its boundary
    if k < i:
        return _colex3(k, i, j), 1
    if k < j:
        return _colex3(i, k, j), -1
    return _colex3(i, j, k), 1


def edge_order(ei: np.ndarray, ej: np.ndarray, ev: np.ndarray) -> np.ndarray:
    """Permutation sorting edges by value, then decreasing colex rank."""
    colex = ej * (ej - 1) // 2 + ei
    return np.lexsort((-colex, ev))


@nb.njit(cache=True)
def _push_coboundary(heap, D, t, i, j, ve, factor, p):
    n = D.shape[0]
    for k in range(n):
        if k == i or k == j:
            continue
        dik = D[i, k]
        djk = D[j, k]
        if dik > t or djk > t:
            continue
        val = max(ve, max(dik, djk))
        key, sign = _tri(i, j, k)
        c = factor if sign > 0 else (p - factor) % p
        if c != 0:
            heapq.heappush(heap, (val, -key, c))


@nb.njit(cache=True)
def _compact(heap, p):
    # merge duplicate entries so repeated additions cannot grow the heap without bound
    acc = nb.typed.Dict.empty(key_type=nb.types.int64, value_type=nb.types.int64)
    vals = nb.typed.Dict.empty(key_type=nb.types.int64, value_type=nb.types.float64)
    for q in range(len(heap)):
        val, nk, c = heap[q]
        acc[nk] = (acc.get(nk, 0) + c) % p
        vals[nk] = val
    out = [(0.0, np.int64(0), np.int64(0))]
    out.pop()
    for nk in acc:
        if acc[nk] != 0:
            out.append((vals[nk], nk, acc[nk]))
    heapq.heapify(out)
    return out


@nb.njit(cache=True)
def _get_pivot(heap, p):
    while len(heap) > 0:
        val, key, c = heapq.heappop(heap)
        while len(heap) > 0 and heap[0][1] == key:
            c += heapq.heappop(heap)[2]
        c %= p
        if c != 0:
            heapq.heappush(heap, (val, key, c))
            return True, val, key, c
    return False, 0.0, np.int64(1), np.int64(0)


@nb.njit(cache=True)
def _h1(D, t, ei, ej, ev, cleared, p):
    n = D.shape[0]
    m = ei.size
    pivot_of = nb.typed.Dict.empty(key_type=nb.types.int64, value_type=nb.types.int64)
    pivot_coeff = np.zeros(m, dtype=np.int64)
    v_start = np.full(m, -1, dtype=np.int64)
    v_len = np.zeros(m, dtype=np.int64)
    v_edge = np.empty(64, dtype=np.int64)
    v_coef = np.empty(64, dtype=np.int64)
    v_used = 0

    births = nb.typed.List.empty_list(nb.types.float64)
    deaths = nb.typed.List.empty_list(nb.types.float64)
    n_zero = 0
    added = 0

    for r in range(m - 1, -1, -1):
        if cleared[r]:
            continue
        i = ei[r]
        j = ej[r]
        ve = ev[r]

        best_val = np.inf
        best_key = np.int64(-1)
        best_c = np.int64(0)
        # cheapest cofacet: smallest value, then largest colex rank
        for k in range(n):
            if k == i or k == j:
                continue
            dik = D[i, k]
            djk = D[j, k]
            if dik > t or djk > t:
                continue
            val = max(ve, max(dik, djk))
            key, sign = _tri(i, j, k)
            if val < best_val or (val == best_val and key > best_key):
                best_val = val
                best_key = key
                best_c = 1 if sign > 0 else p - 1
        if best_key < 0:
            births.append(ve)
            deaths.append(np.inf)
            continue
        if best_key not in pivot_of:
            pivot_of[best_key] = r
            pivot_coeff[r] = best_c
            if best_val > ve:
                births.append(ve)
                deaths.append(best_val)
            else:
                n_zero += 1
            continue

        # pivot collision: reduce with the heap
        heap = [(0.0, np.int64(0), np.int64(0))]
        heapq.heappop(heap)
        _push_coboundary(heap, D, t, i, j, ve, np.int64(1), p)
        acc = nb.typed.Dict.empty(key_type=nb.types.int64, value_type=nb.types.int64)
        acc[r] = 1
        limit = 64 * n
        while True:
            if len(heap) > limit:
                heap = _compact(heap, p)
                limit = max(64 * n, 2 * len(heap))
            found, pv, pnk, pc = _get_pivot(heap, p)
            pk = -pnk
            if not found:
                births.append(ve)
                deaths.append(np.inf)
                break
            if pk in pivot_of:
                o = pivot_of[pk]
                factor = (p - pc) * _inv(pivot_coeff[o], p) % p
                added += 1
                if v_start[o] < 0:
                    _push_coboundary(heap, D, t, ei[o], ej[o], ev[o], factor, p)
                    acc[o] = (acc.get(o, 0) + factor) % p
                else:
                    for q in range(v_start[o], v_start[o] + v_len[o]):
                        e = v_edge[q]
                        c = factor * v_coef[q] % p
                        _push_coboundary(heap, D, t, ei[e], ej[e], ev[e], c, p)
                        acc[e] = (acc.get(e, 0) + c) % p
                continue
            pivot_of[pk] = r
            pivot_coeff[r] = pc
            if pv > ve:
                births.append(ve)
                deaths.append(pv)
            else:
                n_zero += 1
            # store the reduction column for later additions
            cnt = 0
            for e in acc:
                if acc[e] != 0:
                    cnt += 1
            while v_used + cnt > v_edge.size:
                grown_e = np.empty(v_edge.size * 2, dtype=np.int64)
                grown_c = np.empty(v_edge.size * 2, dtype=np.int64)
                grown_e[:v_used] = v_edge[:v_used]
                grown_c[:v_used] = v_coef[:v_used]
                v_edge = grown_e
                v_coef = grown_c
            v_start[r] = v_used
            for e in acc:
                if acc[e] != 0:
                    v_edge[v_used] = e
                    v_coef[v_used] = acc[e]
                    v_used += 1
            v_len[r] = cnt
            break

    b = np.empty(len(births))
    d = np.empty(len(deaths))
    for q in range(len(births)):
        b[q] = births[q]
        d[q] = deaths[q]
    return b, d, n_zero, added


def rips_persistence(f: RipsFiltration, field: FieldSpec = FieldSpec()) -> list[PersistenceDiagram]:
    """H0 (and H1 when ``max_dim == 2``) diagrams of a Rips filtration."""
    n = f.dm.n
    p = np.int64(field.p)
    ei, ej, ev = f.edges
    order = edge_order(ei, ej, ev)
    ei, ej, ev = ei[order], ej[order], ev[order]
    if f.max_dim == 0:
        return [PersistenceDiagram(0, np.column_stack([np.zeros(n), np.full(n, math.inf)]))]

    death, merges = _h0(n, ei, ej, p)
    dv = ev[death]
    h0 = np.concatenate([dv[dv > 0], np.full(n - merges, math.inf)])
    diagrams = [
        PersistenceDiagram(0, np.column_stack([np.zeros(h0.size), h0]), n_zero=int((dv == 0).sum()))
    ]
    if f.max_dim >= 2:
        D = np.ascontiguousarray(f.dm.entries)
        b, d, n_zero, _ = _h1(D, float(f.max_scale), ei, ej, ev, death, p)
        diagrams.append(PersistenceDiagram(1, np.column_stack([b, d]), n_zero=int(n_zero)))
    return diagrams
