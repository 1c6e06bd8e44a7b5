"""Persistent homology over a prime field."""

from .diagram import PersistenceDiagram, combined_pairs, dumps, loads, union
from .field import DEFAULT_PRIME, FieldSpec, add, inv, is_prime, mul
from .reduction import FiltrationError, reduce, reduce_explicit
from .unionfind import UnionFind, h0_unionfind

__all__ = [
    "DEFAULT_PRIME",
    "FieldSpec",
    "FiltrationError",
    "PersistenceDiagram",
    "UnionFind",
    "add",
    "combined_pairs",
    "dumps",
    "h0_unionfind",
    "inv",
    "is_prime",
    "loads",
    "mul",
    "reduce",
    "reduce_explicit",
    "union",
]
