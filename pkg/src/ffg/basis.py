"""Graded-lexicographic monomial bases and the index tables the kernels use.

Monomials of degree 0..N in n variables are stored densely.  Within a degree
they are ordered lexicographically descending on the exponent tuple, so for
n = 2 the degree-2 block is ``x1^2, x1*x2, x2^2``.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb

import numpy as np


def exponents_of_degree(n: int, d: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree ``d``, lex-descending."""
    if n == 1:
        return [(d,)]
    out = []
    for first in range(d, -1, -1):
        for rest in exponents_of_degree(n - 1, d - first):
            out.append((first,) + rest)
    return out


def basis_size(n: int, order: int) -> int:
    return comb(n + order, order)


class Basis:
    """Monomial basis up to total degree ``order`` with precomputed tables.

    Attributes
    ----------
    exps : (D, n) int64 array of exponents in graded-lex order.
    degrees : (D,) total degree of each monomial.
    starts : degree ``d`` occupies ``starts[d]:starts[d + 1]``.
    pair_i, pair_j, pair_k : every pair ``(i, j)`` with
        ``deg i + deg j <= order`` and ``k`` the index of the product,
        sorted by ``i``; ``pair_start[i]`` delimits the rows of ``i``.
    parent, parent_var : ``x^q = x^parent[q] * x_{parent_var[q]}``.
    lower : ``lower[q, v]`` is the index of ``q - e_v`` or -1.
    """

    def __init__(self, n: int, order: int):
        if n < 1:
            raise ValueError("dimension must be positive")
        if order < 0:
            raise ValueError("order must be nonnegative")
        self.n = n
        self.order = order
        exps = []
        starts = [0]
        for d in range(order + 1):
            exps.extend(exponents_of_degree(n, d))
            starts.append(len(exps))
        self.exps = np.array(exps, dtype=np.int64).reshape(len(exps), n)
        self.size = len(exps)
        self.degrees = self.exps.sum(axis=1)
        self.starts = np.array(starts, dtype=np.int64)
        self.index = {e: k for k, e in enumerate(exps)}

        self._radix = order + 1
        self._weights = self._radix ** np.arange(n, dtype=np.int64)
        keys = self.exps @ self._weights
        self._key_order = np.argsort(keys)
        self._sorted_keys = keys[self._key_order]

        self._build_pairs()
        self._build_parents()

    def __repr__(self):
        return f"Basis(n={self.n}, order={self.order}, size={self.size})"

    def degree_slice(self, d: int) -> slice:
        return slice(int(self.starts[d]), int(self.starts[d + 1]))

    def rank(self, exps: np.ndarray) -> np.ndarray:
        """Vectorised index lookup; exponents above the order give -1."""
        exps = np.asarray(exps, dtype=np.int64)
        out = np.full(exps.shape[:-1], -1, dtype=np.int64)
        ok = (exps.sum(axis=-1) <= self.order) & (exps >= 0).all(axis=-1)
        keys = exps[ok] @ self._weights
        pos = np.searchsorted(self._sorted_keys, keys)
        out[ok] = self._key_order[pos]
        return out

    def _build_pairs(self):
        D = self.size
        pi, pj, pk = [], [], []
        starts = np.zeros(D + 1, dtype=np.int64)
        for i in range(D):
            room = self.order - self.degrees[i]
            js = np.arange(int(self.starts[room + 1]), dtype=np.int64)
            ks = self.rank(self.exps[i] + self.exps[js])
            pi.append(np.full(js.size, i, dtype=np.int64))
            pj.append(js)
            pk.append(ks)
            starts[i + 1] = starts[i] + js.size
        self.pair_i = np.concatenate(pi)
        self.pair_j = np.concatenate(pj)
        self.pair_k = np.concatenate(pk)
        self.pair_start = starts

    def _build_parents(self):
        D, n = self.size, self.n
        self.parent = np.full(D, -1, dtype=np.int64)
        self.parent_var = np.full(D, -1, dtype=np.int64)
        lower = np.full((D, n), -1, dtype=np.int64)
        for v in range(n):
            shifted = self.exps.copy()
            shifted[:, v] -= 1
            lower[:, v] = self.rank(shifted)
        self.lower = lower
        for q in range(1, D):
            v = int(np.flatnonzero(self.exps[q])[0])
            self.parent[q] = lower[q, v]
            self.parent_var[q] = v

    def variable_index(self, v: int) -> int:
        """Index of the coordinate monomial ``x_{v+1}`` (0-based ``v``)."""
        return 1 + v


@lru_cache(maxsize=64)
def get_basis(n: int, order: int) -> Basis:
    return Basis(n, order)
