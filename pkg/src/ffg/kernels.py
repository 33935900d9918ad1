"""Hot inner loops on dense coefficient vectors.

Each kernel exists twice: a numba-compiled loop (``*_nb``) and a vectorised
numpy fallback (``*_np``).  The public wrappers dispatch on
:data:`ffg._accel.USE_NUMBA`; both paths are tested against each other.

All coefficient vectors are complex128 arrays indexed by a :class:`Basis`.
"""

from __future__ import annotations

import numpy as np

from . import _accel
from ._accel import njit
from .basis import Basis


# --------------------------------------------------------------------------
# truncated product


@njit
def _mul_nb(a, b, pair_start, pair_j, pair_k, out):
    for i in range(a.shape[0]):
        ai = a[i]
        if ai == 0:
            continue
        for t in range(pair_start[i], pair_start[i + 1]):
            bj = b[pair_j[t]]
            if bj != 0:
                out[pair_k[t]] += ai * bj


def _mul_np(a, b, basis):
    prod = a[basis.pair_i] * b[basis.pair_j]
    D = basis.size
    return np.bincount(basis.pair_k, prod.real, D) + 1j * np.bincount(
        basis.pair_k, prod.imag, D
    )


def mul_nb(a, b, basis):
    out = np.zeros(basis.size, dtype=np.complex128)
    _mul_nb(a, b, basis.pair_start, basis.pair_j, basis.pair_k, out)
    return out


def mul_np(a, b, basis):
    return _mul_np(a, b, basis)


def truncated_mul(a: np.ndarray, b: np.ndarray, basis: Basis) -> np.ndarray:
    """Product of two coefficient vectors, dropping degrees above the order."""
    if _accel.USE_NUMBA:
        return mul_nb(a, b, basis)
    return mul_np(a, b, basis)


# --------------------------------------------------------------------------
# monomial powers of a map: row q holds the coefficients of u^q


@njit
def _powers_nb(comps, parent, parent_var, pair_start, pair_j, pair_k, out):
    out[0, 0] = 1.0
    for q in range(1, parent.shape[0]):
        a = out[parent[q]]
        b = comps[parent_var[q]]
        row = out[q]
        for i in range(a.shape[0]):
            ai = a[i]
            if ai == 0:
                continue
            for t in range(pair_start[i], pair_start[i + 1]):
                bj = b[pair_j[t]]
                if bj != 0:
                    row[pair_k[t]] += ai * bj


def powers_nb(comps, source, target):
    out = np.zeros((source.size, target.size), dtype=np.complex128)
    _powers_nb(
        np.ascontiguousarray(comps),
        source.parent,
        source.parent_var,
        target.pair_start,
        target.pair_j,
        target.pair_k,
        out,
    )
    return out


def powers_np(comps, source, target):
    out = np.zeros((source.size, target.size), dtype=np.complex128)
    out[0, 0] = 1.0
    for q in range(1, source.size):
        out[q] = _mul_np(out[source.parent[q]], comps[source.parent_var[q]], target)
    return out


def monomial_powers(
    comps: np.ndarray, source: Basis, target: Basis | None = None
) -> np.ndarray:
    """Table ``P`` with ``P[q]`` the coefficients of ``u_1^q1 ... u_n^qn``.

    ``comps`` holds one coefficient vector (over ``target``) per variable of
    ``source``.  Substituting ``u`` into a series ``a`` over ``source`` is
    then ``a @ P``.
    """
    target = source if target is None else target
    if _accel.USE_NUMBA:
        return powers_nb(comps, source, target)
    return powers_np(comps, source, target)


# --------------------------------------------------------------------------
# derivation p -> Dp . X


@njit
def _derivation_nb(field, exps, lower, pair_start, pair_j, pair_k, out):
    n = exps.shape[1]
    for q in range(1, exps.shape[0]):
        for v in range(n):
            c = exps[q, v]
            if c == 0:
                continue
            p = lower[q, v]
            fv = field[v]
            for t in range(pair_start[p], pair_start[p + 1]):
                x = fv[pair_j[t]]
                if x != 0:
                    out[pair_k[t], q] += c * x


def derivation_nb(field, basis):
    D = basis.size
    out = np.zeros((D, D), dtype=np.complex128)
    _derivation_nb(
        np.ascontiguousarray(field),
        basis.exps,
        basis.lower,
        basis.pair_start,
        basis.pair_j,
        basis.pair_k,
        out,
    )
    return out


def derivation_np(field, basis):
    D = basis.size
    out = np.zeros((D, D), dtype=np.complex128)
    flat = basis.pair_k * D + basis.pair_j
    for v in range(basis.n):
        # multiplication by field[v]: (k, j) += field[v][i]
        w = field[v][basis.pair_i]
        mult = (
            np.bincount(flat, w.real, D * D) + 1j * np.bincount(flat, w.imag, D * D)
        ).reshape(D, D)
        # partial derivative in x_v: column q -> row q - e_v with factor q_v
        src = np.flatnonzero(basis.lower[:, v] >= 0)
        deriv = np.zeros((D, D))
        deriv[basis.lower[src, v], src] = basis.exps[src, v]
        out += mult @ deriv
    return out


def derivation_operator(field: np.ndarray, basis: Basis) -> np.ndarray:
    """Full (D, D) matrix of ``p -> sum_v dp/dx_v * field_v``, truncated."""
    if _accel.USE_NUMBA:
        return derivation_nb(field, basis)
    return derivation_np(field, basis)
