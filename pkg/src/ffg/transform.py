"""Formal transformations: the group GS_n and its subgroups SS_n, B_l, B^u."""

from __future__ import annotations

import enum
from itertools import permutations
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .basis import Basis, get_basis
from .errors import DimensionMismatch, NonzeroConstantTerm, NotInvertible, OrderMismatch
from .series import Series, chop, default_tol, derivative, max_norm


class GroupTag(str, enum.Enum):
    GS = "GS"
    SS = "SS"
    BL = "BL"
    BU = "BU"


class PolyMap:
    """An n-tuple of truncated series with zero constant term.

    The coefficients are held as an (n, D) complex array ``coeffs`` over the
    graded-lex basis; row ``i`` is component ``i + 1``.
    """

    __slots__ = ("n", "order", "coeffs")

    def __init__(self, n: int, order: int, coeffs=None, *, tol: float | None = None):
        tol = default_tol() if tol is None else tol
        basis = get_basis(n, order)
        if coeffs is None:
            arr = np.zeros((n, basis.size), dtype=np.complex128)
        else:
            arr = np.array(coeffs, dtype=np.complex128)
            if arr.shape != (n, basis.size):
                raise ValueError(f"expected coefficient array of shape {(n, basis.size)}")
            if not np.isfinite(arr).all():
                raise ValueError("coefficients must be finite")
            for row in arr:
                chop(row, tol)
            bad = np.flatnonzero(np.abs(arr[:, 0]) > tol)
            if bad.size:
                raise NonzeroConstantTerm(
                    f"component {bad[0] + 1} has constant term {complex(arr[bad[0], 0])}"
                )
            arr[:, 0] = 0
        self.n = n
        self.order = order
        self.coeffs = arr

    @classmethod
    def from_components(cls, components: Sequence[Series], **kw):
        components = list(components)
        if not components:
            raise ValueError("need at least one component")
        n, order = len(components), components[0].order
        for c in components:
            if c.n != n:
                raise DimensionMismatch(f"component in {c.n} variables, map has {n}")
            if c.order != order:
                raise OrderMismatch("components must share an order")
        return cls(n, order, np.array([c.coeffs for c in components]), **kw)

    @classmethod
    def linear(cls, U, order: int, **kw):
        U = np.asarray(U, dtype=np.complex128)
        n = U.shape[0]
        out = cls(n, order)
        out.coeffs[:, 1 : n + 1] = U
        return cls(n, order, out.coeffs, **kw)

    @classmethod
    def identity(cls, n: int, order: int):
        return cls.linear(np.eye(n), order)

    @property
    def basis(self) -> Basis:
        return get_basis(self.n, self.order)

    @property
    def components(self) -> tuple[Series, ...]:
        return tuple(Series(self.n, self.order, row, tol=0.0) for row in self.coeffs)

    @property
    def linear_part(self) -> np.ndarray:
        """``U[i, j]`` is the coefficient of ``x_{j+1}`` in component ``i+1``."""
        return self.coeffs[:, 1 : self.n + 1].copy()

    def degree_part(self, d: int) -> np.ndarray:
        return self.coeffs[:, self.basis.degree_slice(d)]

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs.imag) <= tol))

    def truncate(self, order: int):
        """Drop all degrees above ``order`` (lowering only)."""
        if order > self.order:
            raise OrderMismatch(
                f"cannot raise order {self.order} to {order}: "
                "missing coefficients are unknown, not zero"
            )
        if order == self.order:
            return self
        keep = get_basis(self.n, order).size
        return type(self)(self.n, order, self.coeffs[:, :keep], tol=0.0)

    def _check(self, other: "PolyMap"):
        if self.n != other.n:
            raise DimensionMismatch(f"dimensions {self.n} and {other.n} differ")
        if self.order != other.order:
            raise OrderMismatch(f"orders {self.order} and {other.order} differ")

    def __eq__(self, other):
        if not isinstance(other, PolyMap):
            return NotImplemented
        return (
            type(self) is type(other)
            and self.n == other.n
            and self.order == other.order
            and np.array_equal(self.coeffs, other.coeffs)
        )

    __hash__ = None

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, order={self.order})"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "order": self.order,
            "components": [c.to_json() for c in self.components],
        }

    @classmethod
    def from_json(cls, data: Mapping):
        comps = [Series.from_json(c) for c in data["components"]]
        out = cls.from_components(comps)
        if out.n != int(data["n"]) or out.order != int(data["order"]):
            raise ValueError("header does not match components")
        return out


class Transformation(PolyMap):
    """An element of GS_n: zero constant term, invertible linear part."""

    __slots__ = ()

    def __matmul__(self, other):
        if isinstance(other, Transformation):
            return compose(self, other)
        return NotImplemented


# ----------------------------------------------------------------- helpers


def compose_arrays(a: np.ndarray, b: np.ndarray, basis: Basis) -> np.ndarray:
    """Coefficients of ``a o b`` for (n, D) arrays with zero constant terms."""
    table = kernels.monomial_powers(b, basis)
    return a @ table


def conjugate_linear(u: PolyMap, V: np.ndarray, Vinv: np.ndarray | None = None) -> np.ndarray:
    """Coefficients of ``y -> V^-1 u(V y)``."""
    if Vinv is None:
        Vinv = np.linalg.inv(V)
    basis = u.basis
    lin = np.zeros_like(u.coeffs)
    lin[:, 1 : u.n + 1] = V
    inner = compose_arrays(u.coeffs, lin, basis)
    return Vinv @ inner


# ----------------------------------------------------------------- operations


def identity(n: int, order: int) -> Transformation:
    return Transformation.identity(n, order)


def compose(a: Transformation, b: Transformation) -> Transformation:
    """``a o b``: every component of ``a`` evaluated at ``b``."""
    a._check(b)
    return Transformation(a.n, a.order, compose_arrays(a.coeffs, b.coeffs, a.basis))


def compose_power(u: Transformation, k: int) -> Transformation:
    if k < 0:
        raise ValueError("power must be nonnegative")
    out = identity(u.n, u.order)
    for _ in range(k):
        out = compose(u, out)
    return out


def inverse(u: Transformation, tol: float | None = None) -> Transformation:
    """Compositional inverse, solved degree by degree.

    With ``v = U^-1 x + v_2 + ...``, the degree-d part of ``u(v)`` is
    ``U v_d`` plus terms fixed by ``v_2 .. v_{d-1}``; each ``v_d`` cancels
    those.
    """
    tol = default_tol() if tol is None else tol
    U = u.linear_part
    scale = max(1.0, float(np.abs(U).max()))
    if abs(np.linalg.det(U)) <= tol * scale**u.n:
        raise NotInvertible("linear part is singular")
    basis = u.basis
    Uinv = np.linalg.inv(U)
    v = np.zeros_like(u.coeffs)
    v[:, 1 : u.n + 1] = Uinv
    for d in range(2, u.order + 1):
        sl = basis.degree_slice(d)
        w = compose_arrays(u.coeffs, v, basis)
        v[:, sl] = -Uinv @ w[:, sl]
    return Transformation(u.n, u.order, v)


def jacobian_matrix(u: PolyMap) -> list[list[Series]]:
    comps = u.components
    return [[derivative(c, j) for j in range(u.n)] for c in comps]


def _perm_sign(p) -> int:
    sign, seen = 1, [False] * len(p)
    for i in range(len(p)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def jacobian_det(u: PolyMap) -> Series:
    """``det Du`` as a truncated series; reliable through degree N - 1."""
    J = jacobian_matrix(u)
    basis = u.basis
    total = np.zeros(basis.size, dtype=np.complex128)
    for p in permutations(range(u.n)):
        term = J[0][p[0]].coeffs
        for i in range(1, u.n):
            term = kernels.truncated_mul(term, J[i][p[i]].coeffs, basis)
        total += _perm_sign(p) * term
    return Series(u.n, u.order, total)


def classify(u: PolyMap, tol: float | None = None) -> set[GroupTag]:
    tol = default_tol() if tol is None else tol
    U = u.linear_part
    tags: set[GroupTag] = set()
    if abs(np.linalg.det(U)) <= tol:
        return tags
    tags.add(GroupTag.GS)
    # degree N of the determinant depends on dropped terms of u
    det = jacobian_det(u).coeffs[: u.basis.starts[u.order]]
    one = np.zeros_like(det)
    one[0] = 1
    if np.abs(det - one).max() <= tol:
        tags.add(GroupTag.SS)
    real = bool(np.all(np.abs(U.imag) <= tol))
    positive = bool(np.all(np.diag(U).real > tol))
    if real and positive:
        if np.all(np.abs(np.triu(U, 1)) < tol):
            tags.add(GroupTag.BL)
        if np.all(np.abs(np.tril(U, -1)) < tol):
            tags.add(GroupTag.BU)
    return tags


def distance(a: PolyMap, b: PolyMap) -> float:
    a._check(b)
    return float(np.abs(a.coeffs - b.coeffs).max(initial=0.0))


def random_transformation(
    n: int,
    order: int,
    rng: np.random.Generator | int | None = None,
    *,
    box: float = 1.0,
    linear=None,
    perturb: float = 0.3,
    complex_coeffs: bool = False,
) -> Transformation:
    """Random element with tail coefficients uniform in ``[-box, box]``.

    The linear part is ``linear`` when given, else the identity plus a
    uniform perturbation of size ``perturb``.
    """
    rng = np.random.default_rng(rng)
    basis = get_basis(n, order)
    coeffs = rng.uniform(-box, box, size=(n, basis.size)).astype(np.complex128)
    if complex_coeffs:
        coeffs += 1j * rng.uniform(-box, box, size=(n, basis.size))
    coeffs[:, 0] = 0
    if linear is None:
        linear = np.eye(n) + rng.uniform(-perturb, perturb, size=(n, n))
    coeffs[:, 1 : n + 1] = linear
    return Transformation(n, order, coeffs)


def shear(n: int, order: int, target: int, term: Iterable[tuple[Sequence[int], complex]]):
    """``x_target -> x_target + f(other variables)``; always volume preserving."""
    u = identity(n, order)
    coeffs = u.coeffs.copy()
    basis = u.basis
    for exp, c in term:
        exp = tuple(exp)
        if exp[target] != 0:
            raise ValueError("shear term may not involve its own variable")
        if sum(exp) <= order:
            coeffs[target, basis.index[exp]] += c
    return Transformation(n, order, coeffs)


__all__ = [
    "GroupTag",
    "PolyMap",
    "Transformation",
    "classify",
    "compose",
    "compose_power",
    "distance",
    "identity",
    "inverse",
    "jacobian_det",
    "max_norm",
    "random_transformation",
    "shear",
]
