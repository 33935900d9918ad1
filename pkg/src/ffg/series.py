"""Truncated multivariate formal power series over complex coefficients."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .basis import Basis, get_basis
from .errors import DimensionMismatch, NonzeroConstantTerm, OrderMismatch


def default_tol() -> float:
    """Zero threshold, overridable through ``FFG_TOL``."""
    raw = os.environ.get("FFG_TOL")
    if raw:
        value = float(raw)
        if not value >= 0:
            raise ValueError(f"FFG_TOL must be nonnegative, got {raw!r}")
        return value
    return 1e-9


@dataclass(frozen=True)
class Tolerance:
    zero_tol: float = 1e-9

    def __post_init__(self):
        if not self.zero_tol >= 0:
            raise ValueError("zero_tol must be nonnegative")


def chop(coeffs: np.ndarray, tol: float) -> np.ndarray:
    """Zero every entry below ``tol * (1 + max magnitude)``, in place."""
    mags = np.abs(coeffs)
    if mags.size == 0:
        return coeffs
    coeffs[mags < tol * (1.0 + mags.max())] = 0
    return coeffs


class Series:
    """A power series in ``n`` variables truncated above total degree ``order``.

    Coefficients live in a dense complex vector over the graded-lex basis of
    :func:`ffg.basis.get_basis`; ``terms`` exposes the sparse view.
    """

    __slots__ = ("n", "order", "coeffs")

    def __init__(self, n: int, order: int, coeffs=None, *, tol: float | None = None):
        if order < 1:
            raise ValueError("order must be at least 1")
        basis = get_basis(n, order)
        if coeffs is None:
            arr = np.zeros(basis.size, dtype=np.complex128)
        else:
            arr = np.array(coeffs, dtype=np.complex128)
            if arr.shape != (basis.size,):
                raise ValueError(
                    f"expected {basis.size} coefficients for n={n}, order={order}"
                )
            if not np.isfinite(arr).all():
                raise ValueError("series coefficients must be finite")
            chop(arr, default_tol() if tol is None else tol)
        self.n = n
        self.order = order
        self.coeffs = arr

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, n: int, order: int) -> "Series":
        return cls(n, order)

    @classmethod
    def constant(cls, n: int, order: int, value: complex) -> "Series":
        s = cls(n, order)
        s.coeffs[0] = value
        return s

    @classmethod
    def variable(cls, n: int, order: int, i: int) -> "Series":
        """The coordinate ``x_{i+1}`` (``i`` is 0-based)."""
        if not 0 <= i < n:
            raise IndexError(f"variable index {i} out of range for n={n}")
        s = cls(n, order)
        s.coeffs[1 + i] = 1.0
        return s

    @classmethod
    def from_terms(
        cls, n: int, order: int, terms: Mapping[Sequence[int], complex], **kw
    ) -> "Series":
        basis = get_basis(n, order)
        arr = np.zeros(basis.size, dtype=np.complex128)
        for exp, c in terms.items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n:
                raise DimensionMismatch(f"exponent {exp} has length != {n}")
            if sum(exp) > order:
                continue
            arr[basis.index[exp]] += c
        return cls(n, order, arr, **kw)

    # -- views ------------------------------------------------------------

    @property
    def basis(self) -> Basis:
        return get_basis(self.n, self.order)

    @property
    def terms(self) -> dict[tuple[int, ...], complex]:
        exps = self.basis.exps
        return {
            tuple(int(e) for e in exps[k]): complex(self.coeffs[k])
            for k in np.flatnonzero(self.coeffs)
        }

    def coefficient(self, exp: Sequence[int]) -> complex:
        exp = tuple(exp)
        if sum(exp) > self.order:
            raise ValueError(f"exponent {exp} exceeds order {self.order}")
        return complex(self.coeffs[self.basis.index[exp]])

    def degree_part(self, d: int) -> "Series":
        out = Series(self.n, self.order)
        sl = self.basis.degree_slice(d)
        out.coeffs[sl] = self.coeffs[sl]
        return out

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs.imag) <= tol))

    def max_norm(self) -> float:
        return max_norm(self)

    def __repr__(self):
        return f"Series(n={self.n}, order={self.order}, terms={self.terms})"

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return (
            self.n == other.n
            and self.order == other.order
            and np.array_equal(self.coeffs, other.coeffs)
        )

    __hash__ = None

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Series"):
        if self.n != other.n:
            raise DimensionMismatch(f"dimensions {self.n} and {other.n} differ")
        if self.order != other.order:
            raise OrderMismatch(f"orders {self.order} and {other.order} differ")

    def __add__(self, other):
        if isinstance(other, Series):
            return add(self, other)
        if np.isscalar(other):
            return add(self, Series.constant(self.n, self.order, other))
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Series(self.n, self.order, -self.coeffs)

    def __sub__(self, other):
        if isinstance(other, Series):
            self._check(other)
            return Series(self.n, self.order, self.coeffs - other.coeffs)
        if np.isscalar(other):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Series):
            return mul(self, other)
        if np.isscalar(other):
            return Series(self.n, self.order, self.coeffs * other)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return Series(self.n, self.order, self.coeffs * other)
        return NotImplemented

    def __truediv__(self, other):
        if np.isscalar(other):
            return Series(self.n, self.order, self.coeffs / other)
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = Series.constant(self.n, self.order, 1.0)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        exps = self.basis.exps
        return {
            "n": self.n,
            "order": self.order,
            "terms": [
                {
                    "exp": [int(e) for e in exps[k]],
                    "re": float(self.coeffs[k].real),
                    "im": float(self.coeffs[k].imag),
                }
                for k in np.flatnonzero(self.coeffs)
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Series":
        n, order = int(data["n"]), int(data["order"])
        basis = get_basis(n, order)
        arr = np.zeros(basis.size, dtype=np.complex128)
        for term in data["terms"]:
            exp = tuple(int(e) for e in term["exp"])
            if len(exp) != n or sum(exp) > order or min(exp) < 0:
                raise ValueError(f"bad exponent {exp} for n={n}, order={order}")
            arr[basis.index[exp]] = complex(float(term["re"]), float(term["im"]))
        return cls(n, order, arr)


def add(a: Series, b: Series) -> Series:
    a._check(b)
    return Series(a.n, a.order, a.coeffs + b.coeffs)


def mul(a: Series, b: Series) -> Series:
    a._check(b)
    return Series(a.n, a.order, kernels.truncated_mul(a.coeffs, b.coeffs, a.basis))


def derivative(p: Series, i: int) -> Series:
    """Partial derivative in ``x_{i+1}`` (0-based ``i``); same order cap."""
    if not 0 <= i < p.n:
        raise IndexError(f"variable index {i} out of range for n={p.n}")
    basis = p.basis
    out = np.zeros(basis.size, dtype=np.complex128)
    src = np.flatnonzero(basis.lower[:, i] >= 0)
    out[basis.lower[src, i]] = p.coeffs[src] * basis.exps[src, i]
    return Series(p.n, p.order, out)


def max_norm(a: Series) -> float:
    if a.coeffs.size == 0:
        return 0.0
    return float(np.abs(a.coeffs).max())


def check_substitutable(us: Sequence[Series], tol: float | None = None):
    tol = default_tol() if tol is None else tol
    for k, u in enumerate(us):
        if abs(u.coeffs[0]) > tol:
            raise NonzeroConstantTerm(
                f"component {k + 1} has constant term {complex(u.coeffs[0])}"
            )


def substitute(p: Series, us: Sequence[Series], tol: float | None = None) -> Series:
    """``p(u_1, ..., u_n)`` truncated at the common order."""
    us = list(us)
    if len(us) != p.n:
        raise DimensionMismatch(f"need {p.n} series to substitute, got {len(us)}")
    for u in us:
        if u.order != p.order:
            raise OrderMismatch("substituted series must share the order of p")
    m = us[0].n
    if any(u.n != m for u in us):
        raise DimensionMismatch("substituted series must share a dimension")
    check_substitutable(us, tol)
    comps = np.array([u.coeffs for u in us])
    comps[:, 0] = 0
    table = kernels.monomial_powers(comps, p.basis, get_basis(m, p.order))
    return Series(m, p.order, p.coeffs @ table)


def stack(series: Iterable[Series]) -> np.ndarray:
    return np.array([s.coeffs for s in series])
