"""Formal flows, logarithms, functional roots and continuous iterates.

Every polynomial map acts on truncated polynomials by substitution,
``p -> p o u``, and a vector field ``X`` acts by the derivation
``p -> Dp . X``.  Both are finite matrices on the monomial basis of degrees
1..N.  Because every component of ``X`` has degree >= 1 the derivation never
lowers degree, so its matrix exponential is the exact (truncated) time-one
substitution operator: ``C_{exp_flow(X, t)} = exp(t D_X)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from . import kernels
from .basis import Basis, get_basis
from .errors import DefectiveLinearPart, InconsistentWitness, ObstructionError
from .linfun import (
    branch_choices,
    eigen,
    is_real_matrix,
    mat_exp,
    mat_log,
    root_values,
)
from .resonance import ResonanceWitness, classify_witness, principal_log
from .series import default_tol
from .transform import PolyMap, Transformation, compose_arrays, conjugate_linear

log = logging.getLogger(__name__)


class VectorField(PolyMap):
    """Right-hand side of ``y' = X(y)``; components have zero constant term."""

    __slots__ = ("meta",)

    def __init__(self, *args, **kw):
        super().__init__(*args, **kw)
        self.meta = {}


@dataclass
class DerivationMatrix:
    matrix: np.ndarray
    exps: np.ndarray  # basis monomials of degree 1..N, graded-lex

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass
class Obstruction:
    """A singular homological equation with a nonzero right-hand side.

    ``component`` is 1-based and, like ``monomial``, refers to coordinates in
    which the linear part is diagonal; these coincide with the input
    coordinates whenever the linear part already is diagonal.
    """

    degree: int
    component: int
    monomial: tuple[int, ...]
    divisor: complex
    residual: complex
    witness: ResonanceWitness | None = None
    partial: PolyMap | None = field(default=None, repr=False)
    branch: tuple[int, ...] | None = None

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "component": self.component,
            "monomial": list(self.monomial),
            "divisor": {"re": float(self.divisor.real), "im": float(self.divisor.imag)},
            "residual": {
                "re": float(self.residual.real),
                "im": float(self.residual.imag),
            },
            "resonance": None if self.witness is None else self.witness.to_json(),
        }

    def solved_max_by_degree(self) -> dict[int, float]:
        """Largest solved coefficient per degree ``2 .. degree - 1``."""
        if self.partial is None:
            return {}
        basis = self.partial.basis
        return {
            d: float(np.abs(self.partial.coeffs[:, basis.degree_slice(d)]).max())
            for d in range(2, self.degree)
        }


# ---------------------------------------------------------------- operators


def derivation_matrix(X: PolyMap) -> DerivationMatrix:
    basis = X.basis
    full = kernels.derivation_operator(X.coeffs, basis)
    return DerivationMatrix(matrix=full[1:, 1:], exps=basis.exps[1:])


def substitution_matrix(u: PolyMap) -> np.ndarray:
    """Matrix of ``p -> p o u`` on the degree 1..N monomials."""
    table = kernels.monomial_powers(u.coeffs, u.basis)
    return table[1:, 1:].T.copy()


def dilation_exponent(coeffs: np.ndarray, basis: Basis) -> int:
    """``k`` such that rescaling ``x -> 2^-k x`` balances the degree blocks.

    Degree-``d`` coefficients of a field scale by ``2^(-k (d - 1))`` under
    the dilation; ``k`` is chosen from the geometric growth rate of the
    coefficients so that the derivation matrix has a moderate norm.
    """
    rate = 0.0
    for d in range(2, basis.order + 1):
        block = np.abs(coeffs[:, basis.degree_slice(d)])
        top = float(block.max(initial=0.0))
        if top > 0:
            rate = max(rate, np.log2(top) / (d - 1))
    return max(0, int(np.ceil(rate)))


def _flow_coeffs(X: PolyMap, t: float) -> np.ndarray:
    n = X.n
    coeffs = np.zeros_like(X.coeffs)
    if t == 0:
        coeffs[:, 1 : n + 1] = np.eye(n)
        return coeffs
    basis = X.basis
    # conjugating by a power-of-two dilation is exact and keeps the
    # scaling-and-squaring in expm from amplifying rounding errors
    k = dilation_exponent(X.coeffs, basis)
    shift = (basis.degrees - 1).astype(float)
    scaled = X.coeffs * np.exp2(-k * shift)[None, :]
    scaled[:, 0] = 0
    D = kernels.derivation_operator(scaled, basis)[1:, 1:]
    E = mat_exp(t * D)
    coeffs[:, 1:] = E[:, :n].T
    coeffs *= np.exp2(k * shift)[None, :]
    coeffs[:, 0] = 0
    return coeffs


def exp_flow(X: PolyMap, t: float = 1.0) -> Transformation:
    """Time-``t`` map of ``y' = X(y)``, exact through the truncation order."""
    return Transformation(X.n, X.order, _flow_coeffs(X, t))


def homological_operator(B: np.ndarray, d: int, order: int | None = None) -> np.ndarray:
    """Matrix of ``w -> [exp_flow(Bx + w, 1)]_d`` on degree-``d`` fields ``w``.

    Only the linear part enters at degree ``d``: an insertion of ``w`` meets
    nonlinear terms of the field only in degrees above ``d``.  The operator
    is therefore assembled column by column from the flow of ``Bx + w`` on
    the coordinates plus the degree-``d`` monomials.  Unknowns and equations
    are ordered component-major: index ``s * n_d + j``.
    """
    B = np.asarray(B, dtype=np.complex128)
    n = B.shape[0]
    basis = get_basis(n, d if order is None else max(order, d))
    sl = basis.degree_slice(d)
    nd = sl.stop - sl.start
    lin = np.zeros((n, basis.size), dtype=np.complex128)
    lin[:, 1 : n + 1] = B
    full = kernels.derivation_operator(lin, basis)
    size = n + nd
    base = np.zeros((size, size), dtype=np.complex128)
    base[:n, :n] = full[1 : n + 1, 1 : n + 1]
    base[n:, n:] = full[sl, sl]
    phi = np.empty((n * nd, n * nd), dtype=np.complex128)
    for s in range(n):
        for j in range(nd):
            M = base.copy()
            M[n + j, s] = 1.0
            E = mat_exp(M)
            phi[:, s * nd + j] = E[n:, :n].T.reshape(-1)
    return phi


def diagonal_divisor(mu: np.ndarray, s: int, m: Sequence[int]) -> complex:
    """``(e^<m,mu> - e^mu_s) / (<m,mu> - mu_s)``, or ``e^mu_s`` at equality."""
    a = complex(np.dot(m, mu))
    b = complex(mu[s])
    z = a - b
    if z == 0:
        return complex(np.exp(b))
    return complex(np.exp(b) * np.expm1(z) / z)


def _solve_degree(phi: np.ndarray, r: np.ndarray, tol: float):
    """Solve ``phi w = r``; returns ``(w, unique, consistent)``."""
    if phi.size == 0:
        return np.zeros(0, dtype=np.complex128), True, True
    left, sv, right = np.linalg.svd(phi)
    cutoff = tol * max(1.0, sv[0])
    if sv[-1] > cutoff:
        lu = scipy.linalg.lu_factor(phi)
        return scipy.linalg.lu_solve(lu, r), True, True
    # minimal-norm solution on the numerically nonzero singular values
    keep = sv > cutoff
    coef = (left[:, keep].conj().T @ r) / sv[keep]
    w = right[keep].conj().T @ coef
    resid = np.abs(phi @ w - r).max(initial=0.0)
    consistent = resid <= tol * max(1.0, np.abs(r).max(initial=0.0))
    return w, False, bool(consistent)


def _witness_or_none(lam, s, m, tol):
    try:
        return classify_witness(lam, s, m, tol)
    except InconsistentWitness:
        return None


# ---------------------------------------------------------------- logarithm


def log_transform(u: Transformation, tol: float | None = None) -> VectorField:
    """A vector field ``X`` with ``exp_flow(X, 1) == u`` through order N.

    Degree by degree, ``X`` is corrected by the solution of the linear
    homological equation whose right-hand side is the current defect.  When
    the equation is singular but consistent the minimal-norm correction is
    used and the degree is recorded in ``X.meta["nonunique_degrees"]``.
    Raises :class:`ObstructionError` when it is singular and inconsistent.
    """
    tol = default_tol() if tol is None else tol
    n, N = u.n, u.order
    basis = u.basis
    B = mat_log(u.linear_part, tol)
    X = np.zeros_like(u.coeffs)
    X[:, 1 : n + 1] = B
    nonunique = []
    for d in range(2, N + 1):
        sl = basis.degree_slice(d)
        nd = sl.stop - sl.start
        field_d = VectorField(n, N, X, tol=0.0)
        defect = (u.coeffs - _flow_coeffs(field_d, 1.0))[:, sl]
        r = defect.reshape(-1)
        phi = homological_operator(B, d)
        w, unique, consistent = _solve_degree(phi, r, tol)
        if not consistent:
            obs = _diagnose_log(u, d, defect, tol)
            obs.partial = VectorField(n, N, X, tol=0.0)
            raise ObstructionError(obs)
        if not unique:
            nonunique.append(d)
        X[:, sl] = w.reshape(n, nd)
    X = _refine_log(u, X, B, tol)
    out = VectorField(n, N, X)
    out.meta["nonunique_degrees"] = nonunique
    return out


def _refine_log(u: Transformation, X: np.ndarray, B: np.ndarray, tol: float) -> np.ndarray:
    """One sweep of residual correction against the full-order defect.

    Large log coefficients make ``exp_flow`` cancel heavily; re-solving each
    degree against the residual of the finished field recovers most of the
    accuracy lost in the forward pass.  The sweep is kept only if it helps.
    """
    n, N, basis = u.n, u.order, u.basis

    def residual(coeffs):
        return u.coeffs - _flow_coeffs(VectorField(n, N, coeffs, tol=0.0), 1.0)

    before = np.abs(residual(X)).max()
    Y = X.copy()
    for d in range(2, N + 1):
        sl = basis.degree_slice(d)
        r = residual(Y)[:, sl]
        w, unique, _ = _solve_degree(homological_operator(B, d), r.reshape(-1), tol)
        if unique:
            Y[:, sl] += w.reshape(n, -1)
    return Y if np.abs(residual(Y)).max() < before else X


def _diagnose_log(u: Transformation, d: int, defect: np.ndarray, tol: float) -> Obstruction:
    n, N = u.n, u.order
    basis = u.basis
    sl = basis.degree_slice(d)
    exps = basis.exps[sl]
    try:
        es = eigen(u.linear_part, tol=tol)
    except DefectiveLinearPart:
        es = None
    if es is not None:
        res_map = np.zeros_like(u.coeffs)
        res_map[:, sl] = defect
        rt = conjugate_linear(PolyMap(n, N, res_map, tol=0.0), es.vectors)[:, sl]
        mu = principal_log(es.values)
        res_tol = tol * max(1.0, float(np.abs(defect).max()))
        for j, m in enumerate(exps):
            for s in range(n):
                div = diagonal_divisor(mu, s, m)
                if abs(div) <= tol * max(1.0, abs(np.exp(mu[s]))) and abs(rt[s, j]) > res_tol:
                    return Obstruction(
                        degree=d,
                        component=s + 1,
                        monomial=tuple(int(e) for e in m),
                        divisor=div,
                        residual=complex(rt[s, j]),
                        witness=_witness_or_none(es.values, s + 1, m, tol),
                    )
    # no clean diagonal diagnosis: report the largest unresolved entry
    phi = homological_operator(mat_log(u.linear_part, tol), d)
    r = defect.reshape(-1)
    w, _, _ = _solve_degree(phi, r, tol)
    rho = (r - phi @ w).reshape(n, -1)
    s, j = np.unravel_index(int(np.argmax(np.abs(rho))), rho.shape)
    sv = np.linalg.svd(phi, compute_uv=False)
    return Obstruction(
        degree=d,
        component=int(s) + 1,
        monomial=tuple(int(e) for e in exps[j]),
        divisor=complex(sv[-1]),
        residual=complex(defect[s, j]),
    )


# ---------------------------------------------------------------- roots


@dataclass
class BranchResult:
    branch: tuple[int, ...]
    root: Transformation | None = None
    obstruction: Obstruction | None = None
    nonunique_degrees: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.root is not None


def _root_in_eigenbasis(u, k, es, branch, tol):
    n, N = u.n, u.order
    basis = u.basis
    V = es.vectors
    Vinv = np.linalg.inv(V)
    ut = conjugate_linear(u, V, Vinv)
    a = root_values(es, k, branch)
    g = np.zeros_like(u.coeffs)
    g[:, 1 : n + 1] = np.diag(a)
    res_tol = tol * max(1.0, float(np.abs(ut).max()))
    nonunique = []
    for d in range(2, N + 1):
        sl = basis.degree_slice(d)
        exps = basis.exps[sl]
        power = g
        for _ in range(k - 1):
            power = compose_arrays(g, power, basis)
        rho = ut[:, sl] - power[:, sl]
        am = np.prod(a[None, :] ** exps, axis=1)
        j = np.arange(k)
        # divisor[s, p] = sum_j a_s^(k-1-j) (a^m_p)^j
        terms = (a[:, None, None] ** (k - 1 - j)[None, None, :]) * (
            am[None, :, None] ** j[None, None, :]
        )
        div = terms.sum(axis=2)
        scale = np.abs(terms).sum(axis=2)
        singular = np.abs(div) <= tol * scale
        bad = singular & (np.abs(rho) > res_tol)
        if bad.any():
            p_idx, s_idx = next(
                (p, s) for p in range(exps.shape[0]) for s in range(n) if bad[s, p]
            )
            back = conjugate_linear(PolyMap(n, N, g, tol=0.0), Vinv, V)
            m = tuple(int(e) for e in exps[p_idx])
            raise ObstructionError(
                Obstruction(
                    degree=d,
                    component=s_idx + 1,
                    monomial=m,
                    divisor=complex(div[s_idx, p_idx]),
                    residual=complex(rho[s_idx, p_idx]),
                    witness=_witness_or_none(es.values, s_idx + 1, m, tol),
                    partial=PolyMap(n, N, back, tol=0.0),
                    branch=tuple(int(b) for b in branch),
                )
            )
        if singular.any():
            nonunique.append(d)
        h = np.zeros_like(rho)
        np.divide(rho, div, out=h, where=~singular)
        g[:, sl] = h
    back = conjugate_linear(PolyMap(n, N, g, tol=0.0), Vinv, V)
    return back, nonunique


def functional_root(
    u: Transformation,
    k: int = 2,
    branch: Sequence[int] | None = None,
    tol: float | None = None,
) -> Transformation:
    """A ``g`` with ``g o ... o g`` (k times) equal to ``u`` through order N.

    The linear part of ``g`` is the k-th root of ``U`` with the given branch
    per eigenvalue (all zeros by default).  Raises :class:`ObstructionError`.
    """
    return _functional_root(u, k, branch, tol).root


def _functional_root(u, k, branch, tol, es=None) -> BranchResult:
    if k < 1:
        raise ValueError("root index must be positive")
    tol = default_tol() if tol is None else tol
    real = u.is_real(tol)
    if es is None:
        es = eigen(u.linear_part, real_adapted=real, tol=tol)
    branch = tuple([0] * u.n if branch is None else (int(b) for b in branch))
    coeffs, nonunique = _root_in_eigenbasis(u, k, es, branch, tol)
    if real and np.abs(coeffs.imag).max() <= tol * max(1.0, np.abs(coeffs).max()):
        coeffs = coeffs.real.astype(np.complex128)
    return BranchResult(
        branch=branch,
        root=Transformation(u.n, u.order, coeffs),
        nonunique_degrees=nonunique,
    )


def functional_root_all_branches(
    u: Transformation, k: int = 2, tol: float | None = None
) -> list[BranchResult]:
    """Run :func:`functional_root` on every branch of the linear part.

    For real ``u`` only branches giving a real linear part are kept.  An
    empty list means no admissible linear root exists at all.
    """
    tol = default_tol() if tol is None else tol
    real = u.is_real(tol)
    es = eigen(u.linear_part, real_adapted=real, tol=tol)
    V = es.vectors
    Vinv = np.linalg.inv(V)
    results = []
    for branch in branch_choices(u.n, k):
        if real:
            A = (V * root_values(es, k, branch)) @ Vinv
            if not is_real_matrix(A, tol * 10):
                continue
        try:
            results.append(_functional_root(u, k, branch, tol, es))
        except ObstructionError as exc:
            results.append(BranchResult(branch=branch, obstruction=exc.obstruction))
    return results


def certified_no_root(results: Sequence[BranchResult]) -> bool:
    return bool(results) and all(r.obstruction is not None for r in results)


# ---------------------------------------------------------------- iterates


def iterate(u: Transformation, t: float, tol: float | None = None) -> Transformation:
    """``f^t = exp_flow(log u, t)``; raises :class:`ObstructionError` if ``u``
    is not embedded in a flow at this order."""
    X = log_transform(u, tol)
    return exp_flow(X, t)
