"""Matrix functions of the linear part: eigensystems, log, roots, powers, exp.

All matrices are small (n <= 6) complex arrays.  Logarithms use the principal
branch; roots take an explicit per-eigenvalue branch choice.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .errors import BranchCut, DefectiveLinearPart, NotInvertible

MAX_DIM = 6
DEFECT_COND = 1e8


@dataclass(frozen=True)
class Eigensystem:
    values: np.ndarray
    vectors: np.ndarray
    condition: float
    # argument used for roots and logs; principal unless a real-adapted
    # basis pairs a repeated negative eigenvalue as (pi, -pi)
    args: np.ndarray

    @property
    def n(self) -> int:
        return self.values.size


def _as_square(U) -> np.ndarray:
    U = np.asarray(U, dtype=np.complex128)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {U.shape}")
    return U


def is_real_matrix(U, tol: float = 1e-9) -> bool:
    return bool(np.all(np.abs(np.imag(U)) <= tol))


def _principal_args(values: np.ndarray, tol: float) -> np.ndarray:
    args = np.angle(values)
    on_cut = (np.abs(values.imag) <= tol * np.abs(values)) & (values.real < 0)
    args[on_cut] = np.pi
    return args


def eigen(U, *, real_adapted: bool = False, tol: float = 1e-9) -> Eigensystem:
    """Eigenvalues and right eigenvectors, rejecting defective matrices.

    With ``real_adapted`` and a real ``U``, repeated negative real
    eigenvalues are paired into complex-conjugate eigenvectors
    ``(v1 -+ i v2)/sqrt 2`` carrying arguments ``(pi, -pi)``, so that root
    branches come in real pairs exactly as for a rotation.
    """
    U = _as_square(U)
    n = U.shape[0]
    if n > MAX_DIM:
        raise ValueError(f"matrix dimension {n} exceeds {MAX_DIM}")
    values, vectors = np.linalg.eig(U)
    cond = float(np.linalg.cond(vectors))
    if not np.isfinite(cond) or cond > DEFECT_COND:
        raise DefectiveLinearPart(f"eigenvector matrix condition {cond:.3g}")
    args = _principal_args(values, tol)

    if real_adapted and is_real_matrix(U, tol):
        neg = [
            j
            for j in range(n)
            if abs(values[j].imag) <= tol * abs(values[j]) and values[j].real < 0
        ]
        # group equal negative eigenvalues, pair within each group
        groups: list[list[int]] = []
        for j in neg:
            for g in groups:
                if abs(values[g[0]] - values[j]) <= tol * abs(values[j]) * 10:
                    g.append(j)
                    break
            else:
                groups.append([j])
        vectors = vectors.copy()
        values = values.copy()
        for g in groups:
            basis = np.array([_realify(vectors[:, j]) for j in g]).T
            basis, _ = np.linalg.qr(basis)
            for p, q in zip(g[0::2], g[1::2]):
                ip = g.index(p)
                v1, v2 = basis[:, ip], basis[:, ip + 1]
                lam = values[p].real
                vectors[:, p] = (v1 - 1j * v2) / np.sqrt(2)
                vectors[:, q] = (v1 + 1j * v2) / np.sqrt(2)
                values[p] = values[q] = lam
                args[p], args[q] = np.pi, -np.pi
        cond = float(np.linalg.cond(vectors))
    return Eigensystem(values=values, vectors=vectors, condition=cond, args=args)


def _realify(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    v = v * (abs(v[k]) / v[k])
    return v.real / np.linalg.norm(v.real)


def _from_eigen(es: Eigensystem, diag: np.ndarray) -> np.ndarray:
    V = es.vectors
    return (V * diag) @ np.linalg.inv(V)


def _check_invertible(U, tol):
    scale = max(1.0, float(np.abs(U).max()))
    if abs(np.linalg.det(U)) <= tol * scale ** U.shape[0]:
        raise NotInvertible("matrix is singular")


# ------------------------------------------------------------------ exp

_PADE = {
    3: (1.495585217958292e-2, [120.0, 60.0, 12.0, 1.0]),
    5: (2.539398330063230e-1, [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0]),
    7: (
        9.504178996162932e-1,
        [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
    ),
    9: (
        2.097847961257068,
        [
            17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
            30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0,
        ],
    ),
}
_THETA13 = 5.371920351148152
_B13 = [
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0, 670442572800.0,
    33522128640.0, 1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0,
]


def mat_exp(B) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a Pade kernel."""
    A = np.array(B, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    I = np.eye(n, dtype=np.complex128)
    norm = np.abs(A).sum(axis=0).max() if n else 0.0
    if norm == 0:
        return I
    if not np.isfinite(norm):
        raise ValueError("matrix exponential of a non-finite matrix")

    for m, (theta, b) in _PADE.items():
        if norm <= theta:
            A2 = A @ A
            powers = [I, A2]
            while len(powers) < (m + 1) // 2:
                powers.append(powers[-1] @ A2)
            U = A @ sum(b[2 * k + 1] * powers[k] for k in range(len(powers)))
            V = sum(b[2 * k] * powers[k] for k in range(len(powers)))
            return np.linalg.solve(V - U, V + U)

    s = max(0, int(np.ceil(np.log2(norm / _THETA13))))
    A = A / 2.0**s
    b = _B13
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (
        A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
        + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I
    )
    V = (
        A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
        + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I
    )
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


# ------------------------------------------------------------------ log


def triangular_kind(U, tol: float = 1e-9) -> str | None:
    """'lower', 'upper' or None for a real triangular matrix with positive diagonal."""
    U = np.asarray(U)
    if not is_real_matrix(U, tol):
        return None
    d = np.diag(U).real
    if np.any(d <= tol):
        return None
    if np.all(np.abs(np.triu(U, 1)) <= tol):
        return "lower"
    if np.all(np.abs(np.tril(U, -1)) <= tol):
        return "upper"
    return None


def _sqrt_upper(T: np.ndarray) -> np.ndarray:
    """Square root of an upper triangular matrix with positive diagonal."""
    n = T.shape[0]
    R = np.zeros_like(T)
    for j in range(n):
        R[j, j] = np.sqrt(T[j, j])
        for i in range(j - 1, -1, -1):
            s = T[i, j] - R[i, i + 1 : j] @ R[i + 1 : j, j]
            R[i, j] = s / (R[i, i] + R[j, j])
    return R


def _log_upper(T: np.ndarray) -> np.ndarray:
    """Inverse scaling and squaring for a real upper triangular matrix."""
    n = T.shape[0]
    I = np.eye(n)
    R = T.copy()
    k = 0
    while np.abs(R - I).sum(axis=0).max() > 0.25:
        R = _sqrt_upper(R)
        k += 1
        if k > 60:
            raise ArithmeticError("square-root iteration did not converge")
    A = R - I
    term = A.copy()
    total = A.copy()
    for j in range(2, 80):
        term = term @ A
        add = ((-1) ** (j + 1) / j) * term
        total += add
        if np.abs(add).max() <= 1e-18 * max(1.0, np.abs(total).max()):
            break
    return np.triu(total * 2.0**k)


def mat_log(U, tol: float = 1e-9) -> np.ndarray:
    """Principal matrix logarithm.

    Real triangular matrices with positive diagonal (also defective ones with
    repeated eigenvalues) go through a triangular inverse scaling-and-squaring
    path and return a real triangular logarithm.  Everything else uses the
    eigendecomposition.
    """
    U = _as_square(U)
    _check_invertible(U, tol)
    kind = triangular_kind(U, tol)
    if kind is not None:
        T = U.real if kind == "upper" else U.real.T
        L = _log_upper(np.triu(T))
        return (L if kind == "upper" else L.T).astype(np.complex128)

    es = eigen(U, tol=tol)
    lam = es.values
    if np.any((np.abs(lam.imag) <= tol * np.abs(lam)) & (lam.real <= 0)):
        raise BranchCut("an eigenvalue lies on the closed negative real axis")
    B = _from_eigen(es, np.log(lam))
    if is_real_matrix(U, tol) and is_real_matrix(B, tol):
        B = B.real.astype(np.complex128)
    return B


def mat_power(U, t: float, tol: float = 1e-9) -> np.ndarray:
    """``exp(t log U)`` with the principal logarithm."""
    if t == 0:
        return np.eye(np.asarray(U).shape[0], dtype=np.complex128)
    return mat_exp(t * mat_log(U, tol))


# ------------------------------------------------------------------ roots


def root_values(es: Eigensystem, k: int, branch: Sequence[int]) -> np.ndarray:
    """``|l|^(1/k) exp(i (arg l + 2 pi b) / k)`` per eigenvalue."""
    branch = np.asarray(branch, dtype=np.int64)
    if branch.shape != (es.n,):
        raise ValueError(f"branch choice needs {es.n} entries")
    if np.any(branch < 0) or np.any(branch >= k):
        raise ValueError(f"branch entries must lie in [0, {k - 1}]")
    mod = np.abs(es.values) ** (1.0 / k)
    return mod * np.exp(1j * (es.args + 2 * np.pi * branch) / k)


def mat_root(
    U,
    k: int,
    branch: Sequence[int] | None = None,
    *,
    tol: float = 1e-9,
    eigensystem: Eigensystem | None = None,
) -> np.ndarray:
    """A k-th root of ``U`` formed in its eigenbasis with the given branches."""
    if k < 1:
        raise ValueError("root index must be positive")
    U = _as_square(U)
    _check_invertible(U, tol)
    es = eigensystem if eigensystem is not None else eigen(U, tol=tol)
    if branch is None:
        branch = [0] * es.n
    A = _from_eigen(es, root_values(es, k, branch))
    if is_real_matrix(U, tol) and is_real_matrix(A, tol * 10):
        A = A.real.astype(np.complex128)
    return A


def branch_choices(n: int, k: int):
    """All ``k**n`` branch vectors in lexicographic order."""
    return [tuple(b) for b in product(range(k), repeat=n)]
