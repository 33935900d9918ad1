"""Resonances of a linear part and their obstructive / non-obstructive split.

A resonance is ``lambda_s = prod_j lambda_j^m_j`` with ``|m| >= 2``.  Writing
``delta = Log lambda_s - sum_j m_j Log lambda_j`` (principal logs), every
resonance has ``delta = 2 pi i k`` for an integer ``k``; it survives
real powers ``t`` exactly when ``k == 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .basis import get_basis
from .errors import InconsistentWitness

DEFAULT_T_GRID = (0.5, 1 / 3, 2 / 3, 0.2, 1.4)


@dataclass(frozen=True)
class ResonanceWitness:
    s: int  # 1-based component index
    m: tuple[int, ...]
    k: int
    obstructive: bool
    residual: float

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "m": list(self.m),
            "k": self.k,
            "obstructive": self.obstructive,
            "residual": self.residual,
        }

    @classmethod
    def from_json(cls, data) -> "ResonanceWitness":
        return cls(
            s=int(data["s"]),
            m=tuple(int(x) for x in data["m"]),
            k=int(data["k"]),
            obstructive=bool(data["obstructive"]),
            residual=float(data["residual"]),
        )


@dataclass
class ResonanceReport:
    eigenvalues: list[complex]
    max_degree: int
    tol: float
    witnesses: list[ResonanceWitness] = field(default_factory=list)

    @property
    def obstructive(self) -> list[ResonanceWitness]:
        return [w for w in self.witnesses if w.obstructive]

    def to_json(self) -> dict:
        return {
            "eigenvalues": [
                {"re": float(z.real), "im": float(z.imag)} for z in self.eigenvalues
            ],
            "max_degree": self.max_degree,
            "tol": self.tol,
            "witnesses": [w.to_json() for w in self.witnesses],
        }


def principal_log(lam) -> np.ndarray:
    """Log with the argument in (-pi, pi]; negative reals map to +i pi."""
    lam = np.asarray(lam, dtype=np.complex128)
    out = np.log(lam)
    cut = (lam.imag == 0) & (lam.real < 0)
    out[cut] = np.log(-lam.real[cut]) + 1j * np.pi
    return out


def _check_nonzero(lam: np.ndarray, tol: float):
    if np.any(np.abs(lam) <= tol):
        raise ValueError("zero eigenvalue: the linear part is not invertible")


def monomial_value(lam: Sequence[complex], m: Sequence[int]) -> complex:
    out = 1.0 + 0j
    for l, e in zip(lam, m):
        out *= complex(l) ** int(e)
    return out


def classify_witness(
    lam: Sequence[complex], s: int, m: Sequence[int], tol: float = 1e-9
) -> ResonanceWitness:
    """Recover the branch integer ``k`` of a resonance ``(s, m)``.

    ``s`` is 1-based.  Raises :class:`InconsistentWitness` when ``delta`` is
    not within tolerance of ``2 pi i Z``.
    """
    lam = np.asarray(lam, dtype=np.complex128)
    m = tuple(int(x) for x in m)
    logs = principal_log(lam)
    delta = logs[s - 1] - np.dot(m, logs)
    k = int(np.rint(delta.imag / (2 * np.pi)))
    residual = float(abs(delta - 2j * np.pi * k))
    scale = 1.0 + abs(logs[s - 1]) + float(np.dot(m, np.abs(logs)))
    if residual > tol * scale:
        raise InconsistentWitness(
            f"(s={s}, m={list(m)}) is not resonant: residual {residual:.3g}"
        )
    return ResonanceWitness(s=s, m=m, k=k, obstructive=k != 0, residual=residual)


def is_resonant(lam, s: int, m, tol: float = 1e-9) -> bool:
    target = complex(lam[s - 1])
    return abs(target - monomial_value(lam, m)) <= tol * abs(target)


def find_resonances(lam: Sequence[complex], max_degree: int, tol: float = 1e-9) -> ResonanceReport:
    """Scan every ``(s, m)`` with ``2 <= |m| <= max_degree``.

    Witnesses are ordered graded-lex on ``m``, then by ``s``.
    """
    lam = np.asarray(lam, dtype=np.complex128)
    if max_degree < 2:
        raise ValueError("max_degree must be at least 2")
    _check_nonzero(lam, tol)
    n = lam.size
    basis = get_basis(n, max_degree)
    exps = basis.exps[basis.starts[2] :]
    # integer powers by repeated multiplication, column by column
    values = np.ones(exps.shape[0], dtype=np.complex128)
    for j in range(n):
        for e in range(1, max_degree + 1):
            values[exps[:, j] >= e] *= lam[j]
    report = ResonanceReport(
        eigenvalues=[complex(z) for z in lam], max_degree=max_degree, tol=tol
    )
    for row, val in zip(exps, values):
        for s in range(1, n + 1):
            target = lam[s - 1]
            if abs(target - val) <= tol * abs(target):
                report.witnesses.append(classify_witness(lam, s, row, tol))
    return report


def check_obstructive_by_sampling(
    lam: Sequence[complex],
    s: int,
    m: Sequence[int],
    t_grid: Iterable[float] = DEFAULT_T_GRID,
    tol: float = 1e-9,
) -> bool:
    """True when ``lambda_s^t != lambda^(t m)`` for some sampled ``t``."""
    lam = np.asarray(lam, dtype=np.complex128)
    logs = principal_log(lam)
    lhs_log = logs[s - 1]
    rhs_log = np.dot(np.asarray(m, dtype=float), logs)
    for t in t_grid:
        lhs = np.exp(t * lhs_log)
        rhs = np.exp(t * rhs_log)
        if abs(lhs - rhs) > tol * max(abs(lhs), 1.0):
            return True
    return False


def lewis_condition(lam: Sequence[complex], max_degree: int, tol: float = 1e-9) -> bool:
    """Every ``2 pi i Z`` relation up to ``max_degree`` has ``k == 0``."""
    return not find_resonances(lam, max_degree, tol).obstructive
