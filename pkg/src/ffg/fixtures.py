"""Canonical maps and seeded generators.

``example1`` is the complex map ``e^{i pi/3} z + z^7``.  ``example2(m)`` is
the real area-preserving map ``M v`` where ``v`` is the shear
``x1 -> x1 + x2^(m+1)`` and ``M`` the rotation by ``2 pi / m`` (``m`` even),
kept in real coordinates throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .series import Series
from .transform import Transformation, compose, identity, shear


def example1(order: int = 8) -> Transformation:
    if order < 7:
        raise ValueError("example1 needs order >= 7")
    z = Series.variable(1, order, 0)
    return Transformation.from_components([np.exp(1j * np.pi / 3) * z + z**7])


@dataclass(frozen=True)
class Example2Family:
    m: int

    def __post_init__(self):
        if self.m < 2 or self.m % 2:
            raise ValueError("m must be an even integer >= 2")

    @property
    def alpha(self) -> float:
        return 2 * math.pi / self.m

    @property
    def rotation(self) -> np.ndarray:
        a = self.alpha
        M = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
        # cos/sin of multiples of pi/2 are exact in exact arithmetic
        M[np.abs(M) < 1e-15] = 0.0
        return M

    def shear(self, order: int) -> Transformation:
        return shear(2, order, 0, [((0, self.m + 1), 1.0)])

    def map(self, order: int | None = None) -> Transformation:
        order = self.m + 2 if order is None else order
        if order < self.m + 1:
            raise ValueError(f"example2 with m={self.m} needs order >= {self.m + 1}")
        M = Transformation.linear(self.rotation, order)
        return compose(M, self.shear(order))


def example2(m: int, order: int | None = None) -> Transformation:
    return Example2Family(m).map(order)


def _distinct_diagonal(rng, n, low=0.5, high=2.0, gap=0.05):
    while True:
        d = rng.uniform(low, high, size=n)
        if n < 2 or np.min(np.diff(np.sort(d))) >= gap:
            return d


def random_bl(n: int, order: int, seed: int, *, repeat: bool = False, upper: bool = False) -> Transformation:
    """Seeded element of B_l (or B^u with ``upper``).

    Diagonal entries lie in [1/2, 2] and are separated by at least 0.05
    unless ``repeat`` plants ``U[1, 1] = U[0, 0]``.  Off-diagonal entries and
    the nonlinear tail are uniform in [-1, 1].
    """
    if not 1 <= n <= 4 or not 1 <= order <= 10:
        raise ValueError("random_bl supports n <= 4 and order <= 10")
    rng = np.random.default_rng(seed)
    diag = _distinct_diagonal(rng, n)
    if repeat and n >= 2:
        diag[1] = diag[0]
    U = np.diag(diag) + np.tril(rng.uniform(-1, 1, size=(n, n)), -1)
    if upper:
        U = U.T
    u = identity(n, order)
    coeffs = rng.uniform(-1, 1, size=u.coeffs.shape).astype(np.complex128)
    coeffs[:, 0] = 0
    coeffs[:, 1 : n + 1] = U
    return Transformation(n, order, coeffs)


def random_ss(n: int, order: int, seed: int) -> Transformation:
    """Seeded volume-preserving map: a unimodular linear map and shears."""
    if n < 2:
        raise ValueError("random_ss needs n >= 2")
    rng = np.random.default_rng(seed)
    L = np.eye(n) + np.tril(rng.uniform(-1, 1, size=(n, n)), -1)
    R = np.eye(n) + np.triu(rng.uniform(-1, 1, size=(n, n)), 1)
    u = Transformation.linear(L @ R, order)
    basis = u.basis
    for target in range(n):
        terms = []
        for k in range(basis.starts[2], basis.size):
            exp = tuple(int(e) for e in basis.exps[k])
            if exp[target] == 0 and rng.random() < 0.5:
                terms.append((exp, rng.uniform(-1, 1)))
        u = compose(shear(n, order, target, terms), u)
    return u


# ---------------------------------------------------------------- files

BL_SEEDS = (1, 2, 3)


def fixture_maps() -> dict[str, Transformation]:
    maps = {
        "example1.map": example1(8),
        "example2_m2.map": example2(2),
        "example2_m4.map": example2(4),
    }
    for seed in BL_SEEDS:
        maps[f"bl_random_{seed}.map"] = random_bl(2, 6, seed)
    return maps


def render_fixtures() -> dict[str, str]:
    from .textio import emit_map

    return {name: emit_map(u) for name, u in fixture_maps().items()}


def write_fixtures(directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in render_fixtures().items():
        path = directory / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written


def check_fixtures(directory) -> list[str]:
    """Names of fixture files that are missing or differ byte-wise."""
    directory = Path(directory)
    stale = []
    for name, text in render_fixtures().items():
        path = directory / name
        if not path.exists() or path.read_bytes() != text.encode("utf-8"):
            stale.append(name)
    return stale
