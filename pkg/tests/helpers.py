"""Shared generators for the test suite."""

import numpy as np

from ffg.basis import get_basis
from ffg.flows import VectorField
from ffg.resonance import monomial_value
from ffg.transform import Transformation


def resonance_gap(lam, max_degree):
    """Smallest relative distance ``|lam_s - lam^m| / |lam_s|`` over ``|m| <= N``."""
    basis = get_basis(len(lam), max_degree)
    gap = np.inf
    for m in basis.exps[basis.starts[2]:]:
        v = monomial_value(lam, m)
        for s, l in enumerate(lam):
            gap = min(gap, abs(l - v) / abs(l))
    return gap


def nonresonant_map(rng, n, order, *, gap=0.05, tail=0.5):
    """Real map with positive eigenvalues in [0.5, 2], far from resonance.

    The linear part is ``V diag(lam) V^-1`` with a well-conditioned random
    ``V``, so it is neither triangular nor diagonal for ``n > 1``.
    """
    while True:
        lam = rng.uniform(0.5, 2.0, size=n)
        if abs(lam - 1).min() > 0.1 and resonance_gap(lam, order) > gap:
            break
    V = np.eye(n) + rng.uniform(-0.3, 0.3, size=(n, n))
    U = V @ np.diag(lam) @ np.linalg.inv(V)
    basis = get_basis(n, order)
    coeffs = rng.uniform(-tail, tail, size=(n, basis.size)).astype(np.complex128)
    coeffs[:, 0] = 0
    coeffs[:, 1 : n + 1] = U
    return Transformation(n, order, coeffs)


def random_field(rng, n, order, *, scale=0.5, complex_coeffs=False):
    basis = get_basis(n, order)
    c = rng.uniform(-scale, scale, size=(n, basis.size)).astype(np.complex128)
    if complex_coeffs:
        c += 1j * rng.uniform(-scale, scale, size=c.shape)
    c[:, 0] = 0
    return VectorField(n, order, c)
