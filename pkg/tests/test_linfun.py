import numpy as np
import pytest
import scipy.linalg

from ffg.errors import BranchCut, DefectiveLinearPart, NotInvertible
from ffg.linfun import branch_choices, eigen, mat_exp, mat_log, mat_power, mat_root


def rot(a):
    return np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])


def test_eigen_examples():
    es = eigen(np.diag([2.0, 4.0]))
    np.testing.assert_allclose(es.values, [2, 4])
    np.testing.assert_allclose(np.abs(es.vectors), np.eye(2))
    es = eigen(-np.eye(2))
    np.testing.assert_allclose(es.values, [-1, -1])
    with pytest.raises(DefectiveLinearPart):
        eigen(np.array([[1.0, 0.0], [1.0, 1.0]]))
    with pytest.raises(ValueError):
        eigen(np.eye(7))


def test_eigen_invariant(rng):
    for _ in range(20):
        U = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        es = eigen(U)
        resid = np.abs(U @ es.vectors - es.vectors * es.values).max()
        assert resid <= 1e-8 * np.abs(U).max()


def test_mat_log_examples():
    np.testing.assert_allclose(mat_log(np.diag([2.0, 4.0])), np.diag(np.log([2, 4])), atol=1e-15)
    a = 0.9
    np.testing.assert_allclose(mat_log(rot(a)), [[0, -a], [a, 0]], atol=1e-14)
    with pytest.raises(BranchCut):
        mat_log(-np.eye(2))
    with pytest.raises(NotInvertible):
        mat_log(np.zeros((2, 2)))


def test_mat_log_jordan_triangular():
    # a repeated eigenvalue with a Jordan block goes through the triangular path
    U = np.array([[2.0, 0.0, 0.0], [1.0, 2.0, 0.0], [0.5, -1.0, 2.0]])
    L = mat_log(U)
    assert np.abs(L.imag).max() < 1e-9
    assert np.abs(np.triu(L, 1)).max() < 1e-9
    np.testing.assert_allclose(L, scipy.linalg.logm(U), atol=1e-12)


def test_mat_exp_examples():
    np.testing.assert_array_equal(mat_exp(np.zeros((3, 3))), np.eye(3))
    np.testing.assert_allclose(mat_exp(np.diag(np.log([2.0, 4.0]))), np.diag([2, 4]), rtol=1e-15)
    a = np.pi / 3
    np.testing.assert_allclose(mat_exp([[0, -a], [a, 0]]), rot(a), atol=1e-15)


@pytest.mark.parametrize("scale", [1e-3, 0.1, 1.0, 5.0, 40.0])
def test_mat_exp_matches_scipy(rng, scale):
    for _ in range(10):
        B = scale * (rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
        ref = scipy.linalg.expm(B)
        assert np.abs(mat_exp(B) - ref).max() <= 1e-12 * max(1, np.abs(ref).max()) * 10


def test_exp_log_roundtrip(rng):
    for _ in range(30):
        U = np.eye(3) + 0.4 * rng.standard_normal((3, 3))
        try:
            B = mat_log(U)
        except BranchCut:
            continue
        assert np.abs(mat_exp(B) - U).max() <= 1e-8 * np.abs(U).max()
        assert np.all(np.abs(np.linalg.eigvals(B).imag) < np.pi)


def test_bl_log_real_lower(rng):
    for _ in range(30):
        U = np.diag(rng.uniform(0.5, 2, 3)) + np.tril(rng.uniform(-1, 1, (3, 3)), -1)
        L = mat_log(U)
        assert np.abs(L.imag).max() < 1e-9
        assert np.abs(np.triu(L, 1)).max() < 1e-9
        assert np.abs(mat_exp(L) - U).max() <= 1e-8 * np.abs(U).max()


def test_mat_root_examples():
    U = np.array([[np.exp(1j * np.pi / 3)]])
    np.testing.assert_allclose(mat_root(U, 2, [0]), [[np.exp(1j * np.pi / 6)]], atol=1e-15)
    np.testing.assert_allclose(mat_root(U, 2, [1]), [[-np.exp(1j * np.pi / 6)]], atol=1e-15)
    np.testing.assert_allclose(mat_root(np.diag([4.0, 9.0]), 2, [0, 0]), np.diag([2, 3]))


def test_rotation_real_roots():
    for m in (2, 4, 6):
        M = rot(2 * np.pi / m)
        es = eigen(M, real_adapted=True)
        real = []
        for b in branch_choices(2, 2):
            A = mat_root(M, 2, b, eigensystem=es)
            assert np.abs(A @ A - M).max() < 1e-12
            if np.abs(A.imag).max() < 1e-9:
                real.append(A.real)
        assert len(real) == 2
        angles = sorted(np.mod(np.arctan2(A[1, 0], A[0, 0]), 2 * np.pi) for A in real)
        np.testing.assert_allclose(angles, [np.pi / m, np.pi / m + np.pi], atol=1e-12)


def test_mat_root_all_branches(rng):
    for _ in range(10):
        U = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        for b in branch_choices(3, 3):
            A = mat_root(U, 3, b)
            assert np.abs(A @ A @ A - U).max() <= 1e-8 * np.abs(U).max()


def test_mat_power():
    np.testing.assert_allclose(mat_power(np.diag([4.0]), 0.5), [[2.0]])
    np.testing.assert_array_equal(mat_power(rot(0.3), 0), np.eye(2))
    lam = np.exp(1j * np.pi / 3)
    np.testing.assert_allclose(mat_power(np.array([[lam]]), 7), [[lam]], atol=1e-14)
    U = np.array([[2.0, 0.3], [0.1, 1.5]])
    for s, t in [(0.3, 0.4), (-0.7, 1.2)]:
        np.testing.assert_allclose(
            mat_power(U, s) @ mat_power(U, t), mat_power(U, s + t), atol=1e-8
        )
    np.testing.assert_allclose(mat_power(U, 1), U, atol=1e-8)
