import numpy as np
import pytest

from ffg.errors import DimensionMismatch, NonzeroConstantTerm, NotInvertible, OrderMismatch
from ffg.fixtures import example2, random_bl, random_ss
from ffg.series import Series
from ffg.transform import (
    GroupTag,
    PolyMap,
    Transformation,
    classify,
    compose,
    compose_power,
    distance,
    identity,
    inverse,
    jacobian_det,
    random_transformation,
    shear,
)


def one_d(order, *coeffs):
    """``sum c_k z^k`` for k = 1, 2, ..."""
    z = Series.variable(1, order, 0)
    s = Series.zero(1, order)
    for k, c in enumerate(coeffs, start=1):
        s = s + c * z**k
    return Transformation.from_components([s])


def test_compose_examples():
    a = one_d(4, 2, 1)
    b = one_d(4, 1, 1)
    assert compose(a, b) == one_d(4, 2, 3, 2, 1)
    assert compose(a, identity(1, 4)) == a
    r2 = np.sqrt(2)
    g = one_d(2, r2, 1 / (2 + r2))
    assert distance(compose(g, g), one_d(2, 2, 1)) < 1e-15


def test_compose_mismatch():
    with pytest.raises(DimensionMismatch):
        compose(identity(1, 3), identity(2, 3))
    with pytest.raises(OrderMismatch):
        compose(identity(2, 3), identity(2, 4))


def test_inverse_examples():
    u = one_d(3, 2, 1)
    v = inverse(u)
    np.testing.assert_allclose(v.coeffs[0, 1:], [0.5, -1 / 8, 1 / 16], atol=1e-15)
    assert distance(compose(u, v), identity(1, 3)) <= 1e-9
    assert inverse(identity(3, 4)) == identity(3, 4)
    U = np.array([[2.0, 1.0], [0.5, 3.0]])
    np.testing.assert_allclose(
        inverse(Transformation.linear(U, 3)).linear_part, np.linalg.inv(U), atol=1e-15
    )


def test_inverse_singular():
    with pytest.raises(NotInvertible):
        inverse(Transformation.linear(np.array([[1.0, 2.0], [2.0, 4.0]]), 3))


def test_constant_term_rejected():
    c = np.zeros((1, 3), dtype=complex)
    c[0, 0] = 1
    with pytest.raises(NonzeroConstantTerm):
        PolyMap(1, 2, c)


def test_truncate_only_lowers():
    u = one_d(5, 2, 1, 3)
    assert u.truncate(2) == one_d(2, 2, 1)
    with pytest.raises(OrderMismatch):
        u.truncate(6)


def test_jacobian_det_examples():
    sh = shear(2, 6, 0, [((0, 3), 1.0)])
    assert jacobian_det(sh).terms == {(0, 0): 1}
    assert jacobian_det(one_d(3, 2)).terms == {(0,): 2}
    a = 0.7
    M = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    det = jacobian_det(Transformation.linear(M, 4))
    assert abs(det.coefficient((0, 0)) - 1) < 1e-15


def test_classify_examples():
    assert classify(example2(2)) == {GroupTag.GS, GroupTag.SS}
    U = np.array([[2.0, 0.0], [1.0, 3.0]])
    u = random_transformation(2, 4, np.random.default_rng(0), linear=U)
    assert classify(u) == {GroupTag.GS, GroupTag.BL}
    assert classify(one_d(3, 2)) == {GroupTag.GS, GroupTag.BL, GroupTag.BU}
    assert classify(Transformation.linear(np.zeros((2, 2)), 3)) == set()


def test_distance_examples():
    u = one_d(3, 2, 1)
    assert distance(u, u) == 0
    assert distance(identity(1, 3), one_d(3, 2)) == 1


def test_group_axioms(rng):
    for _ in range(20):
        n, N = int(rng.integers(1, 4)), int(rng.integers(2, 7))
        a, b, c = (random_transformation(n, N, rng) for _ in range(3))
        assert distance(compose(compose(a, b), c), compose(a, compose(b, c))) <= 1e-9 * 100
        assert compose(a, identity(n, N)) == a
        assert compose(identity(n, N), a) == a
        v = inverse(a)
        assert distance(compose(a, v), identity(n, N)) <= 1e-9 * max(1, np.abs(v.coeffs).max())
        assert distance(compose(v, a), identity(n, N)) <= 1e-9 * max(1, np.abs(v.coeffs).max())
        np.testing.assert_allclose(
            compose(a, b).linear_part, a.linear_part @ b.linear_part, atol=1e-12
        )


def test_ss_closure():
    for seed in range(10):
        u, v = random_ss(3, 5, seed), random_ss(3, 5, seed + 100)
        assert GroupTag.SS in classify(u)
        det = jacobian_det(compose(u, v))
        keep = det.basis.starts[det.order]
        target = np.zeros(keep)
        target[0] = 1
        assert np.abs(det.coeffs[:keep] - target).max() <= 1e-8


def test_bl_closure():
    for seed in range(10):
        a, b = random_bl(3, 5, seed), random_bl(3, 5, seed + 50)
        assert GroupTag.BL in classify(compose(a, b))
        assert GroupTag.BL in classify(inverse(a))


def test_compose_power():
    u = one_d(4, 2, 1)
    assert distance(compose_power(u, 3), compose(u, compose(u, u))) < 1e-14
    assert compose_power(u, 0) == identity(1, 4)


def test_shear_rejects_own_variable():
    with pytest.raises(ValueError):
        shear(2, 4, 0, [((1, 1), 1.0)])


def test_json_roundtrip():
    u = random_transformation(2, 4, np.random.default_rng(3), complex_coeffs=True)
    assert Transformation.from_json(u.to_json()) == u
