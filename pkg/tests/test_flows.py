import numpy as np
import pytest

from helpers import nonresonant_map, random_field

from ffg.basis import exponents_of_degree
from ffg.errors import BranchCut, ObstructionError
from ffg.fixtures import example1, example2
from ffg.flows import (
    VectorField,
    _flow_coeffs,
    certified_no_root,
    derivation_matrix,
    diagonal_divisor,
    dilation_exponent,
    exp_flow,
    functional_root,
    functional_root_all_branches,
    homological_operator,
    iterate,
    log_transform,
    substitution_matrix,
)
from ffg.linfun import mat_exp, mat_log, mat_power
from ffg.resonance import find_resonances
from ffg.series import Series, derivative
from ffg.transform import (
    Transformation,
    compose,
    compose_arrays,
    compose_power,
    distance,
    identity,
    jacobian_det,
    random_transformation,
)

LN2 = np.log(2)


def one_d(order, *coeffs, cls=Transformation):
    c = np.zeros((1, order + 1), dtype=complex)
    c[0, 1 : len(coeffs) + 1] = coeffs
    return cls(1, order, c)


def rotation_map(a, order, rng):
    M = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    return random_transformation(2, order, rng, linear=M, box=0.5)


# ---------------------------------------------------------------- operators


def test_derivation_matrix_examples():
    mu = 0.7 - 0.2j
    D = derivation_matrix(one_d(3, mu, cls=VectorField)).matrix
    np.testing.assert_allclose(D, np.diag([mu, 2 * mu, 3 * mu]))
    D = derivation_matrix(one_d(3, 0, 1, cls=VectorField)).matrix
    np.testing.assert_array_equal(D, [[0, 0, 0], [1, 0, 0], [0, 2, 0]])
    assert not derivation_matrix(VectorField(2, 4)).matrix.any()


def test_derivation_matrix_is_block_lower(rng):
    X = random_field(rng, 2, 5)
    dm = derivation_matrix(X)
    deg = dm.exps.sum(axis=1)
    # an image never has lower degree than its source
    rows, cols = np.nonzero(dm.matrix)
    assert np.all(deg[rows] >= deg[cols])


def test_substitution_matrix_examples(rng):
    np.testing.assert_array_equal(substitution_matrix(identity(2, 3)), np.eye(9))
    np.testing.assert_array_equal(substitution_matrix(one_d(2, 2)), np.diag([2, 4]))
    for _ in range(5):
        a = random_transformation(2, 5, rng)
        b = random_transformation(2, 5, rng)
        lhs = substitution_matrix(compose(a, b))
        rhs = substitution_matrix(b) @ substitution_matrix(a)
        assert np.abs(lhs - rhs).max() <= 1e-9 * max(1, np.abs(lhs).max())


def test_exp_flow_examples():
    mu = 0.3 + 0.4j
    for t in (-1.0, 0.5, 2.0):
        f = exp_flow(one_d(5, mu, cls=VectorField), t)
        assert distance(f, one_d(5, np.exp(mu * t))) < 1e-14
        f = exp_flow(one_d(4, 0, 1, cls=VectorField), t)
        np.testing.assert_allclose(f.coeffs[0, 1:], [1, t, t**2, t**3], atol=1e-10)
    assert exp_flow(random_field(np.random.default_rng(1), 2, 4), 0.0) == identity(2, 4)


def test_exp_flow_operator_identity(rng):
    for _ in range(5):
        X = random_field(rng, 2, 6, complex_coeffs=True)
        C = substitution_matrix(exp_flow(X, 1))
        E = mat_exp(derivation_matrix(X).matrix)
        assert np.abs(C - E).max() <= 1e-8


def test_exp_flow_large_coefficients():
    # steep coefficient growth is balanced by a power-of-two dilation
    X = VectorField(1, 8, np.array([[0, 0.5, 40, 1e3, 3e4, 1e6, 3e7, 1e9, 3e10]]))
    assert dilation_exponent(X.coeffs, X.basis) > 0
    full = _flow_coeffs(X, 1.0)
    half = _flow_coeffs(X, 0.5)
    twice = compose_arrays(half, half, X.basis)
    # compare degree by degree; coefficients span 20 orders of magnitude
    rel = np.abs(twice - full)[0, 1:] / np.abs(full)[0, 1:]
    assert rel.max() <= 1e-10


# ---------------------------------------------------------------- logarithm


def test_log_examples():
    X = log_transform(one_d(6, 2, 1))
    assert abs(X.coeffs[0, 1] - LN2) <= 1e-12
    assert abs(X.coeffs[0, 2] - LN2 / 2) <= 1e-9
    U = np.array([[2.0, 0.5], [0.3, 1.5]])
    X = log_transform(Transformation.linear(U, 4))
    np.testing.assert_allclose(X.linear_part, mat_log(U), atol=1e-14)
    assert np.abs(X.coeffs[:, 3:]).max() == 0
    assert not log_transform(identity(3, 5)).coeffs.any()


def test_log_example1_obstructs():
    with pytest.raises(ObstructionError) as info:
        log_transform(example1(8))
    ob = info.value.obstruction
    assert ob.degree == 7 and ob.monomial == (7,) and ob.component == 1
    assert ob.witness.k == -1 and ob.witness.obstructive
    assert abs(ob.divisor) < 1e-9 and abs(ob.residual - 1) < 1e-9


def test_log_branch_cut():
    with pytest.raises(BranchCut):
        log_transform(example2(2))


def test_log_roundtrips(rng):
    for _ in range(10):
        u = nonresonant_map(rng, int(rng.integers(1, 3)), 7)
        X = log_transform(u)
        assert distance(exp_flow(X, 1), u) <= 1e-8
        Y = random_field(rng, u.n, 7)
        Y.coeffs[:, 1 : u.n + 1] = X.linear_part
        back = log_transform(exp_flow(Y, 1))
        assert np.abs(back.coeffs - Y.coeffs).max() <= 1e-7


def test_log_nonunique_but_consistent():
    # an obstructive resonance with nothing to obstruct: the equation at
    # degree 7 is singular but its right-hand side vanishes
    u = one_d(8, np.exp(1j * np.pi / 3))
    X = log_transform(u)
    assert X.meta["nonunique_degrees"] == [7]
    assert distance(exp_flow(X, 1), u) <= 1e-12
    assert abs(X.coeffs[0, 1] - 1j * np.pi / 3) < 1e-15


def test_log_non_obstructive_resonance(rng):
    # lambda_2 = lambda_1^2 does not make the log equation singular
    u = random_transformation(2, 6, rng, linear=np.diag([2.0, 4.0]))
    X = log_transform(u)
    assert X.meta["nonunique_degrees"] == []
    assert distance(exp_flow(X, 1), u) <= 1e-9


def test_log_small_rotation(rng):
    # a small rotation has only non-obstructive resonances, so a log exists
    u = rotation_map(0.3, 6, rng)
    rep = find_resonances(np.linalg.eigvals(u.linear_part), 6)
    assert rep.witnesses and not rep.obstructive
    X = log_transform(u)
    assert distance(exp_flow(X, 1), u) <= 1e-8
    assert X.is_real(1e-9)


def test_obstruction_matches_resonance():
    u = example2(4, order=6)
    with pytest.raises(ObstructionError) as info:
        log_transform(u)
    ob = info.value.obstruction
    assert ob.degree == 5
    rep = find_resonances(np.linalg.eigvals(u.linear_part), 6)
    assert (ob.component, ob.monomial) in {(w.s, w.m) for w in rep.obstructive}


def test_diagonal_divisor_formula(rng):
    for _ in range(5):
        n, d = int(rng.integers(1, 3)), int(rng.integers(2, 5))
        mu = rng.uniform(-1, 1, n) + 1j * rng.uniform(-2, 2, n)
        phi = homological_operator(np.diag(mu), d)
        basis_exps = exponents_of_degree(n, d)
        nd = len(basis_exps)
        expected = np.array(
            [diagonal_divisor(mu, s, m) for s in range(n) for m in basis_exps]
        )
        np.testing.assert_allclose(np.diag(phi), expected, atol=1e-8)
        assert np.abs(phi - np.diag(np.diag(phi))).max() <= 1e-8
        assert phi.shape == (n * nd, n * nd)
    # equality case
    assert diagonal_divisor(np.array([0.5, 1.0]), 1, (2, 0)) == pytest.approx(np.e)


def test_liouville_divergence_free(rng):
    N = 6
    for _ in range(5):
        H = Series(2, N + 1, rng.uniform(-0.5, 0.5, 36))
        H.coeffs[:3] = 0
        f1, f2 = derivative(H, 1), -derivative(H, 0)
        keep = Series.zero(2, N).coeffs.size
        X = VectorField(2, N, np.array([f1.coeffs[:keep], f2.coeffs[:keep]]))
        for t in (0.5, -1.0):
            det = jacobian_det(exp_flow(X, t))
            lower = det.coeffs[: det.basis.starts[N]]
            target = np.zeros_like(lower)
            target[0] = 1
            assert np.abs(lower - target).max() <= 1e-7


# ---------------------------------------------------------------- roots


def test_root_examples():
    r2 = np.sqrt(2)
    g = functional_root(one_d(6, 2, 1), 2)
    assert abs(g.coeffs[0, 1] - r2) < 1e-15
    assert abs(g.coeffs[0, 2] - 1 / (2 + r2)) <= 1e-9
    assert distance(compose(g, g), one_d(6, 2, 1)) <= 1e-12
    assert functional_root(identity(2, 5), 3) == identity(2, 5)


def test_root_example1_obstructs():
    for branch in ([0], [1]):
        with pytest.raises(ObstructionError) as info:
            functional_root(example1(8), 2, branch)
        ob = info.value.obstruction
        c1 = (-1) ** branch[0] * np.exp(1j * np.pi / 6)
        assert ob.degree == 7 and ob.monomial == (7,)
        assert abs(ob.divisor - c1 * (1 + c1**6)) < 1e-12
        assert abs(ob.residual - 1) < 1e-12
        assert max(ob.solved_max_by_degree().values()) < 1e-9


def test_all_branches_examples():
    res = functional_root_all_branches(example1(8), 2)
    assert len(res) == 2 and certified_no_root(res)
    res = functional_root_all_branches(one_d(5, 2, 1), 2)
    assert [r.ok for r in res] == [True, True]
    lin = sorted(r.root.coeffs[0, 1].real for r in res)
    np.testing.assert_allclose(lin, [-np.sqrt(2), np.sqrt(2)])
    for r in res:
        assert distance(compose(r.root, r.root), one_d(5, 2, 1)) <= 1e-10
    res = functional_root_all_branches(one_d(3, 4), 2)
    assert sorted(r.root.coeffs[0, 1].real for r in res) == [-2, 2]


@pytest.mark.parametrize("m", [2, 4, 6, 8])
def test_example2_roots(m):
    res = functional_root_all_branches(example2(m), 2)
    assert len(res) == 2 and certified_no_root(res)
    for r in res:
        ob = r.obstruction
        assert ob.degree == m + 1 and sum(ob.monomial) == m + 1
        assert ob.witness is not None and ob.witness.obstructive
        assert all(v <= 1e-9 for v in ob.solved_max_by_degree().values())


def test_cube_root(rng):
    u = nonresonant_map(rng, 2, 6)
    g = functional_root(u, 3)
    assert distance(compose_power(g, 3), u) <= 1e-8
    assert distance(iterate(u, 1 / 3), g) <= 1e-7


def test_iterate_examples(rng):
    u = one_d(6, 2, 1)
    assert distance(iterate(u, 1), u) <= 1e-9
    assert distance(iterate(u, 0.5), functional_root(u, 2)) <= 1e-8
    assert iterate(u, 0) == identity(1, 6)
    U = np.array([[1.5, 0.2], [-0.1, 0.8]])
    for t in (0.3, -1.7):
        np.testing.assert_allclose(
            iterate(Transformation.linear(U, 4), t).linear_part, mat_power(U, t), atol=1e-12
        )
    with pytest.raises(ObstructionError):
        iterate(example1(8), 0.5)
