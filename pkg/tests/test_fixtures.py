import numpy as np
import pytest

from ffg.errors import ObstructionError
from ffg.fixtures import (
    check_fixtures,
    example1,
    example2,
    fixture_maps,
    random_bl,
    random_ss,
    render_fixtures,
)
from ffg.flows import exp_flow, log_transform
from ffg.resonance import find_resonances
from ffg.textio import parse_map, to_transformation
from ffg.transform import GroupTag, classify, distance, jacobian_det


def test_checked_in_fixtures_are_current(fixtures_dir):
    assert check_fixtures(fixtures_dir) == []
    for name, text in render_fixtures().items():
        assert to_transformation(parse_map(text)) == fixture_maps()[name]


def test_example1():
    u = example1(8)
    c = u.coeffs[0, 1]
    assert abs(abs(c) - 1) <= 1e-15 and abs(np.angle(c) - np.pi / 3) <= 1e-15
    assert np.count_nonzero(u.coeffs) == 2
    assert classify(u) == {GroupTag.GS}
    rep = find_resonances([c], 8)
    assert [(w.m, w.obstructive) for w in rep.witnesses] == [((7,), True)]
    with pytest.raises(ValueError):
        example1(6)


@pytest.mark.parametrize("m", [2, 4, 6, 8])
def test_example2(m):
    u = example2(m)
    assert GroupTag.SS in classify(u)
    assert u.is_real(0)
    ev = np.linalg.eigvals(u.linear_part)
    a = 2 * np.pi / m
    expected = [np.exp(1j * a), np.exp(-1j * a)]
    assert sorted(ev, key=np.angle) == pytest.approx(sorted(expected, key=np.angle), abs=1e-12)
    det = jacobian_det(u)
    assert abs(det.coeffs[0] - 1) <= 1e-12 and np.abs(det.coeffs[1:]).max() <= 1e-12


def test_example2_errors():
    for m in (0, 3, 5):
        with pytest.raises(ValueError):
            example2(m)
    with pytest.raises(ValueError):
        example2(4, order=4)


def test_example2_has_no_log():
    with pytest.raises((ObstructionError, ValueError)):
        log_transform(example2(4, order=6))


@pytest.mark.parametrize("seed", range(5))
def test_random_bl(seed):
    for kw in ({}, {"repeat": True}):
        u = random_bl(3, 6, seed, **kw)
        assert GroupTag.BL in classify(u)
        assert random_bl(3, 6, seed, **kw) == u
        assert distance(exp_flow(log_transform(u), 1), u) <= 1e-8
    assert GroupTag.BU in classify(random_bl(2, 4, seed, upper=True))
    d = np.diag(random_bl(2, 4, seed, repeat=True).linear_part)
    assert d[0] == d[1]


def test_random_bl_limits():
    with pytest.raises(ValueError):
        random_bl(5, 4, 0)
    with pytest.raises(ValueError):
        random_bl(2, 11, 0)


def test_random_ss():
    for seed in range(5):
        assert GroupTag.SS in classify(random_ss(3, 5, seed))
