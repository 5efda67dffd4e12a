import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mdmlab.errors import DomainError, UnsupportedError
from mdmlab.steiner import (
    connector_constant,
    connector_limit_ratio,
    cube_connector,
    fermat_point,
    full_topologies,
    mst_length,
    steiner_defect,
    steiner_tree_3,
    steiner_tree_small,
    terminal_unit_vector_sum,
)

import oracles

TWO_PI_3 = 2 * math.pi / 3
coord = st.floats(-10, 10, allow_nan=False)


def well_separated(pts, tol=1e-2):
    return all(math.dist(p, q) > tol for p, q in itertools.combinations(pts, 2))


def fermat_length(a, b, c):
    f = oracles.fermat_point(a, b, c)
    return sum(math.dist(f, p) for p in (a, b, c))


def isosceles(theta, eps=1.0, scale=1.0, shift=(0.0, 0.0), rot=0.0):
    """A, B, C with |AB| = |BC| = eps and angle theta at B."""
    c, s = math.cos(rot), math.sin(rot)
    R = np.array([[c, -s], [s, c]])
    B = np.zeros(2)
    A = eps * np.array([1.0, 0.0])
    C = eps * np.array([math.cos(theta), math.sin(theta)])
    return [scale * (R @ p) + np.asarray(shift) for p in (A, B, C)]


def test_equilateral_fermat_point_is_centroid():
    a, b, c = (0, 0), (6, 0), (3, 3 * math.sqrt(3))
    assert fermat_point(a, b, c) == pytest.approx([3, math.sqrt(3)], abs=1e-12)
    assert steiner_tree_3(a, b, c).length == pytest.approx(6 * math.sqrt(3), rel=1e-12)


def test_obtuse_triangle_uses_two_sides():
    a, b, c = (0, 0), (1, 0), (2, 0.2)
    t = steiner_tree_3(a, b, c)
    assert len(t.steiner_points) == 0
    assert t.length == pytest.approx(math.dist(a, b) + math.dist(b, c), rel=1e-14)


def test_collinear_terminals():
    t = steiner_tree_small([(0, 0), (2, 0), (1, 0)])
    assert t.length == pytest.approx(2.0)


def test_duplicates_rejected():
    with pytest.raises(DomainError):
        steiner_tree_small([(0, 0), (0, 0), (1, 1)])


def test_six_terminals_unsupported():
    with pytest.raises(UnsupportedError):
        steiner_tree_small(np.arange(12.0).reshape(6, 2))


def test_topology_counts():
    # (2n - 5)!! full topologies
    assert [len(full_topologies(n)) for n in (3, 4, 5)] == [1, 3, 15]


def test_square_oracle():
    side = 3.0
    t = steiner_tree_small([(0, 0), (side, 0), (side, side), (0, side)])
    assert t.length == pytest.approx(oracles.square_steiner_length(side), rel=1e-10)


@given(st.tuples(coord, coord), st.tuples(coord, coord), st.tuples(coord, coord))
def test_three_terminals_match_weiszfeld(a, b, c):
    if not well_separated([a, b, c], 0.1):
        return
    assert steiner_tree_3(a, b, c).length == pytest.approx(fermat_length(a, b, c), rel=1e-9)


@pytest.mark.parametrize("n,seed", [(3, 1), (4, 2), (4, 3), (5, 4), (5, 5)])
def test_small_trees_match_convex_oracle(n, seed):
    rng = np.random.default_rng(seed)
    T = rng.uniform(-5, 5, (n, 2))
    assert steiner_tree_small(T).length == pytest.approx(oracles.steiner_length(T), rel=1e-6)


@given(st.lists(st.tuples(coord, coord), min_size=3, max_size=5))
def test_steiner_tree_optimality_conditions(pts):
    if not well_separated(pts, 0.05):
        return
    t = steiner_tree_small(pts)
    for angles in t.steiner_angles():
        assert angles == pytest.approx([TWO_PI_3] * 3, abs=1e-6)
    assert t.length <= oracles.mst_length(pts) * (1 + 1e-12)
    assert t.length >= math.sqrt(3) / 2 * oracles.mst_length(pts) * (1 - 1e-9)
    assert len(t.steiner_points) <= len(pts) - 2


def test_unit_vector_sum_for_full_tree():
    t = steiner_tree_small([(0, 0), (6, 0), (3, 5)])
    assert np.linalg.norm(terminal_unit_vector_sum(t)) < 1e-8


def test_mst_length_matches_prim(rng):
    P = rng.normal(size=(30, 2))
    assert mst_length(P) == pytest.approx(oracles.mst_length(P), rel=1e-12)


# steiner defect ------------------------------------------------------------------


def test_defect_closed_form():
    theta = math.pi / 2
    A, B, C = isosceles(theta)
    ref = 2 - fermat_length(A, B, C)
    assert steiner_defect(A, B, C) == pytest.approx(ref, abs=1e-10)


@given(st.floats(0.2, TWO_PI_3 - 0.01), st.floats(0, 2 * math.pi), st.floats(-50, 50))
def test_defect_scale_invariant(theta, rot, shift):
    d1 = steiner_defect(*isosceles(theta, rot=rot))
    for s in (10.0, 1000.0):
        d = steiner_defect(*isosceles(theta, scale=s, shift=(shift, -shift), rot=rot))
        assert d == pytest.approx(d1, abs=1e-12)


def test_defect_vanishes_at_critical_angle():
    ds = [steiner_defect(*isosceles(TWO_PI_3 - gap)) for gap in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(a > b for a, b in zip(ds, ds[1:]))
    assert 0 <= ds[-1] < 1e-3


def test_defect_domain():
    with pytest.raises(DomainError):
        steiner_defect((1, 0), (0, 0), (0, 2))
    with pytest.raises(DomainError):
        steiner_defect(*isosceles(TWO_PI_3 + 0.1))


# cube connector -----------------------------------------------------------------


def test_connector_constant_closed_form():
    # terminals at the corners of a square of side 8 sqrt 2 plus its centre; the
    # Steiner tree of the corners already passes through the centre
    assert connector_constant() == pytest.approx(oracles.square_steiner_length(8 * math.sqrt(2)), rel=1e-10)


@pytest.mark.parametrize("eps_rel", [1e-3, 1e-4, 1e-5])
def test_connector_length_is_linear(eps_rel):
    r = 0.7
    cs = cube_connector((1.5, -2.0), eps_rel * r, r)
    assert cs.length / cs.epsilon == pytest.approx(connector_constant(), rel=1e-9)
    assert cs.margin > 0


def test_connector_too_large():
    limit = connector_limit_ratio()
    assert 0 < limit < 1
    with pytest.raises(DomainError):
        cube_connector((0, 0), 1.01 * limit + 0.01, 1.0)


@given(st.tuples(coord, coord), st.floats(0.01, 100))
def test_connector_covers_ball(x, r):
    eps = 1e-3 * r
    cs = cube_connector(x, eps, r)
    th = np.linspace(0, 2 * math.pi, 997, endpoint=False)
    ring = np.asarray(x) + (r + eps) * np.column_stack([np.cos(th), np.sin(th)])
    worst = max(min(oracles.seg_dist(y, a, b) for a, b in cs.tree.segments) for y in ring[::7])
    assert worst <= r
