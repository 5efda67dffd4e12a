import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mdmlab.energy import (
    CompactSample,
    Coverage,
    PointKind,
    classify_point,
    cone_projection,
    corresponding_points,
    direction_cone,
    f_m,
    is_feasible,
    witness_set,
)
from mdmlab.errors import DomainError
from mdmlab.network import Network

import oracles
from strategies import trees

TWO_POINT = CompactSample([(0.0, 0.0), (10.0, 0.0)], 1.0)


def two_point_solution():
    return Network.polyline([(1.0, 0.0), (9.0, 0.0)])


def test_sample_validation():
    with pytest.raises(DomainError):
        CompactSample(np.empty((0, 2)), 1.0)
    with pytest.raises(DomainError):
        CompactSample([(0, 0)], 0.0)
    with pytest.raises(DomainError):
        CompactSample([(0, math.inf)], 1.0)


def test_covering_radius():
    M = CompactSample([(0, 0), (1, 0), (3, 0)], 1.0)
    assert M.covering_radius() == pytest.approx(2.0)


def test_energy_of_two_point_solution():
    assert f_m(TWO_POINT, two_point_solution()) == pytest.approx(1.0, abs=1e-15)
    assert is_feasible(TWO_POINT, two_point_solution())
    assert f_m(TWO_POINT, None) == math.inf
    assert not is_feasible(TWO_POINT, None)


def test_feasibility_tolerance():
    M = CompactSample([(0.0, 0.0)], 1.0)
    assert is_feasible(M, Network.point((1.0 + 5e-13, 0.0)))
    assert not is_feasible(M, Network.point((1.0 + 1e-11, 0.0)))


@given(trees(max_vertices=8), st.integers(0, 2**31))
def test_energy_matches_loops(net, seed):
    P = np.random.default_rng(seed).uniform(-12, 12, (25, 2))
    M = CompactSample(P, 1.0)
    assert f_m(M, net) == pytest.approx(oracles.energy(P, oracles.net_segments(net)), rel=1e-12, abs=1e-12)


@given(trees(max_vertices=8), st.integers(0, 2**31))
def test_energy_monotone_under_edge_addition(net, seed):
    rng = np.random.default_rng(seed)
    M = CompactSample(rng.uniform(-12, 12, (40, 2)), 1.0)
    tip = rng.uniform(-12, 12, 2)
    base = int(rng.integers(len(net.vertices)))
    bigger = Network(np.vstack([net.vertices, tip]), np.vstack([net.edges, [base, len(net.vertices)]]))
    assert f_m(M, bigger) <= f_m(M, net)


def test_endpoints_are_isolated_energetic():
    net = two_point_solution()
    for x, y in (((1, 0), (0, 0)), ((9, 0), (10, 0))):
        c = classify_point(TWO_POINT, net, x)
        assert c.kind is PointKind.ISOLATED
        assert c.corresponding.tolist() == [list(y)]
    assert classify_point(TWO_POINT, net, (5, 0)).kind is PointKind.NON_ENERGETIC


def test_classification_needs_a_network_point():
    with pytest.raises(DomainError):
        classify_point(TWO_POINT, two_point_solution(), (5, 1))
    with pytest.raises(DomainError):
        corresponding_points(TWO_POINT, two_point_solution(), (5, 1))


def test_parallel_line_witnesses():
    M = CompactSample(np.column_stack([np.linspace(0, 4, 401), np.ones(401)]), 1.0)
    net = Network.polyline([(0, 0), (4, 0)])
    assert classify_point(M, net, (2, 0)).energetic
    assert not classify_point(M, net, (2.005, 0)).energetic


def test_removal_raise():
    cov = Coverage(TWO_POINT, two_point_solution())
    rho = 1e-3
    assert cov.removal_raise((1, 0), rho) == pytest.approx(rho, rel=1e-9)
    assert cov.removal_raise((5, 0), rho) == pytest.approx(0.0, abs=1e-15)


def test_witness_set():
    net = two_point_solution()
    U = witness_set(TWO_POINT, net, (1, 0), 0.1)
    assert U.members.tolist() == [[0.0, 0.0]]
    assert len(witness_set(TWO_POINT, net, (5, 0), 0.1).members) == 0
    with pytest.raises(DomainError):
        witness_set(TWO_POINT, net, (1, 0), 0.0)


def test_cone_contains_tangent_sum_at_optimum():
    cone = direction_cone(TWO_POINT, two_point_solution(), (1, 0))
    assert cone.tangent_sum == pytest.approx([-1, 0])
    assert cone.gap == pytest.approx(0, abs=1e-12)
    assert cone.contains()
    assert cone.separating is None


def test_cone_separates_when_perturbed():
    x = (math.cos(0.3), math.sin(0.3))
    net = Network.polyline([x, (9.0, 0.0)])
    cone = direction_cone(TWO_POINT, net, x)
    assert not cone.contains()
    # moving along the separating direction shortens the network to first order
    assert float(cone.separating @ cone.tangent_sum) < 0
    # s(x) minus its projection is orthogonal to the single generator
    assert float(cone.separating @ cone.generators[0]) == pytest.approx(0, abs=1e-12)


def test_cone_requires_energetic_point():
    with pytest.raises(DomainError):
        direction_cone(TWO_POINT, two_point_solution(), (5, 0))


@given(st.lists(st.floats(0, 2 * math.pi), min_size=1, max_size=5), st.floats(-3, 3), st.floats(-3, 3))
def test_cone_projection_is_a_projection(thetas, sx, sy):
    G = np.column_stack([np.cos(thetas), np.sin(thetas)])
    s = np.array([sx, sy])
    p = cone_projection(G, s)
    # the residual makes a non-positive angle with every generator and is orthogonal to p
    res = s - p
    assert np.all(G @ res <= 1e-9)
    assert abs(float(res @ p)) <= 1e-9 * max(1.0, float(s @ s))
