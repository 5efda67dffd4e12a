import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mdmlab.errors import DomainError, IndeterminateError, UnsupportedError
from mdmlab.network import (
    Network,
    components_without,
    crossing_count,
    find_nice_radius,
    insert_vertex,
    is_acyclic,
    is_nice_radius,
    length_in_ball,
    local_feature_size,
    locate,
    ord_at,
    ordball_at,
    path_between,
    polyline_length,
)

import oracles
from strategies import points_on, trees


def cross_shape():
    return Network.star((0, 0), [(1, 0), (0, 1), (-1, 0), (0, -1)])


def test_validation():
    with pytest.raises(DomainError):
        Network(np.empty((0, 2)), np.empty((0, 2)))
    with pytest.raises(DomainError):
        Network([[0, 0], [1, 0]], [[0, 0]])
    with pytest.raises(DomainError):
        Network([[0, 0], [1, 0], [2, 0]], [[0, 1]])  # disconnected
    with pytest.raises(DomainError):
        Network([[0, 0], [0, 0]], [[0, 1]])
    with pytest.raises(DomainError):
        Network([[0, 0], [1, 0]], [[0, 1], [1, 0]])


def test_build_merges_and_drops():
    net = Network.build([[0, 0], [1, 0], [1, 1e-12], [2, 0]], [[0, 1], [2, 3], [1, 2]])
    assert len(net.vertices) == 3
    assert len(net.edges) == 2


def test_immutable():
    net = Network.polyline([(0, 0), (1, 0)])
    with pytest.raises(ValueError):
        net.vertices[0, 0] = 5.0


def test_json_round_trip_is_exact(rng):
    V = rng.normal(size=(5, 2)) * 1e3
    net = Network.polyline(V)
    back = Network.from_json(json.dumps(net.to_dict()))
    assert np.array_equal(back.vertices, net.vertices)
    assert np.array_equal(back.edges, net.edges)


def test_schema_checked():
    d = Network.point((0, 0)).to_dict()
    d["schema"] = "other/9"
    with pytest.raises(DomainError):
        Network.from_dict(d)


def test_ord_on_cross():
    net = cross_shape()
    assert ord_at(net, (0, 0)) == 4
    assert ord_at(net, (0.5, 0)) == 2
    assert ord_at(net, (1, 0)) == 1
    with pytest.raises(DomainError):
        ord_at(net, (0.5, 0.5))


def test_locate():
    net = cross_shape()
    assert locate(net, (0, 0)) == ("vertex", 0)
    kind, k, t = locate(net, (0.25, 0))
    assert kind == "edge" and t == pytest.approx(0.25)


def test_ordball_matches_ord_on_cross():
    net = cross_shape()
    assert ordball_at(net, (0, 0)) == 4
    with pytest.raises(DomainError):
        ordball_at(net, (0, 0), ladder=[0.1, 0.2])


def test_ordball_detects_unstable_ladder():
    # a spur at distance 0.3: the coarse radius sees it, the fine one does not
    net = Network.build([[-1, 0], [1, 0], [0.3, 0], [0.3, 0.1]], [[0, 2], [2, 1], [2, 3]])
    with pytest.raises(IndeterminateError):
        ordball_at(net, (0, 0), ladder=[0.5, 0.31, 0.2])


def test_length_in_ball_closed_form():
    net = cross_shape()
    assert length_in_ball(net, (0, 0), 0.5) == pytest.approx(2.0)
    assert length_in_ball(net, (0, 0), 2.0) == pytest.approx(4.0)
    assert length_in_ball(net, (0.5, 0.5), 0.5) == pytest.approx(0.0, abs=1e-12)


def test_nice_radius():
    net = cross_shape()
    assert is_nice_radius(net, (0, 0), 0.9)
    assert not is_nice_radius(net, (0, 0), 1.2)
    nr = find_nice_radius(net, (0, 0), 2.0)
    assert nr.crossing_count == 4 and nr.radius <= 1.0


def test_path_between():
    net = cross_shape()
    p = path_between(net, (1, 0), (0, 1))
    assert polyline_length(p) == pytest.approx(2.0)
    cyc = Network([[0, 0], [1, 0], [0, 1]], [[0, 1], [1, 2], [0, 2]])
    with pytest.raises(UnsupportedError):
        path_between(cyc, (0, 0), (1, 0))


def test_components_without():
    net = cross_shape()
    assert len(components_without(net, 0)) == 4


@given(trees())
def test_length_and_acyclic(net):
    assert is_acyclic(net)
    ref = sum(math.dist(a, b) for a, b in oracles.net_segments(net))
    assert net.length == pytest.approx(ref, rel=1e-12)


@given(trees(max_vertices=6), st.data())
def test_length_in_ball_matches_sampling(net, data):
    x = data.draw(points_on(net))
    eps = data.draw(st.floats(0.1, 15))
    n = 20_000
    ref = oracles.sampled_length_in_ball(oracles.net_segments(net), x, eps, n=n)
    # midpoint sampling is off by at most one sample spacing per boundary crossing
    assert length_in_ball(net, x, eps) == pytest.approx(ref, abs=2 * net.length / n + 1e-12)


@given(trees(), st.data())
def test_ordball_at_least_ord(net, data):
    x = data.draw(points_on(net))
    try:
        ob = ordball_at(net, x)
    except IndeterminateError:
        return
    assert ob >= ord_at(net, x)


@given(trees(), st.data())
def test_length_below_nice_radius(net, data):
    x = data.draw(points_on(net))
    nr = find_nice_radius(net, x, data.draw(st.floats(0.5, 20)))
    ob = ordball_at(net, x)
    for frac in (1.0, 0.5, 0.1):
        eps = frac * nr.radius
        assert length_in_ball(net, x, eps) >= ob * eps - 1e-9


@given(trees(), st.data())
def test_straight_star_below_feature_size(net, data):
    x = data.draw(points_on(net))
    eps = 0.9 * local_feature_size(net, x)
    assert length_in_ball(net, x, eps) == pytest.approx(ord_at(net, x) * eps, rel=1e-9)
    assert crossing_count(net, x, eps).crossing_count == ord_at(net, x)


@given(trees(), st.data())
def test_insert_vertex_preserves_geometry(net, data):
    x = data.draw(points_on(net))
    net2, vi = insert_vertex(net, x)
    assert net2.length == pytest.approx(net.length, rel=1e-12)
    assert net2.degrees[vi] == ord_at(net, x)


def regular_tripod():
    return Network.star((0, 0), [(math.cos(t), math.sin(t)) for t in np.radians([90, 210, 330])])


def test_length_examples():
    assert Network.polyline([(0, 0), (3, 4)]).length == 5.0
    assert Network.point((1, 1)).length == 0.0
    assert regular_tripod().length == pytest.approx(3.0)


def test_ord_and_ordball_examples():
    seg = Network.polyline([(-5, 0), (5, 0)])
    assert ord_at(seg, (0, 0)) == 2
    assert ordball_at(seg, (0, 0), [0.1, 0.05, 0.025]) == 2
    assert ord_at(seg, (5, 0)) == ordball_at(seg, (5, 0)) == 1
    assert ord_at(regular_tripod(), (0, 0)) == ordball_at(regular_tripod(), (0, 0)) == 3


def test_acyclic_examples():
    assert is_acyclic(Network.polyline([(0, 0), (1, 0), (1, 1)]))
    assert not is_acyclic(Network([[0, 0], [1, 0], [0, 1]], [[0, 1], [1, 2], [0, 2]]))
    assert is_acyclic(regular_tripod())


def test_path_examples():
    t = regular_tripod()
    a, b = t.vertices[1], t.vertices[2]
    assert polyline_length(path_between(t, a, b)) == pytest.approx(2.0)
    assert polyline_length(path_between(t, a, a)) == 0.0
    sub = path_between(t, 0.2 * a, 0.7 * a)
    assert polyline_length(sub) == pytest.approx(0.5)


def test_length_in_ball_examples():
    seg = Network.polyline([(-5, 0), (5, 0)])
    assert length_in_ball(seg, (0, 0), 0.5) == pytest.approx(1.0)
    assert length_in_ball(regular_tripod(), (0, 0), 0.3) == pytest.approx(0.9)
    assert length_in_ball(seg, (5, 0), 0.01) == pytest.approx(0.01)


def test_nice_radius_examples():
    seg = Network.polyline([(-5, 0), (5, 0)])
    nr = find_nice_radius(seg, (0, 0), 0.3)
    assert nr.radius == 0.3 and nr.crossing_count == 2
    short = Network.star((0, 0), [(1, 0), (-0.5, 0.8), (0, -0.1)])
    assert find_nice_radius(short, (0, 0), 1.0).radius < 0.1
    par = Network.build([[-5, 0], [5, 0], [5, 0.2], [-5, 0.2]], [[0, 1], [1, 2], [2, 3]])
    assert find_nice_radius(par, (0, 0), 1.0).radius < 0.2
