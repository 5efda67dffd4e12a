"""Hypothesis strategies for random valid networks."""
import numpy as np
from hypothesis import strategies as st

from mdmlab.network import Network


@st.composite
def trees(draw, max_vertices=12, span=10.0):
    """Random embedded trees: each new vertex hangs off an earlier one."""
    n = draw(st.integers(2, max_vertices))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    V = rng.uniform(-span, span, (n, 2))
    parents = [int(rng.integers(0, k)) for k in range(1, n)]
    E = np.array([(p, k) for k, p in zip(range(1, n), parents)])
    return Network(V, E)


@st.composite
def points_on(draw, net):
    """A vertex or a point interior to an edge."""
    if draw(st.booleans()) or len(net.edges) == 0:
        return net.vertices[draw(st.integers(0, len(net.vertices) - 1))].copy()
    i, j = net.edges[draw(st.integers(0, len(net.edges) - 1))]
    t = draw(st.floats(0.05, 0.95))
    return (1 - t) * net.vertices[i] + t * net.vertices[j]
