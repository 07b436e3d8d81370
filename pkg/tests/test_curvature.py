import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from curverewire.curvature import (
    CurvatureVector,
    bfc_all,
    bfc_edge,
    compute,
    curvature_profile,
    jlc_all,
    jlc_edge,
    jlc_for_edges,
    ollivier_all,
    ollivier_exact,
)
from curverewire.data import complete_graph, cycle_graph, gen_binary_tree, path_graph, star_graph, two_triangle_bridge
from curverewire.graph import all_pairs_distances, build_graph
from curverewire.spectral import cheeger_constant_exact, spectral_extremes
from curverewire.transport import min_cost_transport

from conftest import graphs, random_connected


def w1_linprog(g, i, j):
    """Wasserstein-1 between uniform neighbour measures via a generic LP."""
    Ni, Nj = g.neighbors(i), g.neighbors(j)
    D = all_pairs_distances(g)[np.ix_(Ni, Nj)]
    a, b = len(Ni), len(Nj)
    A_eq = np.zeros((a + b, a * b))
    for r in range(a):
        A_eq[r, r * b : (r + 1) * b] = 1
    for c in range(b):
        A_eq[a + c, c::b] = 1
    rhs = np.concatenate([np.full(a, 1 / a), np.full(b, 1 / b)])
    res = linprog(D.ravel(), A_eq=A_eq, b_eq=rhs, bounds=(0, None), method="highs")
    assert res.status == 0
    return res.fun


def bfc_dense(g, i, j):
    """Balanced Forman curvature written directly from the adjacency matrix."""
    A = g.adjacency_matrix.toarray().astype(bool)
    di, dj = A[i].sum(), A[j].sum()
    tri = (A[i] & A[j]).sum()
    val = 2 / di + 2 / dj - 2 + 2 * tri / max(di, dj) + tri / min(di, dj)
    idx = np.arange(g.n)

    def side(a, b):
        ks = np.flatnonzero(A[a] & ~A[b] & (idx != b))
        counts = [int((A[k] & A[b] & ~A[a] & (idx != a)).sum()) for k in ks]
        return sum(c > 0 for c in counts), max(counts, default=0)

    si, gi = side(i, j)
    sj, gj = side(j, i)
    gamma = max(gi, gj)
    if gamma:
        val += (si + sj) / (gamma * max(di, dj))
    return val


@pytest.mark.parametrize("g,edge,expected", [
    (complete_graph(3), (0, 1), 0.5),
    (two_triangle_bridge(), (2, 3), -2 / 3),
    (two_triangle_bridge(), (1, 2), 1 / 3),
    (path_graph(3), (0, 1), 0.0),
    (gen_binary_tree(3), (1, 3), -2 / 3),
])
def test_jlc_hand_values(g, edge, expected):
    assert abs(jlc_edge(g, *edge) - expected) <= 1e-12
    assert abs(jlc_edge(g, *edge[::-1]) - expected) <= 1e-12


def test_jlc_all_bridge_fixture():
    g = two_triangle_bridge()
    got = dict(zip(map(tuple, g.edges.tolist()), jlc_all(g).values))
    assert got[(0, 1)] == pytest.approx(0.5) and got[(4, 5)] == pytest.approx(0.5)
    for e in [(0, 2), (1, 2), (3, 4), (3, 5)]:
        assert got[e] == pytest.approx(1 / 3)
    assert got[(2, 3)] == pytest.approx(-2 / 3)


def test_jlc_k4_constant_and_c4_zero():
    assert np.ptp(jlc_all(complete_graph(4)).values) == 0
    assert np.all(jlc_all(cycle_graph(4)).values == 0)


def test_jlc_zero_degree_raises():
    with pytest.raises(ValueError):
        jlc_edge(build_graph([(0, 1)], 3), 0, 2)


@given(graphs(min_n=2))
def test_jlc_range_and_agreement(g):
    vec = jlc_all(g)
    assert len(vec) == g.m
    assert np.all(vec.values >= -2 - 1e-12) and np.all(vec.values <= 1 + 1e-12)
    assert np.allclose(vec.values, jlc_for_edges(g, g.edges))
    for (u, v), x in zip(g.edges.tolist(), vec.values):
        assert jlc_edge(g, v, u) == pytest.approx(x, abs=1e-15)


def test_ollivier_examples():
    assert ollivier_exact(path_graph(3), 0, 1) == pytest.approx(0.0, abs=1e-15)
    assert ollivier_exact(path_graph(7), 2, 3) == pytest.approx(0.0, abs=1e-15)
    k3 = ollivier_exact(complete_graph(3), 0, 1)
    assert k3 >= 0.5  # mu_0 = (d1+d2)/2, mu_1 = (d0+d2)/2: half the mass moves one hop
    assert k3 == pytest.approx(0.5, abs=1e-15)


def test_transport_small_instances():
    cost, plan = min_cost_transport([1, 1], [1, 1], [[0, 5], [5, 0]])
    assert cost == 0 and plan.tolist() == [[1, 0], [0, 1]]
    cost, plan = min_cost_transport([2], [1, 1], [[3, 4]])
    assert cost == 7
    with pytest.raises(ValueError):
        min_cost_transport([1], [2], [[1]])


def test_ollivier_against_linprog(rng):
    for _ in range(5):
        g = random_connected(rng, 14, 0.3)
        for u, v in g.edges.tolist()[:15]:
            assert ollivier_exact(g, u, v) == pytest.approx(1 - w1_linprog(g, u, v), abs=1e-9)


@given(graphs(min_n=2, max_n=9, connected=True))
def test_ollivier_dominates_jlc(g):
    ok = ollivier_all(g).values
    assert np.all(ok >= jlc_all(g).values - 1e-9)
    for (u, v), x in zip(g.edges.tolist(), ok):
        assert ollivier_exact(g, v, u) == pytest.approx(x, abs=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5, 7])
def test_positive_curvature_chain_on_complete_graphs(n):
    g = complete_graph(n)
    kmin = jlc_all(g).values.min()
    assert kmin > 0
    assert spectral_extremes(g)[0] >= kmin - 1e-9
    assert 2 * cheeger_constant_exact(g).h >= kmin - 1e-9


def test_bfc_tree_edges_are_degree_terms():
    for g in (gen_binary_tree(3), path_graph(6), star_graph(5)):
        d = g.degrees
        expected = 2 / d[g.edges[:, 0]] + 2 / d[g.edges[:, 1]] - 2
        assert np.allclose(bfc_all(g).values, expected, atol=1e-15)
    assert bfc_edge(star_graph(4), 0, 1) == pytest.approx(2 / 4)


def test_bfc_closed_forms():
    assert np.allclose(bfc_all(complete_graph(5)).values, 5 / 4)
    assert np.allclose(bfc_all(cycle_graph(4)).values, 1.0)
    assert np.allclose(bfc_all(cycle_graph(5)).values, 0.0)
    assert bfc_edge(complete_graph(3), 0, 1) > 0


@given(graphs(min_n=2, max_n=10))
def test_bfc_against_dense_oracle(g):
    vals = bfc_all(g).values
    for (u, v), x in zip(g.edges.tolist(), vals):
        assert x == pytest.approx(bfc_dense(g, u, v), abs=1e-12)
        assert bfc_edge(g, v, u) == pytest.approx(x, abs=1e-12)


def test_profile_bridge_and_k4():
    g = two_triangle_bridge()
    prof = curvature_profile(g, "jlc")
    assert prof["min"] == pytest.approx(-2 / 3) and prof["argmin_edge"] == [2, 3]
    assert sum(prof["histogram"]) == g.m and len(prof["histogram"]) == 20
    assert prof["bin_edges"][0] == -2.0 and prof["bin_edges"][-1] == 1.0
    k4 = curvature_profile(complete_graph(4), "bfc")
    assert k4["min"] == k4["max"]


def test_profile_empty_graph():
    prof = curvature_profile(build_graph([], 3))
    assert prof["count"] == 0 and prof["min"] is None and prof["seconds"] >= 0


def test_compute_rejects_unknown_metric():
    with pytest.raises(ValueError):
        compute(complete_graph(3), "forman")


def test_csv_round_trip(tmp_path, rng):
    g = random_connected(rng, 15, 0.3)
    vec = jlc_all(g)
    p = tmp_path / "c.csv"
    vec.to_csv(g, p)
    back, edges = CurvatureVector.from_csv(p)
    assert np.array_equal(edges, g.edges)
    assert np.array_equal(back.values, vec.values)
    assert back.metric == "jlc" and back.graph_fingerprint == g.fingerprint


def test_csv_rejects_foreign_graph(tmp_path):
    with pytest.raises(ValueError):
        jlc_all(complete_graph(3)).to_csv(path_graph(3), tmp_path / "x.csv")
