import random

import pytest
from hypothesis import given, settings, strategies as st

from superstab.multigraph import (
    GraphError, Multigraph, canonical_form, complete, complete_multi, cone,
    connectivity, contract_edge, cube, cycle, delete_edge, double, ear_sequence,
    edge_subgraph, is_isomorphic, path, simplify, star, theta, vertex_split,
    y_delta, disjoint_union,
)


@st.composite
def multigraphs(draw, max_n=6, max_m=9):
    n = draw(st.integers(2, max_n))
    m = draw(st.integers(0, max_m))
    edges = []
    for _ in range(m):
        u = draw(st.integers(0, n - 1))
        v = draw(st.integers(0, n - 2))
        if v >= u:
            v += 1
        edges.append((u, v))
    return Multigraph(n, tuple(edges))


def loop_free(G):
    return all(u != v for u, v in G.edges)


def test_loops_rejected():
    with pytest.raises(GraphError):
        Multigraph(2, ((0, 0),))


class TestSimplifyDouble:
    def test_simplify(self):
        assert simplify(complete_multi(3)) == complete(3)
        assert simplify(cycle(5)).edges == tuple(sorted(cycle(5).edges))
        assert simplify(theta(3)).edges == ((0, 1),)

    def test_double(self):
        assert double(Multigraph(2, ((0, 1),))).edges == ((0, 1), (0, 1))
        assert double(complete_multi(3)) == complete_multi(3)
        assert double(cycle(4)).m == 8
        assert all(len(c.members) == 2 for c in double(cycle(4)).parallel_classes())

    @given(multigraphs())
    def test_idempotence(self, G):
        assert simplify(simplify(G)) == simplify(G)
        assert double(simplify(G)) == double(G)


class TestDeleteContract:
    def test_delete(self):
        assert is_isomorphic(delete_edge(cycle(4), 0).graph, path(4))
        assert delete_edge(theta(2), 0).graph.edges == ((0, 1),)
        with pytest.raises(GraphError):
            delete_edge(Multigraph(3, ()), 0)

    def test_contract_cycle(self):
        assert is_isomorphic(contract_edge(cycle(4), 0).graph, cycle(3))

    def test_contract_parallel_pair(self):
        d = contract_edge(theta(2), 0)
        assert d.graph.n == 1 and d.graph.m == 0
        assert d.edge_map == {0: None, 1: None}

    def test_contract_k4(self):
        # K4/e: merged vertex joined to both others twice; the others once.
        d = contract_edge(complete(4), 0)
        expected = Multigraph(3, ((0, 1), (0, 1), (0, 2), (0, 2), (1, 2)))
        assert is_isomorphic(d.graph, expected)
        assert simplify(d.graph) == complete(3)

    def test_contract_relabel(self):
        G = Multigraph(4, ((1, 3), (0, 3), (2, 3)))
        d = contract_edge(G, 0)
        assert d.vertex_map == {0: 0, 1: 1, 2: 2, 3: 1}
        assert d.graph.edges == ((0, 1), (1, 2))
        with pytest.raises(GraphError):
            contract_edge(G, 7)


class TestSplit:
    def test_split_c3(self):
        G = cycle(3)
        inc = G.incident(0)
        d = vertex_split(G, 0, ([inc[0]], [inc[1]]), 1)
        assert is_isomorphic(d.graph, cycle(4))

    def test_split_empty_block(self):
        G = cycle(3)
        d = vertex_split(G, 1, (G.incident(1), []), 1)
        assert d.graph.n == 4 and d.graph.degree(3) == 1

    def test_split_k4_roundtrip(self):
        G = complete(4)
        inc = G.incident(0)
        H = vertex_split(G, 0, (inc[:2], inc[2:]), 1).graph
        back = contract_edge(H, H.m - 1).graph
        assert back == G
        assert is_isomorphic(back, complete(4))

    def test_split_errors(self):
        G = complete(4)
        with pytest.raises(GraphError):
            vertex_split(G, 0, ([0], [1]), 1)
        with pytest.raises(GraphError):
            vertex_split(G, 9, ([], []), 1)

    @settings(max_examples=60)
    @given(multigraphs(), st.data())
    def test_contract_then_split_roundtrip(self, G, data):
        if G.m == 0:
            return
        e = data.draw(st.integers(0, G.m - 1))
        a, b = G.edges[e]
        d = contract_edge(G, e)
        mult = sum(1 for f in G.edges if f == G.edges[e])
        stay, move = [], []
        for i, (x, y) in enumerate(G.edges):
            j = d.edge_map[i]
            if j is None:
                continue
            if b in (x, y):
                move.append(j)
            elif a in (x, y):
                stay.append(j)
        H = vertex_split(d.graph, d.vertex_map[a], (stay, move), mult).graph
        assert is_isomorphic(H, G)
        assert loop_free(H)


class TestCone:
    def test_counts(self):
        C, c = cone(Multigraph(1, ()))
        assert C.edges == ((0, 1), (0, 1)) and c == 1
        assert cone(Multigraph(2, ((0, 1),)))[0].m == 5
        assert cone(cycle(3))[0].m == 9

    @given(multigraphs())
    def test_restriction(self, G):
        C, c = cone(G)
        assert C.edges[:G.m] == G.edges
        assert all(C.edges.count((v, c)) == 2 for v in range(G.n))


class TestYDelta:
    def test_star(self):
        assert is_isomorphic(y_delta(star(3), 0).graph, complete(3))

    def test_cube_edge_count(self):
        # oracle: Y-Delta removes the 3 spokes and adds 3 triangle edges
        Q = cube()
        H = y_delta(Q, 0).graph
        assert (H.n, H.m) == (Q.n - 1, Q.m - 3 + 3) == (7, 12)

    def test_errors(self):
        with pytest.raises(GraphError):
            y_delta(star(4), 0)
        with pytest.raises(GraphError):
            y_delta(Multigraph(3, ((0, 1), (0, 1), (0, 2))), 0)


class TestConnectivity:
    def test_basic(self):
        assert connectivity(cycle(4)).is_2connected
        c = connectivity(path(3))
        assert len(c.components) == 1 and not c.is_2connected
        c = connectivity(disjoint_union(cycle(3), cycle(3)))
        assert len(c.components) == 2

    def test_two_vertex_flag(self):
        assert connectivity(theta(2)).is_2connected
        assert not connectivity(theta(2), two_vertex_parallel=False).is_2connected
        assert not connectivity(path(2)).is_2connected


def replay_ears(G, sub_edges, ears):
    used = set(sub_edges)
    verts = {v for e in sub_edges for v in G.edges[e]}
    for ear in ears:
        assert ear.vertices[0] in verts and ear.vertices[-1] in verts
        assert ear.vertices[0] != ear.vertices[-1]
        assert not (set(ear.vertices[1:-1]) & verts)
        for k, e in enumerate(ear.edges):
            assert set(G.edges[e]) == {ear.vertices[k], ear.vertices[k + 1]}
            assert e not in used
        used |= set(ear.edges)
        verts |= set(ear.vertices)
        assert connectivity(edge_subgraph(G, used).graph).is_2connected
    assert used == set(range(G.m))


class TestEars:
    def test_chord(self):
        G = Multigraph(4, cycle(4).edges + ((0, 2),))
        ears = ear_sequence(G, range(4))
        assert [e.length for e in ears] == [1]

    def test_k4(self):
        G = complete(4)
        tri = [i for i, e in enumerate(G.edges) if 3 not in e]
        ears = ear_sequence(G, tri)
        replay_ears(G, tri, ears)

    def test_theta(self):
        ears = ear_sequence(theta(3), [0, 1])
        assert [e.length for e in ears] == [1]

    def test_random_replay(self):
        rng = random.Random(3)
        for _ in range(30):
            n = rng.randint(4, 8)
            edges = list(cycle(n).edges)
            for _ in range(rng.randint(0, 6)):
                u, v = rng.sample(range(n), 2)
                edges.append((u, v))
            G = Multigraph(n, tuple(edges))
            ears = ear_sequence(G, range(n))
            replay_ears(G, range(n), ears)

    def test_longer_ears(self):
        # a cycle with a long handle: one ear of length 3
        G = Multigraph(6, cycle(4).edges + ((0, 4), (4, 5), (5, 2)))
        ears = ear_sequence(G, range(4))
        assert [e.length for e in ears] == [3]
        replay_ears(G, range(4), ears)

    def test_not_2connected(self):
        with pytest.raises(GraphError):
            ear_sequence(path(4), [0])


def test_canonical_form_invariant():
    G = Multigraph(4, ((0, 1), (0, 1), (1, 2), (2, 3)))
    H = Multigraph(4, ((3, 2), (3, 2), (2, 1), (1, 0)))
    assert canonical_form(G) == canonical_form(H)
    assert canonical_form(G) != canonical_form(path(4))
