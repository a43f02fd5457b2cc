import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from superstab import multigraph as mg
from superstab.certify import Verdict, verify_super_stable
from superstab.construct import (ConstructionError, ContinuationProblem, add_edge, attach_ear,
                                 cone_certificate, continuation_solve, gallery, is_injective,
                                 lift_adjacency, parse_gallery_name, realize_from_minor,
                                 relabel_certificate, remove_coincident, slice_cone, slide,
                                 split_vertex_certificate, subdivide_cable)
from superstab.symmat import inertia, psd_nullity
from superstab.tensegrity import (is_congruent, is_splittable, non_splittable_sufficient)


class TestGallery:
    @pytest.mark.parametrize("name,n,d", [
        ("tree", 5, 0), ("cycle", 3, 1), ("cycle", 7, 1), ("complete", 3, 1), ("complete", 6, 4),
        ("complete_multi", 2, 1), ("complete_multi", 5, 4), ("k4_square", None, 2),
        ("prism", None, 3), ("dihedral_star", None, 3)])
    def test_verified(self, name, n, d):
        c = gallery(name, n)
        assert c.verdict is Verdict.SUPER_STABLE and c.d == d

    def test_tree_custom(self):
        c = gallery("tree", graph=mg.star(4))
        assert c.super_stable and np.all(c.omega == 1)
        with pytest.raises(ConstructionError):
            gallery("tree", graph=mg.cycle(4))

    def test_cycle_stress(self):
        c = gallery("cycle", 5)
        assert np.array_equal(c.omega, [4, 4, 4, 4, -1])
        assert c.tensegrity.sigma == (1, 1, 1, 1, -1)

    def test_complete_rank_one(self):
        # the Laplacian of the complete-graph stress is a a^T with a the
        # affine dependency of the points
        c = gallery("complete", 5)
        L = c.tensegrity.laplacian(c.omega)
        a = np.array([1, 1, 1, 1, -4.0])
        assert np.allclose(L, np.outer(a, a))
        assert np.allclose(c.tensegrity.p @ a, 0)

    def test_k4_square(self):
        c = gallery("k4_square")
        assert np.array_equal(c.omega, [1, -1, 1, 1, -1, 1])

    def test_figure_tensegrities(self):
        prism = gallery("prism")
        assert mg.is_isomorphic(prism.tensegrity.graph, mg.complete_multipartite(2, 2, 2))
        assert is_injective(prism.tensegrity.p)
        assert non_splittable_sufficient(prism.tensegrity)
        star = gallery("dihedral_star")
        assert mg.is_isomorphic(star.tensegrity.graph, mg.cube())
        assert is_injective(star.tensegrity.p)

    def test_bad_names(self):
        with pytest.raises(ValueError):
            gallery("dodecahedron")
        with pytest.raises(ConstructionError):
            gallery("cycle", 1)
        assert parse_gallery_name("cycle(5)") == ("cycle", 5)
        assert parse_gallery_name("prism") == ("prism", None)


class TestCone:
    def test_cone_block(self):
        c = gallery("cycle", 4)
        cc = cone_certificate(c)
        assert cc.certificate.d == 2 and cc.cone_vertex == 4
        L = cc.certificate.tensegrity.laplacian(cc.certificate.omega)
        assert np.allclose(L[:4, :4], c.tensegrity.laplacian(c.omega))
        assert np.allclose(L[4], 0)

    def test_slice_round_trip(self):
        c = gallery("complete", 4)
        out = slice_cone(cone_certificate(c), np.eye(3)[2], 1.0)
        assert out.super_stable
        assert is_congruent(out.tensegrity.p, c.tensegrity.p, 1e-9)

    def test_slice_other_hyperplane(self):
        cc = cone_certificate(gallery("k4_square"))
        out = slice_cone(cc, [0.2, 0.1, 1.0], 2.0)
        assert out.super_stable and out.d == 2
        with pytest.raises(ConstructionError):
            slice_cone(cc, [0.0, 0.0, 1.0], 0.0)

    @settings(max_examples=15, deadline=None)
    @given(st.lists(st.floats(0.2, 5.0), min_size=4, max_size=4), st.booleans())
    def test_slide_keeps_inertia(self, s, flip):
        s = np.array(s)
        if flip:
            s[0] = -s[0]
        cc = cone_certificate(gallery("k4_square"))
        out = slide(cc, s).certificate
        assert out.super_stable
        L0 = cc.certificate.tensegrity.laplacian(cc.certificate.omega)
        L1 = out.tensegrity.laplacian(out.omega)
        assert inertia(L0) == inertia(L1, scale=np.abs(out.omega).max())
        # edges of the base whose endpoints are on opposite sides change sign
        G = out.tensegrity.graph
        for e, (u, v) in enumerate(G.edges):
            if 4 not in (u, v):
                assert out.tensegrity.sigma[e] == np.sign(s[u] * s[v]) * cc.certificate.tensegrity.sigma[e]


class TestLift:
    def test_path(self):
        A = np.array([[1.0, -1, 0], [-1, 2, -1], [0, -1, 1]])
        cc = lift_adjacency(mg.path(3), A)
        assert cc.certificate.super_stable and cc.certificate.d == 1

    def test_positive_definite_is_dimension_zero(self):
        A = np.array([[2.0, -1, 0], [-1, 2, -1], [0, -1, 2]])
        cc = lift_adjacency(mg.path(3), A)
        assert cc.certificate.d == 0
        # all base points sit on the cone vertex and merge away
        out = remove_coincident(cc)
        assert out.certificate.tensegrity.n == 1

    def test_errors(self):
        with pytest.raises(ConstructionError):
            lift_adjacency(mg.path(3), -np.eye(3))
        with pytest.raises(ConstructionError):
            lift_adjacency(mg.path(3), np.array([[1.0, -1, -1], [-1, 1, 0], [-1, 0, 1]]))
        with pytest.raises(ConstructionError):
            lift_adjacency(mg.path(3), np.array([[1.0, 1, 0], [1, 2, 1], [0, 1, 1]]))


class TestRemoveCoincident:
    def test_partial(self):
        # kernel (1, 0, -1): vertex 1 lands on the cone vertex
        G = mg.Multigraph(3, ((0, 1), (1, 2), (0, 2), (0, 2)))
        A = np.array([[1.0, -1, 1], [-1, 2, -1], [1, -1, 1]])
        cc = lift_adjacency(G, A)
        p = cc.certificate.tensegrity.p
        assert np.allclose(p[:, 1], p[:, 3])
        out = remove_coincident(cc)
        assert out.certificate.super_stable
        assert out.certificate.tensegrity.n == 3 and out.cone_vertex == 2
        assert is_injective(out.certificate.tensegrity.p)

    def test_nothing_to_remove(self):
        cc = cone_certificate(gallery("cycle", 4))
        assert remove_coincident(cc) is cc


class TestContinuation:
    def test_constant_family(self):
        L0 = gallery("cycle", 4)
        M = L0.tensegrity.laplacian(L0.omega)
        cp = ContinuationProblem(lambda th, eps: M, lambda th, eps: np.zeros((1, 4, 4)),
                                 np.zeros(1), 2)
        res = continuation_solve(cp)
        assert res.iterations == 0 and res.eps == max(cp.eps_schedule)
        assert np.array_equal(res.matrix, M)

    def test_impossible(self):
        cp = ContinuationProblem(lambda th, eps: np.eye(3) * (1 + th[0] ** 2),
                                 lambda th, eps: np.eye(3)[None] * 2 * th[0], np.ones(1), 1,
                                 max_iter=5)
        with pytest.raises(ConstructionError):
            continuation_solve(cp)


class TestEdgeOperators:
    def test_add_chord(self):
        out = add_edge(gallery("cycle", 4), 0, 2)
        assert out.super_stable and out.d == 1
        assert out.tensegrity.graph.edges[-1] == (0, 2) and out.tensegrity.sigma[-1] == 1

    def test_add_parallel(self):
        c = gallery("cycle", 4)
        out = add_edge(c, 0, 1)
        assert out.super_stable and out.tensegrity.sigma[-1] == -1
        L0 = c.tensegrity.laplacian(c.omega)
        assert np.allclose(out.tensegrity.laplacian(out.omega), L0 / np.abs(c.omega).max())
        same = add_edge(c, 0, 1, sign=1)
        assert same.super_stable and np.isclose(same.omega[0], same.omega[-1])

    def test_add_invalid(self):
        with pytest.raises(ConstructionError):
            add_edge(gallery("cycle", 4), 1, 1)

    def test_subdivide(self):
        c = gallery("cycle", 4)
        out = subdivide_cable(c, 0)
        assert out.super_stable
        assert np.allclose(out.omega[-2:], 2 * c.omega[0])
        assert np.allclose(out.tensegrity.p[:, 4], 0.5)
        with pytest.raises(ConstructionError):
            subdivide_cable(c, 3)  # the strut

    def test_subdivide_avoids_collision(self):
        # on the line, the midpoint of 0-2 is the point 1
        c = add_edge(gallery("cycle", 4), 0, 2)
        out = subdivide_cable(c, 4)
        assert is_injective(out.tensegrity.p)

    def test_ear_order(self):
        out = attach_ear(gallery("cycle", 4), 2, 0, 3)
        assert out.super_stable
        # internal vertices are numbered from the first endpoint
        assert sorted(out.tensegrity.graph.edges[-3:]) == [(0, 5), (2, 4), (4, 5)]

    def test_ear_length_one(self):
        out = attach_ear(gallery("k4_square"), 0, 1, 1)
        assert out.super_stable and out.tensegrity.graph.m == 7


class TestSplit:
    def test_k4_square(self):
        c = gallery("k4_square")
        G = c.tensegrity.graph
        move = [G.incident(0)[0], G.incident(0)[1]]
        out = split_vertex_certificate(c, 0, move, injective=True)
        assert out.super_stable and out.d == 2
        assert is_injective(out.tensegrity.p) and not is_splittable(out.tensegrity, out.omega)

    def test_explicit_form_and_contraction(self):
        c = gallery("k4_square")
        G = c.tensegrity.graph
        move = [G.incident(0)[0]]
        out = split_vertex_certificate(c, 0, move, eps_schedule=[1e-6])
        T = out.tensegrity
        bridge = T.graph.m - 1
        # contracting the bridge gives back the graph and, as eps -> 0, the
        # configuration
        back = mg.contract_edge(T.graph, bridge)
        assert mg.is_isomorphic(back.graph, G)
        assert np.abs(T.p[:, :4] - c.tensegrity.p).max() <= 1e-4
        # v0 = p(v1) + eps' sum omega(f) (p(u) - p(v1)), eps' = 1/(bridge + sum)
        w = out.omega
        eps_eff = 1.0 / (w[bridge] + w[move].sum())
        u = G.other(move[0], 0)
        pred = T.p[:, 0] + eps_eff * w[move[0]] * (T.p[:, u] - T.p[:, 0])
        assert np.allclose(T.p[:, 4], pred, atol=1e-12)

    def test_bad_move(self):
        c = gallery("k4_square")
        with pytest.raises(ConstructionError):
            split_vertex_certificate(c, 0, [])
        with pytest.raises(ConstructionError):
            split_vertex_certificate(c, 0, [5])


class TestRealize:
    @pytest.mark.parametrize("G,H,base", [
        (mg.complete(4), mg.complete(3), ("complete", 3)),
        (mg.cycle(6), mg.cycle(3), ("cycle", 3)),
        (mg.cube(), mg.complete(4), ("complete", 4)),
        (mg.petersen(), mg.complete(4), ("complete", 4)),
        (mg.complete_multipartite(3, 3), mg.complete(4), ("complete", 4)),
        (mg.complete_multipartite(2, 2, 2), mg.complete(4), ("complete", 4)),
        (mg.complete(5), mg.complete(4), ("complete", 4)),
    ])
    def test_grows(self, G, H, base):
        out = realize_from_minor(G, H, gallery(*base))
        assert out.super_stable and out.tensegrity.graph == G
        assert out.d == gallery(*base).d
        assert is_injective(out.tensegrity.p)

    def test_not_a_minor(self):
        with pytest.raises(ConstructionError, match="minor"):
            realize_from_minor(mg.cycle(5), mg.complete(4), gallery("complete", 4))

    def test_relabel(self):
        c = gallery("k4_square")
        G = c.tensegrity.graph
        perm = [2, 0, 3, 1]
        H = mg.relabel(G, perm)
        eperm = [H.edges.index(tuple(sorted((perm[a], perm[b])))) for a, b in G.edges]
        out = relabel_certificate(c, H, perm, eperm)
        assert out.super_stable
        assert np.allclose(out.tensegrity.p[:, perm], c.tensegrity.p)


def test_verify_rejects_construction_tampering():
    c = gallery("prism")
    w = c.omega.copy()
    w[0] *= 1.01
    assert verify_super_stable(c.tensegrity, w).verdict is Verdict.NEITHER
    assert psd_nullity(c.tensegrity.laplacian(c.omega)).nullity == 4
