import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import euclidean_sap_direct
from superstab.certify import (IndeterminateError, Verdict, affine_coordinates,
                               conic_condition, euclidean_sap, search_stress,
                               stress_space, verify_super_stable)
from superstab.multigraph import Multigraph, complete, complete_multi, cycle, path, theta
from superstab.symmat import assemble_laplacian
from superstab.tensegrity import Tensegrity, is_congruent, is_deformation

SQUARE = np.array([[0.0, 1, 1, 0], [0, 0, 1, 1]])
K4_OMEGA = np.array([1.0, -1, 1, 1, -1, 1])


def cycle_line(n):
    w = np.full(n, n - 1.0)
    w[-1] = -1.0
    return Tensegrity(cycle(n), "+" * (n - 1) + "-", np.arange(n, dtype=float)[None, :]), w


def simplex_kn(n, rng=None):
    """K_n on a simplex in R^{n-2} plus an interior point.  With the affine
    dependency a, the stress -a_u a_v has Laplacian a a^T."""
    d = n - 2
    if rng is None:
        V = np.hstack([np.eye(d), -np.ones((d, 1))])
        a = np.ones(d + 1) / (d + 1)
    else:
        V = rng.standard_normal((d, d + 1))
        a = rng.uniform(0.2, 1, d + 1)
        a /= a.sum()
    p = np.column_stack([V, V @ a])
    coef = np.append(a, -1.0)
    G = complete(n)
    w = np.array([-coef[u] * coef[v] for u, v in G.edges])
    return Tensegrity(G, np.sign(w), p), w


class TestConic:
    def test_one_edge_line(self):
        assert conic_condition(Multigraph(2, ((0, 1),)), [[0.0, 1.0]]).ok

    def test_parallel_directions(self):
        G = path(3)
        r = conic_condition(G, [[0.0, 1, 2], [0, 0, 0]])
        assert not r.ok
        v = np.array([1.0, 0.0])
        assert abs(v @ r.witness @ v) < 1e-12 and np.abs(r.witness).max() > 0.1

    def test_square(self):
        assert conic_condition(complete(4), SQUARE).ok

    def test_vacuous(self):
        assert conic_condition(path(3), np.zeros((0, 3))).ok
        assert conic_condition(Multigraph(3, ()), np.eye(3)).ok

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_affine_invariance(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 4))
        n = int(rng.integers(d + 1, d + 5))
        G = Multigraph(n, tuple(tuple(rng.choice(n, 2, replace=False)) for _ in range(rng.integers(1, 10))))
        p = rng.standard_normal((d, n))
        A = rng.standard_normal((d, d)) + 2 * np.eye(d)
        t = rng.standard_normal((d, 1))
        assert conic_condition(G, p).ok == conic_condition(G, A @ p + t).ok


class TestEuclideanSap:
    def test_rank_one_k4(self):
        a = np.array([1.0, -1.0, 1.0, -1.0])
        L = np.outer(a, a)
        assert euclidean_sap(L, complete(4))
        assert euclidean_sap_direct(L, complete(4))

    def test_zero_matrix_double_edge(self):
        assert euclidean_sap(np.zeros((2, 2)), theta(2))

    def test_cycle(self):
        T, w = cycle_line(4)
        L = assemble_laplacian(T.graph, w)
        assert euclidean_sap(L, T.graph)

    def test_off_support(self):
        with pytest.raises(ValueError):
            euclidean_sap(np.ones((3, 3)), path(3))

    def test_indeterminate(self):
        # eigenvalues 3, 3 and 5e-8: neither clearly zero nor clearly not
        L = assemble_laplacian(complete(3), [1.0, 1.0, 1.0]) + 5e-8 / 3
        with pytest.raises(IndeterminateError):
            euclidean_sap(L, complete(3))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_agrees_with_direct_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 7))
        d = int(rng.integers(1, n - 1))
        # PSD Laplacian with a random d+1 dimensional kernel containing 1,
        # then check SAP on a graph that contains its support
        Y = rng.standard_normal((n, n - d - 1))
        Y -= Y.mean(axis=0)
        L = Y @ Y.T
        G = complete(n)
        if rng.random() < 0.5:
            # add a parallel pair, which must not change the verdict
            G = Multigraph(n, G.edges + (G.edges[0],))
        assert euclidean_sap(L, G) == euclidean_sap_direct(L, G)

    def test_failing_case_agrees(self):
        # zero Laplacian on a doubled path: reduced kernel is a 2-d
        # configuration with only two edge directions
        G = Multigraph(3, ((0, 1), (0, 1), (1, 2), (1, 2)))
        L = np.zeros((3, 3))
        assert not euclidean_sap(L, G)
        assert not euclidean_sap_direct(L, G)


class TestVerify:
    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_cycles(self, n):
        T, w = cycle_line(n)
        c = verify_super_stable(T, w)
        assert c.verdict is Verdict.SUPER_STABLE and c.d == 1

    def test_k3_double(self):
        T = Tensegrity(complete_multi(3), "+-" * 3, [[0.0, 1, 0.3], [0, 0, 1]])
        c = verify_super_stable(T, [2.0, -2.0] * 3)
        assert c.verdict is Verdict.SUPER_STABLE and c.d == 2 and c.nullity == 3

    def test_square_all_cables(self):
        T = Tensegrity(complete(4), "+" * 6, SQUARE)
        assert verify_super_stable(T, K4_OMEGA).verdict is Verdict.NEITHER

    def test_square(self):
        T = Tensegrity(complete(4), "+-++-+", SQUARE)
        c = verify_super_stable(T, K4_OMEGA)
        assert c.verdict is Verdict.SUPER_STABLE and c.d == 2
        rep = c.report()
        assert rep["verdict"] == "SuperStable" and rep["nullity"] == 3

    def test_dimension_mismatch_and_stress_only(self):
        # doubled triangle on three collinear points
        G = Multigraph(3, ((0, 1), (0, 1), (1, 2), (1, 2), (0, 2), (0, 2)))
        T = Tensegrity(G, "+-+-+-", [[0.0, 1.0, 3.0]])
        c = verify_super_stable(T, [1, -1, 1, -1, 1, -1])
        # nullity 3 but affine dimension 1
        assert c.verdict is Verdict.NEITHER
        # a doubled star in the plane has only two edge directions
        G = Multigraph(3, ((0, 1), (0, 1), (0, 2), (0, 2)))
        T = Tensegrity(G, "+-+-", [[0.0, 1, 0], [0, 0, 1]])
        c = verify_super_stable(T, [1, -1, 1, -1])
        assert c.nullity == 3 and c.d == 2 and c.psd
        assert not c.conic.ok
        assert c.verdict is Verdict.STRESS_ONLY

    def test_conic_only(self):
        T, w = cycle_line(4)
        c = verify_super_stable(T, -w)
        assert c.verdict is Verdict.NEITHER  # signs now wrong
        T2 = Tensegrity(T.graph, "---+", T.p)
        c = verify_super_stable(T2, -w)
        assert c.verdict is Verdict.CONIC_ONLY

    def test_not_equilibrium(self):
        T = Tensegrity(path(2), "+", [[0.0, 1.0]])
        c = verify_super_stable(T, [1.0])
        assert c.verdict is Verdict.NEITHER

    def test_indeterminate(self):
        # a tiny cycle stress next to a cancelling parallel pair of size 1:
        # the cycle's eigenvalues 6 and 10 shrink into the tolerance gap
        T, w = cycle_line(4)
        G = Multigraph(4, T.graph.edges + ((0, 1), (0, 1)))
        sigma = T.sigma + (1, -1)
        w2 = np.concatenate([w * 5e-9, [1.0, -1.0]])
        c = verify_super_stable(Tensegrity(G, sigma, T.p), w2)
        assert c.verdict is Verdict.INDETERMINATE

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(0.01, 100))
    def test_scaling_invariance(self, seed, c):
        rng = np.random.default_rng(seed)
        T, w = simplex_kn(int(rng.integers(3, 6)), rng)
        assert verify_super_stable(T, w).verdict is Verdict.SUPER_STABLE
        assert verify_super_stable(T, c * w).verdict is Verdict.SUPER_STABLE

    def test_heuristic_rigidity_spot_check(self):
        # heuristic: random small perturbations respecting the cable/strut
        # inequalities should be congruent to p
        T, w = simplex_kn(4)
        assert verify_super_stable(T, w).super_stable
        rng = np.random.default_rng(7)
        for _ in range(100):
            q = T.p + 1e-2 * rng.standard_normal(T.p.shape)
            assert is_congruent(T.p, q, 1e-6) or not is_deformation(T, q, 0.0).ok


class TestSearch:
    def test_tree_distinct(self):
        T = Tensegrity(path(4), "+++", [[0.0, 1, 2, 3]])
        assert stress_space(T).shape[1] == 0
        assert search_stress(T) is None

    def test_single_edge_coincident(self):
        T = Tensegrity(path(2), "+", np.zeros((2, 2)))
        w = search_stress(T)
        assert w is not None and np.allclose(w, [1.0])
        assert verify_super_stable(T, w).d == 0

    def test_square(self):
        T = Tensegrity(complete(4), "+-++-+", SQUARE)
        w = search_stress(T, seed=3)
        assert w is not None
        assert np.allclose(w / w[0], K4_OMEGA)

    def test_simplex_kn_random(self):
        rng = np.random.default_rng(9)
        for n in (4, 5, 6):
            T, _ = simplex_kn(n, rng)
            w = search_stress(T, seed=n)
            assert w is not None and verify_super_stable(T, w).super_stable

    def test_deterministic(self):
        T, _ = simplex_kn(5, np.random.default_rng(1))
        assert np.array_equal(search_stress(T, seed=4), search_stress(T, seed=4))

    def test_wrong_signs(self):
        T = Tensegrity(complete(4), "+" * 6, SQUARE)
        assert search_stress(T) is None


def test_affine_coordinates():
    p = np.array([[0.0, 1, 2], [0, 1, 2], [5, 5, 5]])
    Y = affine_coordinates(p)
    assert Y.shape == (1, 3)
    assert np.allclose(np.abs(Y[0] - Y[0, 0]), [0, np.sqrt(2), 2 * np.sqrt(2)])
