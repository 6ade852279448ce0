"""Nearest-neighbor graphs and the Laplacian eigenvalue score."""

import numpy as np
import pytest

from lexbridge.embedding import EmbeddingSpace
from lexbridge.spectral import (NNGraph, build_nn_graph, eigenvector_score,
                                laplacian_eigenvalues)


def _space(vectors, prefix="w"):
    v = np.asarray(vectors, dtype=np.float64)
    return EmbeddingSpace([f"{prefix}{i}" for i in range(len(v))], v)


def _graph_from_adjacency(a):
    a = np.asarray(a, dtype=np.int8)
    return NNGraph([f"n{i}" for i in range(len(a))], a, g=1)


PATH3 = [[0, 1, 0], [1, 0, 1], [0, 1, 0]]
TRIANGLE = [[0, 1, 1], [1, 0, 1], [1, 1, 0]]


class TestBuildNNGraph:
    def test_adjacency_symmetric_zero_diagonal(self):
        rng = np.random.default_rng(5)
        e = _space(rng.normal(size=(12, 4)))
        g = build_nn_graph(e, 3)
        a = g.adjacency
        assert np.array_equal(a, a.T)
        assert not a.diagonal().any()
        assert set(np.unique(a)) <= {0, 1}

    def test_matches_brute_force_neighbors(self):
        rng = np.random.default_rng(9)
        for trial in range(20):
            n = int(rng.integers(4, 10))
            vecs = rng.normal(size=(n, 3))
            e = _space(vecs)
            k = int(rng.integers(1, n - 1))
            g = build_nn_graph(e, k)
            unit = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
            sim = unit @ unit.T
            np.fill_diagonal(sim, -np.inf)
            expect = np.zeros((n, n), dtype=np.int8)
            for i in range(n):
                for j in np.argsort(-sim[i], kind="stable")[:k]:
                    expect[i, j] = 1
                    expect[j, i] = 1
            assert np.array_equal(g.adjacency, expect), f"trial {trial}"

    def test_three_collinear_vectors(self):
        e = _space([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
        g = build_nn_graph(e, 1)
        a = g.adjacency
        assert np.array_equal(a, a.T)
        assert a.sum(axis=1).min() >= 1

    def test_g_bounds_enforced(self):
        e = _space(np.eye(3))
        with pytest.raises(ValueError):
            build_nn_graph(e, 3)
        with pytest.raises(ValueError):
            build_nn_graph(e, 0)

    def test_identical_spaces_identical_graphs(self):
        rng = np.random.default_rng(2)
        vecs = rng.normal(size=(8, 5))
        g1 = build_nn_graph(_space(vecs), 2)
        g2 = build_nn_graph(_space(vecs.copy()), 2)
        assert np.array_equal(g1.adjacency, g2.adjacency)

    def test_subset_restricts_nodes(self):
        rng = np.random.default_rng(3)
        e = _space(rng.normal(size=(10, 4)))
        g = build_nn_graph(e, 2, subset=e.words[:5])
        assert g.nodes == e.words[:5]
        assert g.adjacency.shape == (5, 5)


class TestEigenvectorScore:
    def test_self_score_zero(self):
        g = _graph_from_adjacency(TRIANGLE)
        s = eigenvector_score(g, g)
        assert s.score == 0.0

    def test_path_vs_triangle_hand_spectra(self):
        """Path Laplacian spectrum is {3, 1, 0} and the triangle's is
        {3, 3, 0}; the 90% mass rule picks k=1 for both (3 < 0.9*4 and
        3 < 0.9*6), so the score compares only the two leading values."""
        gp = _graph_from_adjacency(PATH3)
        gt = _graph_from_adjacency(TRIANGLE)
        ep = laplacian_eigenvalues(gp)
        et = laplacian_eigenvalues(gt)
        assert np.allclose(ep, [3.0, 1.0, 0.0], atol=1e-9)
        assert np.allclose(et, [3.0, 3.0, 0.0], atol=1e-9)
        s = eigenvector_score(gp, gt)
        assert s.k_used == 1
        assert abs(s.score - (3.0 - 3.0) ** 2) < 1e-12

    def test_score_matches_brute_force(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            n = int(rng.integers(3, 9))
            g1 = build_nn_graph(_space(rng.normal(size=(n, 3))), 1)
            g2 = build_nn_graph(_space(rng.normal(size=(n, 3))), 1)
            e1 = np.sort(np.linalg.eigvalsh(
                np.diag(g1.adjacency.sum(1)) - g1.adjacency))[::-1]
            e2 = np.sort(np.linalg.eigvalsh(
                np.diag(g2.adjacency.sum(1)) - g2.adjacency))[::-1]

            def _k(e):
                cum = np.cumsum(e)
                ok = np.nonzero(cum < 0.9 * e.sum())[0]
                return int(ok[0]) + 1 if len(ok) else 1

            k = min(_k(e1), _k(e2))
            want = float(((e1[:k] - e2[:k]) ** 2).sum())
            got = eigenvector_score(g1, g2)
            assert got.k_used == k
            assert abs(got.score - want) < 1e-9

    def test_symmetric_in_arguments(self):
        rng = np.random.default_rng(23)
        g1 = build_nn_graph(_space(rng.normal(size=(7, 3))), 2)
        g2 = build_nn_graph(_space(rng.normal(size=(7, 3))), 2)
        a = eigenvector_score(g1, g2)
        b = eigenvector_score(g2, g1)
        assert a.score == b.score
        assert a.k_used == b.k_used

    def test_nonnegative_and_eigenvalues_bounded_below(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            n = int(rng.integers(4, 12))
            g1 = build_nn_graph(_space(rng.normal(size=(n, 4))), 2)
            g2 = build_nn_graph(_space(rng.normal(size=(n, 4))), 2)
            assert eigenvector_score(g1, g2).score >= 0.0
            for g in (g1, g2):
                eigs = laplacian_eigenvalues(g)
                assert eigs.min() >= -1e-8

    def test_smallest_eigenvalue_near_zero(self):
        # connected or not, the all-ones vector is in the kernel
        for adj in (PATH3, TRIANGLE):
            eigs = laplacian_eigenvalues(_graph_from_adjacency(adj))
            assert abs(eigs[-1]) < 1e-10
