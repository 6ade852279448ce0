"""Retrieval scoring against brute-force oracles and hubness behavior."""

from collections import Counter

import numpy as np
import pytest

from lexbridge import bdi
from lexbridge.embedding import EmbeddingSpace
from lexbridge.errors import UnknownWord, ValidationError
from lexbridge.retrieval import (RetrievalIndex, build_index, csls_query,
                                 evaluate_retrieval, induce_dictionary,
                                 nn_query, precision_at_k)


def _unit(m):
    m = np.asarray(m, dtype=np.float64)
    return m / np.linalg.norm(m, axis=1, keepdims=True)


def _brute_csls(mapped, target, k):
    """Direct computation: 2*cos minus mean top-k cosine in each direction."""
    xm, ym = _unit(mapped), _unit(target)
    sim = xm @ ym.T
    r_src = np.sort(sim, axis=1)[:, -k:].mean(axis=1)
    r_tgt = np.sort(sim, axis=0)[-k:, :].mean(axis=0)
    return 2 * sim - r_src[:, None] - r_tgt[None, :]


def _random_index(rng, n_src=None, n_tgt=None, d=None, k=None):
    n_src = n_src or int(rng.integers(3, 51))
    n_tgt = n_tgt or int(rng.integers(3, 51))
    d = d or int(rng.integers(2, 11))
    k = k or int(rng.integers(1, min(n_src, n_tgt) + 1))
    mapped = rng.normal(size=(n_src, d))
    target = rng.normal(size=(n_tgt, d))
    sw = [f"s{i}" for i in range(n_src)]
    tw = [f"t{i}" for i in range(n_tgt)]
    return (RetrievalIndex.from_matrices(sw, tw, mapped, target, k_csls=k),
            mapped, target, k)


class TestCslsOracle:
    def test_matches_brute_force_on_random_instances(self):
        rng = np.random.default_rng(0)
        for trial in range(50):
            idx, mapped, target, k = _random_index(rng)
            want = _brute_csls(mapped, target, k)
            for i, s in enumerate(idx.src_words):
                got = dict(csls_query(idx, s, len(idx.tgt_words)))
                for j, t in enumerate(idx.tgt_words):
                    assert abs(got[t] - want[i, j]) < 1e-9, \
                        f"trial {trial} pair ({s},{t})"

    def test_hand_worked_three_targets(self):
        """k_csls=1, source [1,0]; targets [1,0], [0,1], diag. Cosines are
        (1, 0, s) with s = sqrt(2)/2; r_src = 1 and, with a single source
        row, r_tgt equals the cosines themselves, so scores 2c - 1 - c
        come out (0, -1, s - 1)."""
        s = np.sqrt(2) / 2
        idx = RetrievalIndex.from_matrices(
            ["q"], ["e0", "e1", "diag"],
            [[1.0, 0.0]], [[1.0, 0.0], [0.0, 1.0], [s, s]], k_csls=1)
        got = csls_query(idx, "q", 3)
        assert [w for w, _ in got] == ["e0", "diag", "e1"]
        scores = dict(got)
        assert abs(scores["e0"] - 0.0) < 1e-12
        assert abs(scores["e1"] - (-1.0)) < 1e-12
        assert abs(scores["diag"] - (s - 1.0)) < 1e-12

    def test_ranking_ties_break_to_lower_id(self):
        idx = RetrievalIndex.from_matrices(
            ["q"], ["a", "b"], [[1.0, 0.0]],
            [[1.0, 0.0], [1.0, 0.0]], k_csls=1)
        assert [w for w, _ in csls_query(idx, "q", 2)] == ["a", "b"]
        assert [w for w, _ in nn_query(idx, "q", 2)] == ["a", "b"]


class TestHubness:
    def _hub_instance(self):
        """Twelve sources on a narrow cone, one hub target at the apex and
        one slightly-worse true target per source. The hub wins every raw
        cosine ranking; its crowded neighborhood is what CSLS discounts."""
        n, eps, delta = 12, 0.35, 0.85
        th = np.linspace(0, 2 * np.pi, n, endpoint=False)
        src = np.column_stack((np.ones(n), eps * np.cos(th),
                               eps * np.sin(th)))
        tgt = np.vstack(([[1.0, 0.0, 0.0]],
                         np.column_stack((np.ones(n), delta * np.cos(th),
                                          delta * np.sin(th)))))
        sw = [f"s{i}" for i in range(n)]
        tw = ["hub"] + [f"t{i}" for i in range(n)]
        return RetrievalIndex.from_matrices(sw, tw, src, tgt, k_csls=3)

    def test_csls_in_degree_not_above_nn(self):
        idx = self._hub_instance()
        nn_deg = Counter(nn_query(idx, s, 1)[0][0] for s in idx.src_words)
        cs_deg = Counter(csls_query(idx, s, 1)[0][0] for s in idx.src_words)
        assert max(nn_deg.values()) == 12
        assert max(cs_deg.values()) <= max(nn_deg.values())
        assert max(cs_deg.values()) == 1

    def test_csls_recovers_true_targets(self):
        idx = self._hub_instance()
        gold = [(f"s{i}", f"t{i}") for i in range(12)]
        assert precision_at_k(idx, gold, 1, method="nn") == 0.0
        assert precision_at_k(idx, gold, 1, method="csls") == 1.0


class TestPrecision:
    def test_monotone_in_k(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            idx, _, _, _ = _random_index(rng, n_src=20, n_tgt=30)
            gold = [(f"s{i}", f"t{int(rng.integers(0, 30))}")
                    for i in range(20)]
            ps = [precision_at_k(idx, gold, k) for k in (1, 5, 10)]
            assert ps[0] <= ps[1] <= ps[2]

    def test_invariant_under_common_rotation(self):
        rng = np.random.default_rng(9)
        mapped = rng.normal(size=(15, 6))
        target = rng.normal(size=(18, 6))
        r, _ = np.linalg.qr(rng.normal(size=(6, 6)))
        sw = [f"s{i}" for i in range(15)]
        tw = [f"t{i}" for i in range(18)]
        gold = [(f"s{i}", f"t{int(rng.integers(0, 18))}") for i in range(15)]
        a = RetrievalIndex.from_matrices(sw, tw, mapped, target, k_csls=4)
        b = RetrievalIndex.from_matrices(sw, tw, mapped @ r.T, target @ r.T,
                                         k_csls=4)
        for k in (1, 3, 5):
            assert (precision_at_k(a, gold, k)
                    == precision_at_k(b, gold, k))

    def test_single_target_is_always_found(self):
        idx = RetrievalIndex.from_matrices(
            ["s0", "s1"], ["only"],
            np.eye(2), [[0.3, 0.7]], k_csls=1)
        assert precision_at_k(idx, [("s0", "only"), ("s1", "only")], 1) == 1.0

    def test_k_validation(self):
        idx = RetrievalIndex.from_matrices(["s"], ["t"], [[1.0]], [[1.0]],
                                           k_csls=1)
        with pytest.raises(ValueError):
            precision_at_k(idx, [("s", "t")], 0)


class TestEvaluateRetrieval:
    def test_report_shape_and_skip_counting(self):
        rng = np.random.default_rng(10)
        idx, _, _, _ = _random_index(rng, n_src=20, n_tgt=20)
        gold = ([(f"s{i}", f"t{i}") for i in range(20)]
                + [("s0", "missing"), ("ghost", "t0"), ("s0", "t0")])
        rep = evaluate_retrieval(idx, gold, ks=(1, 5, 10))
        assert rep["method"] == "csls"
        assert rep["evaluated"] == 20
        assert rep["skipped"] == 2
        assert set(rep) >= {"p@1", "p@5", "p@10"}
        assert rep["p@1"] <= rep["p@5"] <= rep["p@10"] <= 1.0

    def test_duplicate_pairs_counted_once(self):
        idx = RetrievalIndex.from_matrices(
            ["s"], ["t"], [[1.0, 0.0]], [[1.0, 0.0]], k_csls=1)
        rep = evaluate_retrieval(idx, [("s", "t")] * 4, ks=(1,))
        assert rep["evaluated"] == 1
        assert rep["skipped"] == 0
        assert rep["p@1"] == 1.0

    def test_bootstrap_adds_std(self):
        rng = np.random.default_rng(11)
        idx, _, _, _ = _random_index(rng, n_src=15, n_tgt=15)
        gold = [(f"s{i}", f"t{i}") for i in range(15)]
        rep = evaluate_retrieval(idx, gold, ks=(1,), bootstrap=200, seed=3)
        assert "std@1" in rep and rep["std@1"] >= 0.0
        again = evaluate_retrieval(idx, gold, ks=(1,), bootstrap=200, seed=3)
        assert rep == again

    def test_empty_or_all_oov_gold_rejected(self):
        idx = RetrievalIndex.from_matrices(["s"], ["t"], [[1.0]], [[1.0]],
                                           k_csls=1)
        with pytest.raises(ValidationError):
            evaluate_retrieval(idx, [])
        with pytest.raises(ValidationError):
            evaluate_retrieval(idx, [("nope", "t"), ("s", "nope")])


class TestQueries:
    def test_nn_matches_exhaustive_cosine_sort(self):
        rng = np.random.default_rng(12)
        mapped = rng.normal(size=(5, 4))
        target = rng.normal(size=(20, 4))
        sw = [f"s{i}" for i in range(5)]
        tw = [f"t{i}" for i in range(20)]
        idx = RetrievalIndex.from_matrices(sw, tw, mapped, target, k_csls=2)
        xm, ym = _unit(mapped), _unit(target)
        for i, s in enumerate(sw):
            cos = xm[i] @ ym.T
            order = sorted(range(20), key=lambda j: (-cos[j], j))
            got = nn_query(idx, s, 20)
            assert [w for w, _ in got] == [tw[j] for j in order]
            for (w, sc), j in zip(got, order):
                assert abs(sc - cos[j]) < 1e-12

    def test_unknown_source_raises(self):
        idx = RetrievalIndex.from_matrices(["s"], ["t"], [[1.0]], [[1.0]],
                                           k_csls=1)
        with pytest.raises(UnknownWord):
            csls_query(idx, "zzz", 1)


class TestInduceDictionary:
    def test_one_pair_per_source(self):
        rng = np.random.default_rng(13)
        idx, _, _, _ = _random_index(rng, n_src=10, n_tgt=10)
        out = induce_dictionary(idx, idx.src_words)
        assert len(out) == 10
        assert [s for s, _ in out] == idx.src_words

    def test_threshold_may_empty_the_dictionary(self):
        rng = np.random.default_rng(14)
        idx, _, _, _ = _random_index(rng, n_src=6, n_tgt=6)
        assert induce_dictionary(idx, idx.src_words, threshold=1e9) == []

    def test_empty_source_list_rejected(self):
        rng = np.random.default_rng(15)
        idx, _, _, _ = _random_index(rng)
        with pytest.raises(ValidationError):
            induce_dictionary(idx, [])


class TestBuildIndex:
    def test_alignment_map_applied(self):
        rng = np.random.default_rng(16)
        n, d = 40, 8
        x = rng.normal(size=(n, d))
        q, _ = np.linalg.qr(rng.normal(size=(d, d)))
        words = [f"w{i}" for i in range(n)]
        src = EmbeddingSpace(words, x)
        tgt = EmbeddingSpace(words, x @ q.T)
        amap = bdi.procrustes_iterate(src, tgt,
                                      [(w, w) for w in words[:10]], iters=2)
        idx = build_index(src, tgt, amap, k_csls=5)
        gold = [(w, w) for w in words]
        assert precision_at_k(idx, gold, 1) == 1.0

    def test_without_map_uses_raw_spaces(self):
        rng = np.random.default_rng(17)
        v = rng.normal(size=(10, 4))
        words = [f"w{i}" for i in range(10)]
        idx = build_index(EmbeddingSpace(words, v),
                          EmbeddingSpace(words, v.copy()), None, k_csls=3)
        assert precision_at_k(idx, [(w, w) for w in words], 1) == 1.0
