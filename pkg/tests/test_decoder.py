"""Beam decoder contracts: copy fixed point, exhaustive equality, traces."""

import itertools
import math

import pytest

from lexbridge.corpus import Corpus
from lexbridge.smt.decoder import decode, score_translation, translate_corpus
from lexbridge.smt.lm import train_lm
from lexbridge.smt.phrase_table import PhraseTable, SmtConfig


def _identity_table(words):
    pt = PhraseTable()
    for w in words:
        pt.set_row((w,), [((w,), 1.0, 1.0)])
    return pt


def _toy():
    """Four-word source side; 'd' has no table row and must pass through."""
    pt = PhraseTable()
    pt.set_row(("a",), [(("x",), 0.6, 0.6), (("y",), 0.4, 0.4)])
    pt.set_row(("b",), [(("y",), 0.7, 0.7), (("z",), 0.3, 0.3)])
    pt.set_row(("c",), [(("z",), 1.0, 0.8)])
    pt.set_row(("a", "b"), [(("x", "y"), 0.55, 0.45), (("z",), 0.45, 0.2)])
    pt.set_row(("b", "c"), [(("y", "z"), 1.0, 0.65)])
    lm = train_lm(Corpus([["x", "y"], ["y", "z"], ["x", "y", "z"],
                          ["z"], ["y", "y"], ["x", "z", "x"]]), order=2)
    return pt, lm


def _exhaustive(pt, lm, toks, cfg):
    """Enumerate every monotone segmentation and candidate choice without
    recombination; best score, ties to the smaller output sequence."""
    n = len(toks)
    w_p, w_lm, w_word = cfg.weights
    best = [None]

    def options(i, length):
        phrase = tuple(toks[i:i + length])
        row = pt.candidates(phrase)
        if row:
            opts = sorted(((t, pb) for t, _, pb in row),
                          key=lambda e: (-e[1], e[0]))
            return [(t, math.log(pb)) for t, pb
                    in opts[:cfg.translation_options]]
        if length == 1:
            return [(phrase, cfg.oov_logprob)]
        return []

    def rec(i, state, score, out, seg):
        if i == n:
            total = score + w_lm * lm.final_logprob(state)
            cand = (total, out, seg)
            if (best[0] is None or total > best[0][0] + 1e-12
                    or (abs(total - best[0][0]) <= 1e-12
                        and out < best[0][1])):
                best[0] = cand
            return
        for length in range(1, min(pt.max_len, n - i) + 1):
            for tgt, plp in options(i, length):
                st, lm_lp = lm.advance(state, tgt)
                rec(i + length, st,
                    score + w_p * plp + w_lm * lm_lp + w_word * len(tgt),
                    out + tgt, seg + (((i, i + length), tgt),))

    rec(0, lm.init_state(), 0.0, (), ())
    return best[0]


class TestCopyFixedPoint:
    def test_identity_table_copies_input(self):
        words = ["alpha", "beta", "gamma", "delta"]
        pt = _identity_table(words)
        lm = train_lm(Corpus([["alpha", "beta"], ["gamma", "delta"],
                              ["beta", "beta", "alpha"]]), order=3)
        for toks in [["alpha"], ["beta", "alpha"],
                     ["gamma", "delta", "alpha", "alpha", "beta"]]:
            assert decode(pt, lm, toks) == toks

    def test_word_substitution_cipher(self):
        key = {"p0": "c0", "p1": "c1", "p2": "c2"}
        pt = PhraseTable()
        for s, t in key.items():
            pt.set_row((s,), [((t,), 1.0, 1.0)])
        lm = train_lm(Corpus([["c0", "c1"], ["c2", "c0"],
                              ["c1", "c2", "c0"]]), order=2)
        assert decode(pt, lm, ["p2", "p0", "p1"]) == ["c2", "c0", "c1"]


class TestExhaustiveEquality:
    def test_beam_matches_enumeration_up_to_four_tokens(self):
        pt, lm = _toy()
        cfg = SmtConfig(beam=10)
        checked = 0
        for n in range(1, 5):
            for toks in itertools.product("abcd", repeat=n):
                toks = list(toks)
                want_score, want_out, _ = _exhaustive(pt, lm, toks, cfg)
                out, trace = decode(pt, lm, toks, cfg, return_trace=True)
                assert tuple(out) == want_out, f"sentence {toks}"
                seg = [(tuple(toks[s:e]), t) for (s, e), t in trace]
                got_score = score_translation(
                    pt, lm, toks, out, seg, weights=cfg.weights,
                    oov_logprob=cfg.oov_logprob)
                assert abs(got_score - want_score) < 1e-9
                checked += 1
        assert checked == 4 + 16 + 64 + 256

    def test_enumerator_agrees_with_score_translation(self):
        # guards the oracle itself: incremental scoring must equal the
        # whole-sentence formula on the winning leaf
        pt, lm = _toy()
        cfg = SmtConfig(beam=10)
        for toks in (["a", "b", "c"], ["d", "a"], ["b", "b", "d", "c"]):
            score, out, seg = _exhaustive(pt, lm, toks, cfg)
            pairs = [(tuple(toks[s:e]), t) for (s, e), t in seg]
            direct = score_translation(pt, lm, toks, list(out), pairs,
                                       weights=cfg.weights,
                                       oov_logprob=cfg.oov_logprob)
            assert abs(score - direct) < 1e-9


class TestTrace:
    def test_monotone_contiguous_cover(self):
        pt, lm = _toy()
        toks = ["a", "b", "c", "d", "a", "c"]
        out, trace = decode(pt, lm, toks, SmtConfig(beam=10),
                            return_trace=True)
        spans = [sp for sp, _ in trace]
        assert spans[0][0] == 0
        assert spans[-1][1] == len(toks)
        for (_, e1), (s2, _) in zip(spans, spans[1:]):
            assert e1 == s2
        produced = [t for _, tp in trace for t in tp]
        assert produced == out

    def test_oov_passes_through_at_floor(self):
        pt, lm = _toy()
        out, trace = decode(pt, lm, ["d"], SmtConfig(beam=10),
                            return_trace=True)
        assert out == ["d"]
        assert trace == [((0, 1), ("d",))]


class TestScoreTranslation:
    def test_two_phrase_hand_sum(self):
        pt, lm = _toy()
        seg = [(("a",), ("x",)), (("b",), ("y",))]
        got = score_translation(pt, lm, ["a", "b"], ["x", "y"], seg,
                                weights=(1.0, 1.0, -0.1))
        want = (math.log(0.6) + math.log(0.7)
                + lm.sentence_logprob(["x", "y"]) - 0.1 * 2)
        assert abs(got - want) < 1e-12

    def test_unknown_pair_uses_floor(self):
        pt, lm = _toy()
        seg = [(("d",), ("d",))]
        got = score_translation(pt, lm, ["d"], ["d"], seg,
                                weights=(1.0, 0.0, 0.0), oov_logprob=-20.0)
        assert got == -20.0

    def test_bad_segmentation_rejected(self):
        pt, lm = _toy()
        with pytest.raises(ValueError):
            score_translation(pt, lm, ["a", "b"], ["x"],
                              [(("a",), ("x",))])

    def test_lm_weight_zero_maximizes_backward_logs(self):
        pt, lm = _toy()
        cfg = SmtConfig(beam=10, weights=(1.0, 0.0, 0.0))
        # per-word argmax of p_bwd: a->x (0.6 vs 0.4), b->y (0.7 vs 0.3);
        # the joint phrase a b -> x y offers only 0.45
        assert decode(pt, lm, ["a", "b"], cfg) == ["x", "y"]


class TestEdges:
    def test_empty_sentence_rejected(self):
        pt, lm = _toy()
        with pytest.raises(ValueError):
            decode(pt, lm, [])

    def test_exact_tie_breaks_to_smaller_output(self):
        pt = PhraseTable()
        pt.set_row(("a",), [(("p",), 0.5, 0.5), (("q",), 0.5, 0.5)])
        lm = train_lm(Corpus([["p"], ["q"]]), order=2)
        assert decode(pt, lm, ["a"], SmtConfig(beam=10)) == ["p"]

    def test_translate_corpus_maps_each_sentence(self):
        pt, lm = _toy()
        sents = [["a"], ["b", "c"]]
        outs = translate_corpus(pt, lm, sents, SmtConfig(beam=10))
        assert outs == [decode(pt, lm, s, SmtConfig(beam=10))
                        for s in sents]
