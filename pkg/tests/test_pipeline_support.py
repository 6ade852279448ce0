"""BLEU scoring, the replacement baseline, and pipeline configuration."""

import math

import pytest

from lexbridge.errors import ValidationError
from lexbridge.pipeline import (PRESETS, PipelineConfig, manifest_hash,
                                resolve_config)
from lexbridge.smt.baseline import dictionary_replace_baseline
from lexbridge.smt.bleu import corpus_bleu


class TestCorpusBleu:
    def test_perfect_match_is_one(self):
        hyp = [["a", "b", "c", "d", "e"], ["x", "y", "z", "w", "v"]]
        assert corpus_bleu(hyp, [list(s) for s in hyp]) == 1.0

    def test_hand_computed_partial_match(self):
        """One 4-token hypothesis against a 4-token reference sharing a
        3-token prefix: precisions 3/4, 2/3, 1/2, eps for 4-grams; equal
        lengths so no brevity penalty."""
        hyp = [["a", "b", "c", "x"]]
        ref = [["a", "b", "c", "d"]]
        want = math.exp((math.log(3 / 4) + math.log(2 / 3)
                         + math.log(1 / 2) + math.log(1e-9)) / 4)
        assert abs(corpus_bleu(hyp, ref) - want) < 1e-12

    def test_brevity_penalty_applies(self):
        hyp = [["a", "b"]]
        ref = [["a", "b", "c", "d"]]
        short = corpus_bleu(hyp, ref)
        assert short < corpus_bleu([["a", "b", "c", "d"]], ref)
        # bp = exp(1 - 4/2) with unigram/bigram precision 1
        want = math.exp(1 - 2.0) * math.exp(
            (math.log(1.0) * 2 + math.log(1e-9) * 2) / 4)
        assert abs(short - want) < 1e-12

    def test_clipping_counts_each_ngram_once(self):
        # hypothesis longer than reference, so no brevity penalty; the
        # repeated unigram is credited only up to its reference count
        hyp = [["the", "the", "the"]]
        ref = [["the", "cat"]]
        got = corpus_bleu(hyp, ref, max_n=1)
        assert abs(got - 1 / 3) < 1e-12

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            corpus_bleu([["a"]], [["a"], ["b"]])
        with pytest.raises(ValueError):
            corpus_bleu([], [])


class TestReplacementBaseline:
    def test_maps_known_tokens_only(self):
        out = dictionary_replace_baseline({"a": "x", "b": "y"},
                                          ["a", "q", "b", "a"])
        assert out == ["x", "q", "y", "x"]

    def test_single_pass_never_rereplaces(self):
        out = dictionary_replace_baseline({"a": "b", "b": "c"}, ["a", "b"])
        assert out == ["b", "c"]

    def test_pair_list_first_entry_wins(self):
        out = dictionary_replace_baseline([("a", "x"), ("a", "z")], ["a"])
        assert out == ["x"]


def _cfg(**kw):
    base = dict(src_corpus="s.txt", tgt_corpus="t.txt", outdir="out")
    base.update(kw)
    return PipelineConfig(**base)


class TestResolveConfig:
    def test_presets_set_documented_fields(self):
        for name, fields in PRESETS.items():
            cfg = resolve_config(_cfg(preset=name.lower(),
                                      lm_corpus="lm.txt"))
            assert cfg.preset == name
            for key, value in fields.items():
                assert getattr(cfg, key) == value, (name, key)

    def test_unknown_preset_rejected(self):
        with pytest.raises(ValidationError):
            resolve_config(_cfg(preset="Q"))

    def test_anchorless_requires_adversarial(self):
        with pytest.raises(ValidationError):
            resolve_config(_cfg(anchors=False, method="procrustes"))
        cfg = resolve_config(_cfg(anchors=False, method="adversarial"))
        assert cfg.method == "adversarial"

    def test_unknown_method_rejected(self):
        with pytest.raises(ValidationError):
            resolve_config(_cfg(method="magnets"))

    def test_general_lm_without_corpus_falls_back(self):
        cfg = resolve_config(_cfg(lm_source="general"))
        assert cfg.lm_source == "domain"
        assert any("fell back" in n for n in cfg.notes)

    def test_unknown_lm_source_rejected(self):
        with pytest.raises(ValidationError):
            resolve_config(_cfg(lm_source="oracle"))


class TestManifestHash:
    def test_key_order_invariant(self):
        a = {"x": 1, "y": [1, 2], "z": {"a": True}}
        b = {"z": {"a": True}, "y": [1, 2], "x": 1}
        assert manifest_hash(a) == manifest_hash(b)

    def test_value_sensitive(self):
        assert (manifest_hash({"x": 1})
                != manifest_hash({"x": 2}))
