"""Beam-search phrase decoder.

Hypotheses are stacked by number of covered source tokens and recombined on
(coverage, LM state); the default distortion limit of 0 yields strictly
monotone segmentations. Source tokens without any table entry pass through
verbatim at a floor phrase log-probability. The model score is
w_phrase * sum(log p_bwd) + w_lm * LM(target, incl. </s>) + w_word * |target|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .phrase_table import PhraseTable, SmtConfig


def score_translation(pt: PhraseTable, lm, src_tokens, tgt_tokens,
                      segmentation, weights=(1.0, 1.0, -0.1),
                      oov_logprob: float = -20.0) -> float:
    """segmentation: ordered list of (source phrase, target phrase) whose
    concatenations reproduce src_tokens and tgt_tokens."""
    src_cat = [t for s, _ in segmentation for t in s]
    tgt_cat = [t for _, t in segmentation for t in t]
    if src_cat != list(src_tokens) or tgt_cat != list(tgt_tokens):
        raise ValueError("segmentation does not cover the sentence pair")
    w_p, w_lm, w_word = weights
    phrase_lp = 0.0
    for s, t in segmentation:
        probs = pt.pair_probs(tuple(s), tuple(t))
        phrase_lp += math.log(probs[1]) if probs else oov_logprob
    lm_lp = lm.sentence_logprob(list(tgt_tokens)) if w_lm else 0.0
    return w_p * phrase_lp + w_lm * lm_lp + w_word * len(tgt_tokens)


@dataclass
class _Hyp:
    score: float
    state: tuple
    covered: tuple  # sorted covered positions (monotone: 0..j-1)
    out: tuple  # produced target tokens
    seg: tuple  # ((src span start, end), target phrase) trace


def _options(pt: PhraseTable, tokens, i, length, cfg: SmtConfig):
    """Translation options for tokens[i:i+length]: (target phrase, log p_bwd)
    capped at cfg.translation_options by descending p_bwd."""
    phrase = tuple(tokens[i : i + length])
    row = pt.candidates(phrase)
    if not row:
        if length == 1:
            return [(phrase, cfg.oov_logprob)]  # pass-through
        return []
    opts = sorted(((t, pb) for t, _, pb in row), key=lambda e: (-e[1], e[0]))
    return [(t, math.log(pb) if pb > 0 else cfg.oov_logprob)
            for t, pb in opts[: cfg.translation_options]]


def decode(pt: PhraseTable, lm, src_tokens, cfg: SmtConfig | None = None,
           distortion_limit: int | None = None, return_trace: bool = False):
    cfg = cfg or SmtConfig()
    if distortion_limit is None:
        distortion_limit = cfg.distortion_limit
    tokens = list(src_tokens)
    n = len(tokens)
    if n == 0:
        raise ValueError("empty sentence")
    w_p, w_lm, w_word = cfg.weights
    max_len = pt.max_len

    span_opts = {}
    for start in range(n):
        for length in range(1, min(max_len, n - start) + 1):
            opts = _options(pt, tokens, start, length, cfg)
            if opts:
                span_opts[(start, start + length)] = opts

    init = _Hyp(0.0, lm.init_state(), (), (), ())
    stacks: list[dict] = [dict() for _ in range(n + 1)]
    stacks[0][(init.covered, init.state)] = init

    for ncov in range(n):
        beam = sorted(stacks[ncov].values(),
                      key=lambda h: (-h.score, h.out))[: cfg.beam]
        for hyp in beam:
            covered = set(hyp.covered)
            leftmost = next(p for p in range(n + 1)
                            if p == n or p not in covered)
            if distortion_limit <= 0:
                starts = [leftmost]
            else:
                starts = [p for p in range(leftmost,
                                           min(n, leftmost + distortion_limit
                                               + 1))
                          if p not in covered]
            for start in starts:
                for length in range(1, max_len + 1):
                    end = start + length
                    if end > n or any(p in covered
                                      for p in range(start, end)):
                        break
                    for tgt_phrase, plp in span_opts.get((start, end), ()):
                        state, lm_lp = lm.advance(hyp.state, tgt_phrase)
                        score = (hyp.score + w_p * plp + w_lm * lm_lp
                                 + w_word * len(tgt_phrase))
                        new_cov = tuple(sorted(covered
                                               | set(range(start, end))))
                        key = (new_cov, state)
                        prev = stacks[ncov + length].get(key)
                        if prev is None or score > prev.score or (
                                score == prev.score
                                and hyp.out + tgt_phrase < prev.out):
                            stacks[ncov + length][key] = _Hyp(
                                score, state, new_cov,
                                hyp.out + tgt_phrase,
                                hyp.seg + (((start, end), tgt_phrase),))

    finals = [(h.score + w_lm * lm.final_logprob(h.state), h)
              for h in stacks[n].values()]
    if not finals:
        raise RuntimeError("decoder produced no complete hypothesis")
    finals.sort(key=lambda sh: (-sh[0], sh[1].out))
    best = finals[0][1]
    out = list(best.out)
    if return_trace:
        return out, list(best.seg)
    return out


def translate_corpus(pt: PhraseTable, lm, sentences,
                     cfg: SmtConfig | None = None,
                     distortion_limit: int | None = None):
    return [decode(pt, lm, s, cfg, distortion_limit) for s in sentences]
