"""Iterative back-translation.

One iteration runs both directions: translate a sampled source batch with the
current forward system and estimate a backward table from the synthetic
pairs, then translate a sampled target batch with that backward system and
estimate a new forward table. Word alignments inside phrase extraction are
the intersection of argmax links (forward by p_fwd, reverse by p_bwd) from
the table that produced the synthetic data; phrase pairs follow the standard
consistency rule with extension over unaligned boundary words. Language
models stay fixed across iterations. Re-estimated tables keep rows of the
previous table for source phrases they would otherwise lose, so coverage
never shrinks. Reordering stays disabled during the first iteration.
"""

from __future__ import annotations

from collections import Counter, defaultdict

import numpy as np

from ..corpus import Corpus
from ..errors import ValidationError
from .decoder import decode
from .phrase_table import PhraseTable, SmtConfig


def word_align(pt: PhraseTable, src_tokens, tgt_tokens):
    """Intersection of argmax links over single-word table entries.

    Forward: each source position links to the target position maximizing
    p_fwd; reverse: each target position links to the source position
    maximizing p_bwd. Probability ties go to the closest position (then the
    lowest), so repeated words pair up one-to-one instead of collapsing onto
    the first occurrence."""
    pairs = {}
    for s in set(src_tokens):
        for t, pf, pb in pt.candidates((s,)):
            pairs[(s, t[0])] = (pf, pb)
    fwd = set()
    for i, s in enumerate(src_tokens):
        best = max(
            ((pairs[(s, t)][0], -abs(i - j), -j)
             for j, t in enumerate(tgt_tokens) if (s, t) in pairs),
            default=None)
        if best:
            fwd.add((i, -best[2]))
    rev = set()
    for j, t in enumerate(tgt_tokens):
        best = max(
            ((pairs[(s, t)][1], -abs(i - j), -i)
             for i, s in enumerate(src_tokens) if (s, t) in pairs),
            default=None)
        if best:
            rev.add((-best[2], j))
    return sorted(fwd & rev)


def extract_phrases(src_tokens, tgt_tokens, links, max_len: int = 4):
    """Consistent phrase pairs up to max_len tokens per side, with extension
    over unaligned target boundary words."""
    n, m = len(src_tokens), len(tgt_tokens)
    aligned_tgt = {j for _, j in links}
    out = []
    for i1 in range(n):
        for i2 in range(i1, min(i1 + max_len, n)):
            tps = [j for i, j in links if i1 <= i <= i2]
            if not tps:
                continue
            j1, j2 = min(tps), max(tps)
            if any(not (i1 <= i <= i2) for i, j in links if j1 <= j <= j2):
                continue
            js = j1
            while True:
                je = j2
                while True:
                    if je - js < max_len:
                        out.append((tuple(src_tokens[i1 : i2 + 1]),
                                    tuple(tgt_tokens[js : je + 1])))
                    je += 1
                    if je >= m or je in aligned_tgt:
                        break
                js -= 1
                if js < 0 or js in aligned_tgt:
                    break
    return out


def train_table_from_pairs(pairs, align_table: PhraseTable,
                           max_len: int = 4) -> PhraseTable:
    """Relative-frequency phrase table from (source sentence, target
    sentence) pairs, aligned with align_table's argmax links."""
    joint = Counter()
    for src, tgt in pairs:
        links = word_align(align_table, src, tgt)
        for sp, tp in extract_phrases(src, tgt, links, max_len):
            joint[(sp, tp)] += 1
    src_tot = defaultdict(int)
    tgt_tot = defaultdict(int)
    for (sp, tp), c in joint.items():
        src_tot[sp] += c
        tgt_tot[tp] += c
    rows = defaultdict(list)
    for (sp, tp), c in joint.items():
        rows[sp].append((tp, c / src_tot[sp], c / tgt_tot[tp]))
    pt = PhraseTable(max_len)
    for sp, entries in rows.items():
        pt.set_row(sp, entries)
    return pt


def _swap_table(pt: PhraseTable) -> PhraseTable:
    """Mirror a table's direction, renormalizing forward probabilities."""
    rows = defaultdict(list)
    for sp, entries in pt.table.items():
        for tp, pf, pb in entries:
            rows[tp].append((sp, pb, pf))
    out = PhraseTable(pt.max_len)
    for sp, entries in rows.items():
        tot = sum(pf for _, pf, _ in entries)
        out.set_row(sp, [(tp, pf / tot if tot else 0.0, pb)
                         for tp, pf, pb in entries])
    return out


def _merge_missing(new: PhraseTable, old: PhraseTable) -> PhraseTable:
    for sp, entries in old.table.items():
        if sp not in new.table:
            new.table[sp] = list(entries)
    return new


def _sample(sentences, size, rng):
    if not sentences:
        raise ValidationError("empty corpus to sample from")
    if size >= len(sentences):
        return list(sentences)
    idx = rng.choice(len(sentences), size=size, replace=False)
    return [sentences[i] for i in sorted(idx)]


def back_translate_loop(src_corpus: Corpus, tgt_corpus: Corpus,
                        pt0: PhraseTable, lm_src, lm_tgt,
                        cfg: SmtConfig | None = None):
    """Returns (final forward table, list of (forward, backward) tables per
    iteration). iterations=0 returns (pt0, [])."""
    cfg = cfg or SmtConfig()
    rng = np.random.default_rng(cfg.seed)
    fwd = pt0
    history = []
    for it in range(cfg.iterations):
        dist = 0 if it == 0 else cfg.distortion_limit
        src_batch = _sample(src_corpus.sentences, cfg.sample_size, rng)
        if not src_batch:
            raise ValidationError("empty sampled source batch")
        synthetic = [(decode(fwd, lm_tgt, s, cfg, distortion_limit=dist), s)
                     for s in src_batch]
        bwd = train_table_from_pairs(
            synthetic, _swap_table(fwd), cfg.max_phrase_len)
        bwd = _merge_missing(bwd, _swap_table(fwd))

        tgt_batch = _sample(tgt_corpus.sentences, cfg.sample_size, rng)
        if not tgt_batch:
            raise ValidationError("empty sampled target batch")
        synthetic = [(decode(bwd, lm_src, t, cfg, distortion_limit=dist), t)
                     for t in tgt_batch]
        new_fwd = train_table_from_pairs(
            synthetic, _swap_table(bwd), cfg.max_phrase_len)
        fwd = _merge_missing(new_fwd, fwd)
        history.append((fwd, bwd))
    return fwd, history
