"""Phrase tables and their initialization from aligned embedding spaces.

The initial (generation-0) table has single-word phrases only: for each
source word the top CSLS target candidates get softmax probabilities over
scaled cosines. The scale is 1/T by default; invert_temperature=True uses T
itself, which peaks rather than flattens the rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..bdi import AlignmentMap, preprocess_matrix, topk_mean, unit_rows
from ..embedding import EmbeddingSpace

Phrase = tuple[str, ...]


@dataclass
class SmtConfig:
    T: float = 30.0
    invert_temperature: bool = False
    beam: int = 10
    iterations: int = 3
    weights: tuple[float, float, float] = (1.0, 1.0, -0.1)  # phrase, lm, word
    seed: int = 0
    sample_size: int = 2000
    max_phrase_len: int = 4
    candidates: int = 100
    translation_options: int = 20
    oov_logprob: float = -20.0
    distortion_limit: int = 0
    k_csls: int = 10

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("T must be > 0")
        if self.beam < 1:
            raise ValueError("beam must be >= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")


class PhraseTable:
    """source phrase -> [(target phrase, p_fwd, p_bwd), ...].

    Forward probabilities per source phrase sum to 1; rows are sorted by
    descending p_fwd, ties by target phrase.
    """

    def __init__(self, max_len: int = 4):
        self.max_len = max_len
        self.table: dict[Phrase, list[tuple[Phrase, float, float]]] = {}

    def __len__(self):
        return len(self.table)

    def __contains__(self, phrase: Phrase):
        return tuple(phrase) in self.table

    def sources(self):
        return self.table.keys()

    def candidates(self, phrase: Phrase):
        return self.table.get(tuple(phrase), [])

    def set_row(self, src: Phrase, entries):
        self.table[tuple(src)] = sorted(
            entries, key=lambda e: (-e[1], e[0]))

    def pair_probs(self, src: Phrase, tgt: Phrase):
        for t, pf, pb in self.candidates(src):
            if t == tuple(tgt):
                return pf, pb
        return None

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for src in sorted(self.table):
                for tgt, pf, pb in self.table[src]:
                    fh.write(f"{' '.join(src)} ||| {' '.join(tgt)} ||| "
                             f"{pf:.10g} {pb:.10g}\n")

    @classmethod
    def load(cls, path, max_len: int = 4) -> "PhraseTable":
        pt = cls(max_len)
        rows: dict[Phrase, list] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                src, tgt, probs = (p.strip() for p in line.split("|||"))
                pf, pb = (float(x) for x in probs.split())
                rows.setdefault(tuple(src.split()), []).append(
                    (tuple(tgt.split()), pf, pb))
        for src, entries in rows.items():
            pt.set_row(src, entries)
        return pt


def init_phrase_table(amap: AlignmentMap, src: EmbeddingSpace,
                      tgt: EmbeddingSpace,
                      cfg: SmtConfig | None = None) -> PhraseTable:
    """Generation-0 table over single words.

    Candidates per source word are its top CSLS targets; forward
    probabilities are a softmax of scaled cosines over those candidates,
    backward probabilities mirror it per target (the pair's own term is added
    to a target's denominator when the source is outside the target's own
    candidate set, keeping values in (0, 1))."""
    cfg = cfg or SmtConfig()
    if src.dim != tgt.dim:
        raise ValueError("dimension mismatch between spaces")
    xm = unit_rows(amap.transform_source(preprocess_matrix(src.vectors)))
    ym = unit_rows(amap.transform_target(preprocess_matrix(tgt.vectors)))
    cos = xm @ ym.T
    r_src = topk_mean(cos, cfg.k_csls, axis=1)
    r_tgt = topk_mean(cos, cfg.k_csls, axis=0)
    csls = 2 * cos - r_src[:, None] - r_tgt[None, :]
    scale = cfg.T if cfg.invert_temperature else 1.0 / cfg.T
    n_src, n_tgt = cos.shape
    ncand = min(cfg.candidates, n_tgt)

    ids = np.arange(n_tgt)
    fwd_cand = [ids[np.lexsort((ids, -csls[i]))[:ncand]]
                for i in range(n_src)]

    # per-target mirrored candidate sets and denominators
    sids = np.arange(n_src)
    ncand_b = min(cfg.candidates, n_src)
    bwd_denoms = np.empty(n_tgt)
    bwd_members: list[set] = []
    for j in range(n_tgt):
        cand = sids[np.lexsort((sids, -csls[:, j]))[:ncand_b]]
        bwd_denoms[j] = np.exp(scale * cos[cand, j]).sum()
        bwd_members.append(set(cand.tolist()))

    pt = PhraseTable(cfg.max_phrase_len)
    for i in range(n_src):
        cand = fwd_cand[i]
        logits = scale * cos[i, cand]
        ex = np.exp(logits - logits.max())
        pf = ex / ex.sum()
        entries = []
        for j, p in zip(cand, pf):
            num = np.exp(scale * cos[i, j])
            denom = bwd_denoms[j]
            if i not in bwd_members[j]:
                denom = denom + num
            entries.append(((tgt.words[j],), float(p), float(num / denom)))
        pt.set_row((src.words[i],), entries)
    return pt
