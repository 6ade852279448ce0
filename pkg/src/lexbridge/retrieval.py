"""Word translation over aligned spaces and precision@k evaluation.

CSLS scores penalize hub vectors: score = 2*cos(Wp_i, c_j) - r_T(Wp_i)
- r_S(c_j), where r_T is the mean cosine of a mapped source vector to its
k_csls nearest targets and r_S the symmetric quantity for a target vector.
Ranking ties break toward the lower target id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bdi import AlignmentMap, preprocess_matrix, topk_mean, unit_rows
from .embedding import EmbeddingSpace
from .errors import UnknownWord, ValidationError


@dataclass
class RetrievalIndex:
    src_words: list[str]
    tgt_words: list[str]
    mapped: np.ndarray  # unit rows, source mapped into the shared space
    target: np.ndarray  # unit rows
    r_src: np.ndarray
    r_tgt: np.ndarray
    k_csls: int

    def __post_init__(self):
        self._src_index = {w: i for i, w in enumerate(self.src_words)}

    def src_id(self, word):
        try:
            return self._src_index[word]
        except KeyError:
            raise UnknownWord(word) from None

    @classmethod
    def from_matrices(cls, src_words, tgt_words, mapped, target, k_csls=10):
        mapped = unit_rows(np.asarray(mapped, dtype=np.float64))
        target = unit_rows(np.asarray(target, dtype=np.float64))
        sim = mapped @ target.T
        r_src = topk_mean(sim, k_csls, axis=1)
        r_tgt = topk_mean(sim, k_csls, axis=0)
        return cls(list(src_words), list(tgt_words), mapped, target,
                   r_src, r_tgt, k_csls)


def build_index(src: EmbeddingSpace, tgt: EmbeddingSpace,
                amap: AlignmentMap | None = None,
                k_csls: int = 10) -> RetrievalIndex:
    xp = preprocess_matrix(src.vectors)
    yp = preprocess_matrix(tgt.vectors)
    if amap is not None:
        xp = amap.transform_source(xp)
        yp = amap.transform_target(yp)
    return RetrievalIndex.from_matrices(src.words, tgt.words, xp, yp, k_csls)


def _ranked(scores: np.ndarray, k: int):
    order = np.lexsort((np.arange(len(scores)), -scores))
    return order[:k]


def nn_query(idx: RetrievalIndex, src_word: str, k: int):
    cos = idx.mapped[idx.src_id(src_word)] @ idx.target.T
    return [(idx.tgt_words[j], float(cos[j])) for j in _ranked(cos, k)]


def csls_query(idx: RetrievalIndex, src_word: str, k: int):
    i = idx.src_id(src_word)
    cos = idx.mapped[i] @ idx.target.T
    scores = 2 * cos - idx.r_src[i] - idx.r_tgt
    return [(idx.tgt_words[j], float(scores[j])) for j in _ranked(scores, k)]


_QUERY = {"nn": nn_query, "csls": csls_query}


def _gold_by_source(idx: RetrievalIndex, gold):
    """Group in-vocabulary gold pairs by source word; a pair whose source or
    target is out of vocabulary is skipped. Returns (groups, skipped)."""
    if not gold:
        raise ValidationError("empty gold pair list")
    tgt_set = set(idx.tgt_words)
    groups: dict[str, set] = {}
    skipped = 0
    seen = set()
    for s, t in gold:
        if (s, t) in seen:
            continue
        seen.add((s, t))
        if s not in idx._src_index or t not in tgt_set:
            skipped += 1
            continue
        groups.setdefault(s, set()).add(t)
    return groups, skipped


def precision_at_k(idx: RetrievalIndex, gold, k: int,
                   method: str = "csls") -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    groups, _ = _gold_by_source(idx, gold)
    if not groups:
        raise ValidationError("all gold pairs out of vocabulary")
    query = _QUERY[method]
    hits = sum(
        1 for s, targets in groups.items()
        if targets & {w for w, _ in query(idx, s, k)})
    return hits / len(groups)


def evaluate_retrieval(idx: RetrievalIndex, gold, ks=(1, 5, 10),
                       method: str = "csls", bootstrap: int = 0,
                       seed: int = 0) -> dict:
    """JSON-ready report {p@k..., evaluated, skipped}; optional bootstrap std
    over gold source words (std@k keys)."""
    groups, skipped = _gold_by_source(idx, gold)
    if not groups:
        raise ValidationError("all gold pairs out of vocabulary")
    query = _QUERY[method]
    sources = sorted(groups)
    kmax = max(ks)
    hit_rank = {}
    for s in sources:
        retrieved = [w for w, _ in query(idx, s, kmax)]
        rank = next((r for r, w in enumerate(retrieved)
                     if w in groups[s]), None)
        hit_rank[s] = rank
    report = {"evaluated": len(sources), "skipped": skipped,
              "method": method}
    for k in ks:
        flags = np.array([hit_rank[s] is not None and hit_rank[s] < k
                          for s in sources])
        report[f"p@{k}"] = float(flags.mean())
        if bootstrap:
            rng = np.random.default_rng(seed)
            n = len(flags)
            samples = flags[rng.integers(0, n, size=(bootstrap, n))]
            report[f"std@{k}"] = float(samples.mean(axis=1).std())
    return report


def induce_dictionary(idx: RetrievalIndex, source_words,
                      method: str = "csls", threshold: float | None = None):
    if not source_words:
        raise ValidationError("empty source word list")
    query = _QUERY[method]
    out = []
    for s in source_words:
        (t, score), = query(idx, s, 1)
        if threshold is None or score >= threshold:
            out.append((s, t))
    return out
