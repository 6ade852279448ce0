"""Corpus BLEU with 4-gram clipping and brevity penalty."""

from __future__ import annotations

import math
from collections import Counter


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(hypotheses, references, max_n: int = 4,
                eps: float = 1e-9) -> float:
    """Standard corpus-level BLEU in [0, 1]; zero n-gram matches floor at eps
    instead of zeroing the whole score."""
    if len(hypotheses) != len(references):
        raise ValueError("hypothesis/reference count mismatch")
    if not hypotheses:
        raise ValueError("empty corpus")
    matches = [0] * max_n
    totals = [0] * max_n
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp, ref = list(hyp), list(ref)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            hc, rc = _ngrams(hyp, n), _ngrams(ref, n)
            matches[n - 1] += sum(min(c, rc[g]) for g, c in hc.items())
            totals[n - 1] += max(len(hyp) - n + 1, 0)
    log_p = 0.0
    for m, t in zip(matches, totals):
        p = m / t if t else 0.0
        log_p += math.log(max(p, eps))
    if hyp_len == 0:
        return 0.0
    bp = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / hyp_len)
    return bp * math.exp(log_p / max_n)
