"""Interpolated modified Kneser-Ney n-gram language model.

Counting: raw counts at the top order; continuation counts (distinct left
extensions) at lower orders, except that n-grams starting with <s> keep raw
counts since nothing can precede <s>. Discounts D1..D3+ per order come from
counts-of-counts (Y = n1/(n1+2 n2); Di = i - (i+1) Y n_{i+1}/n_i); whenever
n1 or n2 is zero, or n3 is zero for D3+, or the formula yields a
non-positive value, the affected discount falls back to 0.75; each Di is
capped at i. This keeps every interpolation weight strictly positive, so no
conditional probability is ever exactly zero. The unigram level interpolates
with the uniform distribution over the event space (corpus words plus </s>
and <unk>; <s> is never an event). Unseen histories back off fully to the
next shorter history.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter, defaultdict

from ..corpus import Corpus

BOS, EOS, UNK = "<s>", "</s>", "<unk>"


def _discounts(counts: dict) -> tuple[float, float, float]:
    cc = Counter()
    for c in counts.values():
        if c <= 4:
            cc[c] += 1
    n1, n2, n3, n4 = cc[1], cc[2], cc[3], cc[4]
    if n1 == 0 or n2 == 0:
        return 0.75, 0.75, 0.75
    y = n1 / (n1 + 2 * n2)
    d1 = 1 - 2 * y * n2 / n1
    d2 = 2 - 3 * y * n3 / n2
    d3 = 3 - 4 * y * n4 / n3 if n3 > 0 else 0.75
    # a non-positive discount would zero out backoff mass somewhere; fall
    # back rather than let any conditional hit exactly zero
    fixed = []
    for i, d in enumerate((d1, d2, d3), start=1):
        fixed.append(0.75 if d <= 0 else min(d, float(i)))
    return tuple(fixed)


class KneserNeyLM:
    def __init__(self, order, counts, vocab, warning=None):
        self.order = order
        self.counts = counts  # counts[k] : dict gram-tuple(len k) -> count
        self.vocab = vocab  # corpus words (events, no BOS/EOS/UNK)
        self.event_size = len(vocab) + 2  # + EOS, UNK
        self.warning = warning
        self.discounts = {k: _discounts(counts[k]) for k in counts}
        # per history: total count and type counts per discount class
        self.hist_total = {k: defaultdict(float) for k in counts}
        self.hist_types = {k: defaultdict(lambda: [0, 0, 0]) for k in counts}
        for k, grams in counts.items():
            for g, c in grams.items():
                h = g[:-1]
                self.hist_total[k][h] += c
                self.hist_types[k][h][min(int(c), 3) - 1] += 1
        self.hist_total = {k: dict(v) for k, v in self.hist_total.items()}
        self.hist_types = {k: dict(v) for k, v in self.hist_types.items()}
        self._uni_total = sum(counts[1].values())
        self._compile()

    def _compile(self):
        """Flatten the interpolated recursion into backoff-lookup form: one
        stored probability per seen gram plus one weight per seen history.
        P(w|h) = prob[h+(w,)] if stored, else bow.get(h, 1)·P(w|h[1:]),
        identical to the recursive definition and to the ARPA dump."""
        self._cprob = {}
        self._cbow = {}
        for k in range(1, self.order + 1):
            for g in self.counts[k]:
                self._cprob[g] = self._prob(g[-1], g[:-1])
            if k < self.order:
                for h in self.hist_total[k + 1]:
                    self._cbow[h] = self._lambda(k + 1, h)
        for w in self.vocab | {EOS, UNK, BOS}:
            if (w,) not in self._cprob:
                self._cprob[(w,)] = self._prob(w, ())

    def _map(self, w):
        if w == EOS or w == BOS or w in self.vocab:
            return w
        return UNK

    def _lambda(self, k, h):
        d1, d2, d3 = self.discounts[k]
        n1, n2, n3 = self.hist_types[k][h]
        return (d1 * n1 + d2 * n2 + d3 * n3) / self.hist_total[k][h]

    def _prob(self, w, h):
        k = len(h) + 1
        if k == 1:
            tot = self._uni_total
            c = self.counts[1].get((w,), 0)
            d1, d2, d3 = self.discounts[1]
            disc = (d1, d2, d3)[min(c, 3) - 1] if c > 0 else 0.0
            lam = self._lambda(1, ())
            return max(c - disc, 0.0) / tot + lam / self.event_size
        tot = self.hist_total[k].get(h, 0.0)
        if tot == 0.0:
            return self._prob(w, h[1:])
        c = self.counts[k].get(h + (w,), 0)
        d1, d2, d3 = self.discounts[k]
        disc = (d1, d2, d3)[min(c, 3) - 1] if c > 0 else 0.0
        return max(c - disc, 0.0) / tot + self._lambda(k, h) * self._prob(
            w, h[1:])

    def _score(self, w, h):
        """Compiled lookup; w and h must already be vocabulary-mapped."""
        factor = 1.0
        while h:
            p = self._cprob.get(h + (w,))
            if p is not None:
                return factor * p
            factor *= self._cbow.get(h, 1.0)
            h = h[1:]
        return factor * self._cprob[(w,)]

    def prob(self, word, history=()) -> float:
        h = tuple(self._map(w) for w in history)[-(self.order - 1):] \
            if self.order > 1 else ()
        return self._score(self._map(word), h)

    def logprob(self, word, history=()) -> float:
        return math.log(self.prob(word, history))

    # decoding interface ---------------------------------------------------
    def init_state(self):
        return (BOS,) * (self.order - 1)

    def advance(self, state, words):
        """Returns (new state, natural-log prob of the appended words).
        States hold already-mapped words."""
        lp = 0.0
        n = self.order - 1
        for w in words:
            wm = self._map(w)
            lp += math.log(self._score(wm, state))
            state = (state + (wm,))[-n:] if n else ()
        return state, lp

    def final_logprob(self, state):
        return math.log(self._score(EOS, state))

    def sentence_logprob(self, tokens) -> float:
        state = self.init_state()
        state, lp = self.advance(state, tokens)
        return lp + self.final_logprob(state)


def train_lm(c: Corpus, order: int = 4) -> KneserNeyLM:
    if not c.sentences:
        raise ValueError("empty corpus")
    feasible = max(len(s) for s in c.sentences) + 1  # +1 for </s>
    warning = None
    if order > feasible:
        warning = (f"order {order} reduced to {feasible}: "
                   "longest sentence too short")
        warnings.warn(warning)
        order = feasible
    vocab = {t for s in c.sentences for t in s}

    raw = {k: Counter() for k in range(1, order + 1)}
    for s in c.sentences:
        stream = [BOS] * (order - 1) + list(s) + [EOS]
        pad = order - 1
        for pos in range(pad, len(stream)):  # events only, never BOS
            for k in range(1, order + 1):
                raw[k][tuple(stream[pos - k + 1 : pos + 1])] += 1

    counts = {order: dict(raw[order])}
    for k in range(order - 1, 0, -1):
        adjusted = Counter()
        for g in raw[k + 1]:
            adjusted[g[1:]] += 1  # distinct left extensions
        for g, c_raw in raw[k].items():
            if g[0] == BOS:
                adjusted[g] = c_raw
        counts[k] = dict(adjusted)
    return KneserNeyLM(order, counts, vocab, warning)


def save_arpa(lm: KneserNeyLM, path):
    """ARPA dump: log10 interpolated probabilities, backoff weights are the
    log10 interpolation factors of each history."""
    entries = {}
    for k in range(1, lm.order + 1):
        grams = set(lm.counts[k])
        if k == 1:
            uni = {g[0] for g in grams}
            grams = {(w,) for w in uni | lm.vocab | {EOS, UNK, BOS}}
        if k < lm.order:
            # histories of longer grams carry backoff weights, so they need
            # an entry even without a count of their own (<s> <s> ...)
            grams |= set(lm.hist_total[k + 1])
        entries[k] = sorted(grams)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\\data\\\n")
        for k in range(1, lm.order + 1):
            fh.write(f"ngram {k}={len(entries[k])}\n")
        for k in range(1, lm.order + 1):
            fh.write(f"\n\\{k}-grams:\n")
            for g in entries[k]:
                if g[-1] == BOS:
                    lp = -99.0
                else:
                    lp = math.log10(lm._prob(g[-1], g[:-1]))
                line = f"{lp:.12g}\t{' '.join(g)}"
                if k < lm.order and g in lm.hist_total[k + 1]:
                    lam = lm._lambda(k + 1, g)
                    bow = math.log10(lam) if lam > 0 else -99.0
                    line += f"\t{bow:.12g}"
                fh.write(line + "\n")
        fh.write("\n\\end\\\n")


class ArpaModel:
    """Backoff lookup over a loaded ARPA file; mirrors the KneserNeyLM query
    interface."""

    def __init__(self, order, probs, backoffs, vocab):
        self.order = order
        self.probs = {g: 10.0 ** lp for g, lp in probs.items()}
        self.backoffs = {h: 10.0 ** b for h, b in backoffs.items()}
        self.vocab = vocab

    def _map(self, w):
        if w == EOS or w == BOS or w in self.vocab:
            return w
        return UNK

    def _score(self, w, h):
        factor = 1.0
        while h:
            p = self.probs.get(h + (w,))
            if p is not None:
                return factor * p
            factor *= self.backoffs.get(h, 1.0)
            h = h[1:]
        return factor * self.probs[(w,)]

    def prob(self, word, history=()) -> float:
        h = tuple(self._map(w) for w in history)[-(self.order - 1):] \
            if self.order > 1 else ()
        return self._score(self._map(word), h)

    def logprob(self, word, history=()) -> float:
        return math.log(self.prob(word, history))

    init_state = KneserNeyLM.init_state
    advance = KneserNeyLM.advance
    final_logprob = KneserNeyLM.final_logprob
    sentence_logprob = KneserNeyLM.sentence_logprob


def load_arpa(path) -> ArpaModel:
    probs, backoffs = {}, {}
    order = 0
    with open(path, encoding="utf-8") as fh:
        section = 0
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("\\") and "-grams:" in line:
                section = int(line[1:].split("-")[0])
                order = max(order, section)
                continue
            if not line or line.startswith("\\") or line.startswith("ngram"):
                continue
            parts = line.split("\t")
            gram = tuple(parts[1].split())
            probs[gram] = float(parts[0])
            if len(parts) > 2:
                backoffs[gram] = float(parts[2])
    vocab = {g[0] for g in probs if len(g) == 1} - {BOS, EOS, UNK}
    return ArpaModel(order, probs, backoffs, vocab)
