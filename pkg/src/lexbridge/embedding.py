"""Skip-gram embeddings with negative sampling and optional subword units.

Training is plain SGD at a fixed learning rate, single-threaded and
deterministic for a given seed. Word vectors may be composed from hashed
character n-gram buckets: the representation of a word is the MEAN of its
word-id vector and all of its n-gram bucket vectors, both during training and
in the returned space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, Vocabulary, build_vocab
from .errors import MalformedRow, UnknownWord

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(s: str) -> int:
    h = FNV_OFFSET
    for b in s.encode("utf-8"):
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


def subword_ngrams(word: str, n_min: int = 2, n_max: int = 5) -> list[str]:
    """Character n-grams of '<word>' for n in [n_min, n_max], plus the full
    wrapped word, deduplicated in first-occurrence order."""
    if not word:
        raise ValueError("empty word")
    wrapped = f"<{word}>"
    seen = set()
    grams = []
    for n in range(n_min, n_max + 1):
        for i in range(len(wrapped) - n + 1):
            g = wrapped[i : i + n]
            if g not in seen:
                seen.add(g)
                grams.append(g)
    if wrapped not in seen:
        grams.append(wrapped)
    return grams


@dataclass
class TrainConfig:
    dim: int
    window: int = 5
    epochs: int = 5
    learning_rate: float = 0.1
    negative_sampling_rate: float = 1e-5
    negatives_per_sample: int = 5
    min_count: int = 2
    subword: tuple[int, int] | None = None
    buckets: int = 2**21
    seed: int = 0
    batch_size: int = 512

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.window < 1 or self.epochs < 1:
            raise ValueError("window and epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not 0 < self.negative_sampling_rate <= 1:
            raise ValueError("negative_sampling_rate must be in (0, 1]")


@dataclass
class EmbeddingSpace:
    """Vocabulary rows in descending-frequency order plus one vector each."""

    words: list[str]
    vectors: np.ndarray
    counts: list[int] | None = None
    subword: tuple[int, int, int] | None = None  # (n_min, n_max, buckets)
    epoch_losses: list[float] | None = None
    output_vectors: np.ndarray | None = None
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {w: i for i, w in enumerate(self.words)}
        if len(self.words) != self.vectors.shape[0]:
            raise ValueError("word/vector row mismatch")

    @property
    def dim(self):
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self._index

    def id(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise UnknownWord(word) from None

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.id(word)]


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _subword_rows(vocab: Vocabulary, n_min, n_max, buckets):
    """Row indices composing each word: its own row, then compact rows for
    the distinct FNV-1a buckets of its n-grams. Returns (padded index matrix,
    mask, n_extra_rows)."""
    bucket_row = {}
    rows_per_word = []
    for w in vocab.words:
        rows = [vocab.id(w)]
        seen = set()
        for g in subword_ngrams(w, n_min, n_max):
            b = fnv1a64(g) % buckets
            if b in seen:
                continue
            seen.add(b)
            if b not in bucket_row:
                bucket_row[b] = len(vocab) + len(bucket_row)
            rows.append(bucket_row[b])
        rows_per_word.append(rows)
    width = max(len(r) for r in rows_per_word)
    idx = np.zeros((len(vocab), width), dtype=np.int64)
    mask = np.zeros((len(vocab), width), dtype=bool)
    for i, rows in enumerate(rows_per_word):
        idx[i, : len(rows)] = rows
        mask[i, : len(rows)] = True
    return idx, mask, len(bucket_row)


def _row_mean_step(mat, rows, grads, lr):
    """One step per distinct row: subtract lr times the mean gradient of that
    row within the batch, keeping step size bounded when a row repeats."""
    uniq, inv, cnt = np.unique(rows, return_inverse=True, return_counts=True)
    sums = np.zeros((len(uniq), grads.shape[1]), dtype=grads.dtype)
    np.add.at(sums, inv, grads)
    mat[uniq] -= (lr / cnt)[:, None] * sums


def _epoch_pairs(sent_ids, keep_prob, window, rng):
    centers, contexts = [], []
    for s in sent_ids:
        if keep_prob is not None:
            s = s[rng.random(len(s)) < keep_prob[s]]
        m = len(s)
        if m < 2:
            continue
        b = rng.integers(1, window + 1, size=m)
        for i in range(m):
            lo, hi = max(0, i - b[i]), min(m, i + b[i] + 1)
            ctx = np.concatenate((s[lo:i], s[i + 1 : hi]))
            if len(ctx):
                centers.append(np.full(len(ctx), s[i], dtype=np.int64))
                contexts.append(ctx)
    if not centers:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(centers), np.concatenate(contexts)


def train_skipgram(c: Corpus, cfg: TrainConfig,
                   vocab: Vocabulary | None = None) -> EmbeddingSpace:
    if vocab is None:
        vocab = build_vocab(c, cfg.min_count)
    V, d = len(vocab), cfg.dim
    rng = np.random.default_rng(cfg.seed)

    index = {w: i for i, w in enumerate(vocab.words)}
    sent_ids = [np.array([index[t] for t in s if t in index], dtype=np.int64)
                for s in c.sentences]
    sent_ids = [s for s in sent_ids if len(s)]
    counts = np.array(vocab.counts, dtype=np.float64)
    total = counts.sum()

    # frequent-word subsampling, threshold = negative_sampling_rate
    keep_prob = None
    if cfg.negative_sampling_rate < 1.0:
        keep_prob = np.minimum(
            1.0, np.sqrt(cfg.negative_sampling_rate * total / counts))

    # unigram^0.75 negative-sampling table as a cdf
    neg = counts**0.75
    neg_cdf = np.cumsum(neg / neg.sum())
    neg_cdf[-1] = 1.0  # guard the searchsorted upper edge

    if cfg.subword is not None:
        n_min, n_max = cfg.subword
        comp_idx, comp_mask, n_buckets = _subword_rows(
            vocab, n_min, n_max, cfg.buckets)
        comp_len = comp_mask.sum(axis=1).astype(np.float64)
        rows = V + n_buckets
    else:
        comp_idx = comp_mask = None
        rows = V

    w_in = ((rng.random((rows, d)) - 0.5) / d).astype(np.float64)
    w_out = np.zeros((V, d), dtype=np.float64)
    lr = cfg.learning_rate
    n_neg = cfg.negatives_per_sample
    epoch_losses = []

    for _ in range(cfg.epochs):
        centers, contexts = _epoch_pairs(sent_ids, keep_prob, cfg.window, rng)
        n_pairs = len(centers)
        if n_pairs == 0:
            epoch_losses.append(0.0)
            continue
        perm = rng.permutation(n_pairs)
        negs = np.searchsorted(neg_cdf, rng.random((n_pairs, n_neg)))
        loss_sum = 0.0
        for start in range(0, n_pairs, cfg.batch_size):
            sel = perm[start : start + cfg.batch_size]
            ci, oi, ni = centers[sel], contexts[sel], negs[sel]
            if comp_idx is not None:
                ridx, rmask = comp_idx[ci], comp_mask[ci]
                v = (w_in[ridx] * rmask[:, :, None]).sum(axis=1)
                v /= comp_len[ci][:, None]
            else:
                v = w_in[ci]
            tgt = np.concatenate((oi[:, None], ni), axis=1)  # (B, 1+n_neg)
            u = w_out[tgt]
            s = np.einsum("bd,bnd->bn", v, u)
            p = _sigmoid(s)
            # labels: column 0 positive, rest negative
            g = p.copy()
            g[:, 0] -= 1.0
            loss_sum += -np.log(np.clip(p[:, 0], 1e-12, None)).sum()
            loss_sum += -np.log(np.clip(1 - p[:, 1:], 1e-12, None)).sum()
            gv = np.einsum("bn,bnd->bd", g, u)
            gu = g[:, :, None] * v[:, None, :]
            _row_mean_step(w_out, tgt.reshape(-1), gu.reshape(-1, d), lr)
            if comp_idx is not None:
                share = gv / comp_len[ci][:, None]
                flat = ridx[rmask]
                _row_mean_step(w_in, flat,
                               np.repeat(share, rmask.sum(axis=1), axis=0), lr)
            else:
                _row_mean_step(w_in, ci, gv, lr)
        epoch_losses.append(loss_sum / n_pairs)

    if comp_idx is not None:
        vecs = (w_in[comp_idx] * comp_mask[:, :, None]).sum(axis=1)
        vecs /= comp_len[:, None]
        meta = (cfg.subword[0], cfg.subword[1], cfg.buckets)
    else:
        vecs = w_in[:V].copy()
        meta = None
    return EmbeddingSpace(list(vocab.words), vecs, counts=list(vocab.counts),
                          subword=meta, epoch_losses=epoch_losses,
                          output_vectors=w_out)


def save_vectors(e: EmbeddingSpace, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(e)} {e.dim}\n")
        for w, row in zip(e.words, e.vectors):
            fh.write(w + " " + " ".join(f"{x:.6g}" for x in row) + "\n")


def load_vectors(path) -> EmbeddingSpace:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise MalformedRow(f"bad header in {path}")
        try:
            n, d = int(header[0]), int(header[1])
        except ValueError:
            raise MalformedRow(f"bad header in {path}") from None
        words, vecs = [], np.empty((n, d), dtype=np.float64)
        seen = set()
        for i in range(n):
            parts = fh.readline().split()
            if len(parts) != d + 1:
                raise MalformedRow(f"row {i + 1}: expected {d} floats")
            if parts[0] in seen:
                raise MalformedRow(f"duplicate word {parts[0]!r}")
            seen.add(parts[0])
            words.append(parts[0])
            vecs[i] = [float(x) for x in parts[1:]]
    return EmbeddingSpace(words, vecs)
