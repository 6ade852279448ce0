"""Corpus ingestion: tokenization, vocabularies, shared-string anchors.

File conventions: corpora are UTF-8 with one sentence per line and
whitespace-delimited tokens; vocabularies dump as ``word<TAB>count`` sorted by
descending count; anchor sets dump one word per line; word-pair lists
(seed/gold dictionaries) are TSV ``src<TAB>tgt``.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

from .errors import EmptyCorpus, EmptyVocabulary, NoAnchors, UnknownWord


def tokenize(line: str) -> list[str]:
    """Lowercase + whitespace split. Idempotent on its own output."""
    return line.lower().split()


@dataclass
class Corpus:
    sentences: list[list[str]]
    name: str = ""

    def __len__(self):
        return len(self.sentences)

    def token_count(self):
        return sum(len(s) for s in self.sentences)


def load_corpus(path, name=None, strip_pattern=None) -> Corpus:
    """Read a line-per-sentence file.

    strip_pattern: optional regex; tokens fully matching it are dropped
    (placeholder scrubbing). Lines empty after filtering are dropped.
    """
    pat = re.compile(strip_pattern) if strip_pattern else None
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            toks = tokenize(line)
            if pat is not None:
                toks = [t for t in toks if not pat.fullmatch(t)]
            if toks:
                sentences.append(toks)
    if not sentences:
        raise EmptyCorpus(f"no sentences left after filtering: {path}")
    return Corpus(sentences, name=name or str(path))


def corpus_from_text(text: str, name="") -> Corpus:
    sentences = [tokenize(line) for line in text.splitlines()]
    sentences = [s for s in sentences if s]
    if not sentences:
        raise EmptyCorpus("no sentences in text")
    return Corpus(sentences, name=name)


@dataclass
class Vocabulary:
    """Dense-id vocabulary ordered by descending count, ties lexicographic."""

    words: list[str]
    counts: list[int]
    min_count: int = 1
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {w: i for i, w in enumerate(self.words)}

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self._index

    def id(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise UnknownWord(word) from None

    def word(self, i: int) -> str:
        return self.words[i]

    def count(self, word: str) -> int:
        return self.counts[self.id(word)]


def build_vocab(c: Corpus, min_count: int = 2) -> Vocabulary:
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    freq = Counter(t for s in c.sentences for t in s)
    kept = [(w, n) for w, n in freq.items() if n >= min_count]
    if not kept:
        raise EmptyVocabulary(f"no word reaches min_count={min_count}")
    kept.sort(key=lambda wn: (-wn[1], wn[0]))
    return Vocabulary([w for w, _ in kept], [n for _, n in kept], min_count)


def extract_anchors(v1: Vocabulary, v2: Vocabulary,
                    min_count=None, min_length=None) -> list[str]:
    """Words present in both vocabularies, ordered by descending joint
    frequency (count sum over both corpora), ties lexicographic.

    Optional filters: min_count applies to the joint frequency, min_length to
    the word length; both default off.
    """
    if not len(v1) or not len(v2):
        raise EmptyVocabulary("need two non-empty vocabularies")
    shared = set(v1.words) & set(v2.words)
    if min_length:
        shared = {w for w in shared if len(w) >= min_length}
    joint = {w: v1.count(w) + v2.count(w) for w in shared}
    if min_count:
        joint = {w: n for w, n in joint.items() if n >= min_count}
    if not joint:
        raise NoAnchors("vocabularies share no usable words")
    return sorted(joint, key=lambda w: (-joint[w], w))


def save_vocab(v: Vocabulary, path):
    with open(path, "w", encoding="utf-8") as fh:
        for w, n in zip(v.words, v.counts):
            fh.write(f"{w}\t{n}\n")


def load_vocab(path) -> Vocabulary:
    words, counts = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            w, n = line.rstrip("\n").split("\t")
            words.append(w)
            counts.append(int(n))
    if not words:
        raise EmptyVocabulary(path)
    return Vocabulary(words, counts)


def save_anchors(anchors: list[str], path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(anchors) + "\n")


def load_anchors(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def save_pairs(pairs, path):
    with open(path, "w", encoding="utf-8") as fh:
        for s, t in pairs:
            fh.write(f"{s}\t{t}\n")


def load_pairs(path) -> list[tuple[str, str]]:
    """TSV word pairs, duplicates removed, input order kept."""
    seen = set()
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            s, t = line.rstrip("\n").split("\t")[:2]
            if (s, t) not in seen:
                seen.add((s, t))
                pairs.append((s, t))
    return pairs
