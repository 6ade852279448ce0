"""lexbridge: unsupervised word- and sentence-level translation between two
non-parallel monolingual corpora."""

__version__ = "0.1.0"

from . import bdi, corpus, embedding, retrieval, smt, spectral  # noqa: F401
