"""Isospectrality score between two embedding spaces.

Each space yields a g-nearest-neighbor graph by cosine similarity (directed,
then symmetrized); the score is the summed squared difference of the largest k
Laplacian eigenvalues, with k chosen per graph as the smallest k whose top-k
eigenvalue mass stays below 90% of the spectrum total, then minimized across
the two graphs. Lower score = more isomorphic spaces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddingSpace


@dataclass
class NNGraph:
    nodes: list[str]
    adjacency: np.ndarray  # symmetric 0/1, zero diagonal
    g: int


@dataclass
class EigScore:
    score: float
    k_used: int


def build_nn_graph(e: EmbeddingSpace, g: int = 10,
                   subset: list[str] | None = None) -> NNGraph:
    if subset is not None:
        ids = [e.id(w) for w in subset]
        nodes = list(subset)
        vecs = e.vectors[ids]
    else:
        nodes = list(e.words)
        vecs = e.vectors
    n = len(nodes)
    if n < 2:
        raise ValueError("need at least 2 nodes")
    if g < 1 or g >= n:
        raise ValueError(f"g must satisfy 1 <= g < {n}")
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    unit = vecs / norms
    sim = unit @ unit.T
    np.fill_diagonal(sim, -np.inf)
    nn = np.argsort(-sim, axis=1, kind="stable")[:, :g]
    a = np.zeros((n, n), dtype=np.int8)
    rows = np.repeat(np.arange(n), g)
    a[rows, nn.reshape(-1)] = 1
    a = np.maximum(a, a.T)
    np.fill_diagonal(a, 0)
    return NNGraph(nodes, a, g)


def laplacian_eigenvalues(graph: NNGraph) -> np.ndarray:
    a = graph.adjacency.astype(np.float64)
    if not np.isfinite(a).all():
        raise ValueError("non-finite adjacency")
    lap = np.diag(a.sum(axis=1)) - a
    eigs = np.linalg.eigvalsh(lap)
    return np.sort(eigs)[::-1]  # descending


def _select_k(eigs: np.ndarray) -> int:
    """Smallest k with sum(largest k) < 0.9 * sum(all); 1 if none qualifies."""
    total = eigs.sum()
    cum = np.cumsum(eigs)
    hits = np.nonzero(cum < 0.9 * total)[0]
    return int(hits[0]) + 1 if len(hits) else 1


def eigenvector_score(g1: NNGraph, g2: NNGraph) -> EigScore:
    e1, e2 = laplacian_eigenvalues(g1), laplacian_eigenvalues(g2)
    k = min(_select_k(e1), _select_k(e2))
    k = min(k, len(e1), len(e2))
    diff = e1[:k] - e2[:k]
    return EigScore(float(np.dot(diff, diff)), k)
