"""Bilingual dictionary induction: linear maps between embedding spaces.

Three fitting routes over the same preprocessing (unit-normalize, mean-center,
re-normalize each space):

- anchored Procrustes, iterated with CSLS dictionary re-induction;
- anchored self-learning with whitening and symmetric re-weighting, updating
  the dictionary bidirectionally until it stops changing;
- anchor-free adversarial fitting of a near-orthogonal generator against an
  MLP discriminator, followed by Procrustes refinement.

Maps apply to row vectors as ``x @ W.T``. Self-learning produces a pair
(W, W_Y) mapping both spaces into a shared space; the other methods map the
source into the target space (W_Y absent).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embedding import EmbeddingSpace
from .errors import ValidationError


def unit_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return m / norms


def preprocess_matrix(v: np.ndarray) -> np.ndarray:
    """unit-normalize -> mean-center -> re-normalize (copy)."""
    x = unit_rows(np.asarray(v, dtype=np.float64))
    x = x - x.mean(axis=0)
    return unit_rows(x)


def topk_mean(sim: np.ndarray, k: int, axis: int = 1) -> np.ndarray:
    k = min(k, sim.shape[axis])
    part = np.partition(sim, sim.shape[axis] - k, axis=axis)
    sl = [slice(None)] * sim.ndim
    sl[axis] = slice(sim.shape[axis] - k, None)
    return part[tuple(sl)].mean(axis=axis)


def csls_matrix(xm: np.ndarray, ym: np.ndarray, k: int = 10) -> np.ndarray:
    """CSLS scores 2*cos - r_T - r_S for every (source row, target row)."""
    sim = unit_rows(xm) @ unit_rows(ym).T
    r_t = topk_mean(sim, k, axis=1)  # per source: mean cos to k NN targets
    r_s = topk_mean(sim, k, axis=0)  # per target: mean cos to k NN sources
    return 2 * sim - r_t[:, None] - r_s[None, :]


def induce_pairs(xm, ym, k=10, bidirectional=False):
    """Top-1 CSLS dictionary as (pairs, mean forward score). argmax ties
    resolve to the lowest target id."""
    scores = csls_matrix(xm, ym, k)
    fwd = scores.argmax(axis=1)
    mean_score = float(scores[np.arange(len(fwd)), fwd].mean())
    pairs = {(i, int(j)) for i, j in enumerate(fwd)}
    if bidirectional:
        bwd = scores.argmax(axis=0)
        pairs |= {(int(i), j) for j, i in enumerate(bwd)}
    return sorted(pairs), mean_score


@dataclass
class AlignmentMap:
    W: np.ndarray
    W_Y: np.ndarray | None = None
    method: str = "procrustes"
    orth_residual: float = 0.0
    dictionary: list[tuple[str, str]] | None = None
    converged: bool = True
    info: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.W.shape[0]

    def transform_source(self, x: np.ndarray) -> np.ndarray:
        return x @ self.W.T

    def transform_target(self, y: np.ndarray) -> np.ndarray:
        return y if self.W_Y is None else y @ self.W_Y.T


def orthogonality_residual(w: np.ndarray) -> float:
    d = w.shape[0]
    return float(np.linalg.norm(w.T @ w - np.eye(d)))


def procrustes_fit(x: np.ndarray, y: np.ndarray) -> AlignmentMap:
    """Orthogonal W minimizing ||W X - Y||_F for d x k anchor matrices
    (anchor vectors as columns): W = U V^T with U S V^T = svd(Y X^T)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("anchor matrices must share shape")
    if x.ndim != 2 or x.shape[1] < 1:
        raise ValueError("need d x k matrices with k >= 1")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("non-finite anchor matrix")
    u, _, vt = np.linalg.svd(y @ x.T)
    w = u @ vt
    return AlignmentMap(w, method="procrustes",
                        orth_residual=orthogonality_residual(w))


def _seed_ids(src: EmbeddingSpace, tgt: EmbeddingSpace, seed):
    if not seed:
        raise ValidationError("empty seed dictionary")
    si = np.array([src.id(s) for s, _ in seed], dtype=np.int64)
    ti = np.array([tgt.id(t) for _, t in seed], dtype=np.int64)
    return si, ti


def procrustes_iterate(src: EmbeddingSpace, tgt: EmbeddingSpace,
                       seed: list[tuple[str, str]], iters: int = 5,
                       csls_k: int = 10) -> AlignmentMap:
    """Alternate orthogonal fitting with CSLS dictionary re-induction.

    iters=0 degenerates to a single fit on the seed. The returned map carries
    the final induced dictionary (top-1 CSLS per source word).
    """
    si, ti = _seed_ids(src, tgt, seed)
    x = preprocess_matrix(src.vectors)
    y = preprocess_matrix(tgt.vectors)
    w = procrustes_fit(x[si].T, y[ti].T).W
    for _ in range(iters):
        pairs, _ = induce_pairs(x @ w.T, y, k=csls_k)
        si = np.array([i for i, _ in pairs])
        ti = np.array([j for _, j in pairs])
        w = procrustes_fit(x[si].T, y[ti].T).W
    pairs, mean_score = induce_pairs(x @ w.T, y, k=csls_k)
    words = [(src.words[i], tgt.words[j]) for i, j in pairs]
    return AlignmentMap(w, method="procrustes",
                        orth_residual=orthogonality_residual(w),
                        dictionary=words, info={"mean_csls": mean_score})


def _whitening(z: np.ndarray) -> np.ndarray:
    _, s, vt = np.linalg.svd(z, full_matrices=False)
    s = np.maximum(s, 1e-12 * max(s[0], 1e-300))
    return vt.T @ np.diag(1.0 / s) @ vt


def self_learning_fit(src: EmbeddingSpace, tgt: EmbeddingSpace,
                      seed: list[tuple[str, str]], max_iters: int = 50,
                      csls_k: int = 10) -> AlignmentMap:
    """Whitened orthogonal fit with symmetric re-weighting, alternated with a
    bidirectional CSLS dictionary update until the dictionary is stable.

    Whitening is skipped when the current dictionary has fewer rows than the
    dimensionality (the sample covariance would be singular). Non-convergence
    within max_iters returns the best-scoring state with converged=False.
    """
    si, ti = _seed_ids(src, tgt, seed)
    x = preprocess_matrix(src.vectors)
    y = preprocess_matrix(tgt.vectors)
    d = x.shape[1]
    eye = np.eye(d)
    best = None
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iters + 1):
        cur = sorted(zip(si.tolist(), ti.tolist()))
        if len(si) >= d:
            wx1, wy1 = _whitening(x[si]), _whitening(y[ti])
        else:
            wx1 = wy1 = eye
        xw, yw = x @ wx1, y @ wy1
        u, s, vt = np.linalg.svd(xw[si].T @ yw[ti])
        sq = np.sqrt(s)
        xm = (xw @ u) * sq
        ym = (yw @ vt.T) * sq
        pairs, mean_score = induce_pairs(xm, ym, k=csls_k, bidirectional=True)
        mx = (wx1 @ u) * sq
        my = (wy1 @ vt.T) * sq
        if best is None or mean_score > best[0]:
            best = (mean_score, mx, my, pairs)
        if pairs == cur:
            converged = True
            best = (mean_score, mx, my, pairs)
            break
        si = np.array([i for i, _ in pairs])
        ti = np.array([j for _, j in pairs])
    mean_score, mx, my, pairs = best
    words = [(src.words[i], tgt.words[j]) for i, j in pairs]
    return AlignmentMap(mx.T, W_Y=my.T, method="selflearn",
                        orth_residual=orthogonality_residual(mx.T),
                        dictionary=words, converged=converged,
                        info={"mean_csls": mean_score, "iterations": n_iter})


@dataclass
class AdvConfig:
    hidden: int = 2048
    lr_start: float = 0.1
    lr_floor: float = 1e-6
    lr_decay: float = 0.98
    top_freq: int = 1000
    epochs: int = 50
    batch_size: int = 32
    steps_per_epoch: int | None = None
    smoothing: float = 0.1
    beta: float = 0.01
    refine_iters: int = 5
    csls_k: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.lr_floor >= self.lr_start:
            raise ValueError("lr_floor must be below lr_start")
        if self.top_freq < 1:
            raise ValueError("top_freq must be >= 1")


class _Discriminator:
    """Two hidden layers, leaky ReLU (0.2), sigmoid output; manual backprop."""

    LEAK = 0.2

    def __init__(self, d, hidden, rng):
        def init(n_out, n_in):
            a = 1.0 / np.sqrt(n_in)
            return rng.uniform(-a, a, size=(n_out, n_in))

        self.w = [init(hidden, d), init(hidden, hidden), init(1, hidden)]
        self.b = [np.zeros(hidden), np.zeros(hidden), np.zeros(1)]

    def forward(self, x):
        z1 = x @ self.w[0].T + self.b[0]
        a1 = np.where(z1 > 0, z1, self.LEAK * z1)
        z2 = a1 @ self.w[1].T + self.b[1]
        a2 = np.where(z2 > 0, z2, self.LEAK * z2)
        z3 = (a2 @ self.w[2].T + self.b[2]).reshape(-1)
        return z3, (x, z1, a1, z2, a2)

    def backward(self, cache, dz3, lr=None):
        """dz3 = dLoss/dlogit per sample. Updates parameters when lr is
        given; always returns dLoss/dinput."""
        x, z1, a1, z2, a2 = cache
        n = len(dz3)
        dz3 = dz3.reshape(-1, 1)
        gw3 = dz3.T @ a2 / n
        gb3 = dz3.mean(axis=0)
        da2 = dz3 @ self.w[2]
        dz2 = da2 * np.where(z2 > 0, 1.0, self.LEAK)
        gw2 = dz2.T @ a1 / n
        gb2 = dz2.mean(axis=0)
        da1 = dz2 @ self.w[1]
        dz1 = da1 * np.where(z1 > 0, 1.0, self.LEAK)
        gw1 = dz1.T @ x / n
        gb1 = dz1.mean(axis=0)
        dx = dz1 @ self.w[0]
        if lr is not None:
            for w, g in zip(self.w, (gw1, gw2, gw3)):
                w -= lr * g
            for b, g in zip(self.b, (gb1, gb2, gb3)):
                b -= lr * g
        return dx


def _bce(logits, targets):
    p = np.clip(1.0 / (1.0 + np.exp(-logits)), 1e-9, 1 - 1e-9)
    loss = -(targets * np.log(p) + (1 - targets) * np.log(1 - p)).mean()
    return loss, p - targets  # gradient wrt logits (per-sample, pre-mean)


def adversarial_fit(src: EmbeddingSpace, tgt: EmbeddingSpace,
                    cfg: AdvConfig | None = None) -> AlignmentMap:
    """Anchor-free alignment: a generator W maps source vectors so an MLP
    discriminator cannot tell them from target vectors; W is re-orthogonalized
    after every generator step and the best epoch is kept by mean CSLS of the
    induced dictionary, then refined with Procrustes iterations.
    """
    cfg = cfg or AdvConfig()
    if cfg.top_freq > min(len(src), len(tgt)):
        raise ValueError("top_freq exceeds a vocabulary size")
    d = src.dim
    if tgt.dim != d:
        raise ValueError("dimension mismatch")
    rng = np.random.default_rng(cfg.seed)
    x = preprocess_matrix(src.vectors)
    y = preprocess_matrix(tgt.vectors)
    xs, ys = x[: cfg.top_freq], y[: cfg.top_freq]

    disc = _Discriminator(d, cfg.hidden, rng)
    w = np.eye(d)
    steps = cfg.steps_per_epoch or max(1, 2 * cfg.top_freq // cfg.batch_size)
    half = max(1, cfg.batch_size // 2)
    real, fake = 1.0 - cfg.smoothing, cfg.smoothing

    best_score, best_w = -np.inf, w.copy()
    for epoch in range(cfg.epochs):
        lr = max(cfg.lr_floor, cfg.lr_start * cfg.lr_decay**epoch)
        for _ in range(steps):
            # discriminator step: real targets vs mapped sources
            xb = xs[rng.integers(0, len(xs), half)] @ w.T
            yb = ys[rng.integers(0, len(ys), half)]
            logits, cache = disc.forward(np.vstack((xb, yb)))
            targets = np.concatenate(
                (np.full(half, fake), np.full(half, real)))
            d_loss, dz = _bce(logits, targets)
            disc.backward(cache, dz, lr=lr)
            # generator step: make mapped sources look real
            gb = xs[rng.integers(0, len(xs), cfg.batch_size)]
            logits, cache = disc.forward(gb @ w.T)
            g_loss, dz = _bce(logits, np.full(cfg.batch_size, real))
            dmapped = disc.backward(cache, dz, lr=None) / cfg.batch_size
            w -= lr * (dmapped.T @ gb)
            w = (1 + cfg.beta) * w - cfg.beta * (w @ w.T) @ w
        if not (np.isfinite(d_loss) and np.isfinite(g_loss)
                and np.isfinite(w).all()):
            raise RuntimeError(
                f"adversarial training diverged (epoch {epoch}, lr {lr:.2e}, "
                f"disc loss {d_loss}, gen loss {g_loss})")
        _, mean_score = induce_pairs(xs @ w.T, ys, k=cfg.csls_k)
        if mean_score > best_score:
            best_score, best_w = mean_score, w.copy()

    # held-out style accuracy probe on the full frequent-word set
    logits_x, _ = disc.forward(xs @ best_w.T)
    logits_y, _ = disc.forward(ys)
    acc = 0.5 * ((logits_x < 0).mean() + (logits_y >= 0).mean())

    # Procrustes refinement from the adversarial estimate
    w = best_w
    for _ in range(cfg.refine_iters):
        pairs, _ = induce_pairs(xs @ w.T, ys, k=cfg.csls_k)
        si = np.array([i for i, _ in pairs])
        ti = np.array([j for _, j in pairs])
        w = procrustes_fit(xs[si].T, ys[ti].T).W
    pairs, mean_score = induce_pairs(x @ w.T, y, k=cfg.csls_k)
    words = [(src.words[i], tgt.words[j]) for i, j in pairs]
    return AlignmentMap(w, method="adversarial",
                        orth_residual=orthogonality_residual(w),
                        dictionary=words,
                        info={"mean_csls": mean_score,
                              "disc_accuracy": float(acc),
                              "selection_score": best_score})


def save_map(amap: AlignmentMap, path):
    """Header 'd method', then d rows of W; selflearn maps append d more
    rows holding W_Y."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{amap.dim} {amap.method}\n")
        for row in amap.W:
            fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")
        if amap.W_Y is not None:
            for row in amap.W_Y:
                fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")


def load_map(path) -> AlignmentMap:
    with open(path, encoding="utf-8") as fh:
        d_str, method = fh.readline().split()
        d = int(d_str)
        rows = [np.array(fh.readline().split(), dtype=np.float64)
                for _ in range(d)]
        w = np.vstack(rows)
        w_y = None
        if method == "selflearn":
            rows = [np.array(fh.readline().split(), dtype=np.float64)
                    for _ in range(d)]
            w_y = np.vstack(rows)
    if w.shape != (d, d):
        raise ValueError(f"map file {path} is not {d}x{d}")
    return AlignmentMap(w, W_Y=w_y, method=method,
                        orth_residual=orthogonality_residual(w))
