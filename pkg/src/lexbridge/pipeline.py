"""End-to-end pipeline: corpora -> embeddings -> alignment -> dictionary ->
phrase table -> language model -> back-translation -> translations.

Presets mirror the standard configuration grid: A/B (100d subword), C/D
(1000d subword + target-corpus augmentation), E/F (300d plain), with the
second letter of each pair using the domain (target) corpus for language
modeling instead of a general one, and N dropping anchors entirely
(adversarial alignment, general LM). Every stage failure aborts with the
stage name; a manifest records config, seeds, stats, and artifact hashes.
"""

from __future__ import annotations

import hashlib
import json
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__, bdi, retrieval, spectral
from .corpus import (Corpus, build_vocab, extract_anchors, load_corpus,
                     load_pairs, save_anchors, save_pairs, save_vocab)
from .embedding import (EmbeddingSpace, TrainConfig, load_vectors,
                        save_vectors, train_skipgram)
from .errors import StageError, ValidationError
from .figures import plot_precision_bars, plot_spectra
from .smt import (SmtConfig, back_translate_loop, init_phrase_table,
                  save_arpa, train_lm, translate_corpus)

PRESETS = {
    "A": {"dim": 100, "subword": True, "anchors": True,
          "lm_source": "general"},
    "B": {"dim": 100, "subword": True, "anchors": True,
          "lm_source": "domain"},
    "C": {"dim": 1000, "subword": True, "augment": True, "anchors": True,
          "lm_source": "general"},
    "D": {"dim": 1000, "subword": True, "augment": True, "anchors": True,
          "lm_source": "domain"},
    "E": {"dim": 300, "subword": False, "anchors": True,
          "lm_source": "general"},
    "F": {"dim": 300, "subword": False, "anchors": True,
          "lm_source": "domain"},
    "N": {"dim": 300, "subword": False, "anchors": False,
          "method": "adversarial", "lm_source": "general"},
}


@dataclass
class PipelineConfig:
    src_corpus: str
    tgt_corpus: str
    outdir: str
    lm_corpus: str | None = None
    aug_corpus: str | None = None
    gold: str | None = None
    translate_input: str | None = None
    src_vectors: str | None = None  # reuse pre-trained embeddings
    tgt_vectors: str | None = None
    preset: str | None = None
    dim: int = 300
    subword: bool = False
    augment: bool = False
    window: int = 5
    epochs: int = 5
    learning_rate: float = 0.1
    subsample: float = 1e-5
    negatives: int = 5
    min_count: int = 2
    anchors: bool = True
    method: str = "procrustes"  # procrustes | selflearn | adversarial
    iters: int = 5
    csls_k: int = 10
    nn_graph_k: int = 10
    lm_source: str = "domain"  # domain | general
    lm_order: int = 4
    T: float = 30.0
    invert_temperature: bool = False
    beam: int = 10
    iterations: int = 3
    sample_size: int = 2000
    distortion_limit: int = 0
    adv_epochs: int = 50
    adv_top_freq: int = 1000
    adv_hidden: int = 2048
    translate_limit: int = 200
    seed: int = 0
    notes: list = field(default_factory=list)


def resolve_config(cfg: PipelineConfig) -> PipelineConfig:
    if cfg.preset:
        name = cfg.preset.upper()
        if name not in PRESETS:
            raise ValidationError(f"unknown preset {cfg.preset!r}")
        for key, value in PRESETS[name].items():
            setattr(cfg, key, value)
        cfg.preset = name
    if cfg.method not in ("procrustes", "selflearn", "adversarial"):
        raise ValidationError(f"unknown BDI method {cfg.method!r}")
    if not cfg.anchors and cfg.method != "adversarial":
        raise ValidationError(
            "anchors=off forces the adversarial method; set method "
            "accordingly or enable anchors")
    if cfg.lm_source not in ("domain", "general"):
        raise ValidationError(f"unknown lm_source {cfg.lm_source!r}")
    if cfg.lm_source == "general" and not cfg.lm_corpus:
        cfg.lm_source = "domain"
        cfg.notes.append("no general LM corpus given: fell back to domain")
    return cfg


@contextmanager
def _stage(name):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest_hash(manifest: dict) -> str:
    return hashlib.sha256(
        json.dumps(manifest, sort_keys=True).encode()).hexdigest()


def _train_space(corpus, cfg, seed) -> EmbeddingSpace:
    tc = TrainConfig(
        dim=cfg.dim, window=cfg.window, epochs=cfg.epochs,
        learning_rate=cfg.learning_rate,
        negative_sampling_rate=cfg.subsample,
        negatives_per_sample=cfg.negatives, min_count=cfg.min_count,
        subword=(2, 5) if cfg.subword else None, seed=seed)
    return train_skipgram(corpus, tc)


def run_pipeline(cfg: PipelineConfig) -> Path:
    cfg = resolve_config(cfg)
    out = Path(cfg.outdir)
    out.mkdir(parents=True, exist_ok=True)
    stats: dict = {}
    artifacts: dict = {}

    def emit(name, path):
        artifacts[name] = {"file": Path(path).name, "sha256": _sha256(path)}

    with _stage("corpus"):
        src_c = load_corpus(cfg.src_corpus, name="src")
        tgt_c = load_corpus(cfg.tgt_corpus, name="tgt")
        emb_tgt_c = tgt_c
        if cfg.augment and cfg.aug_corpus:
            aug = load_corpus(cfg.aug_corpus, name="aug")
            emb_tgt_c = Corpus(tgt_c.sentences + aug.sentences, name="tgt+aug")
        src_v = build_vocab(src_c, cfg.min_count)
        tgt_v = build_vocab(emb_tgt_c, cfg.min_count)
        save_vocab(src_v, out / "src_vocab.tsv")
        save_vocab(tgt_v, out / "tgt_vocab.tsv")
        emit("src_vocab", out / "src_vocab.tsv")
        emit("tgt_vocab", out / "tgt_vocab.tsv")
        anchors = None
        if cfg.anchors:
            anchors = extract_anchors(src_v, tgt_v)
            save_anchors(anchors, out / "anchors.txt")
            emit("anchors", out / "anchors.txt")
            stats["anchor_count"] = len(anchors)

    with _stage("embedding"):
        if cfg.src_vectors:
            src_space = load_vectors(cfg.src_vectors)
        else:
            src_space = _train_space(src_c, cfg, cfg.seed)
        if cfg.tgt_vectors:
            tgt_space = load_vectors(cfg.tgt_vectors)
        else:
            tgt_space = _train_space(emb_tgt_c, cfg, cfg.seed + 1)
        save_vectors(src_space, out / "src_vectors.txt")
        save_vectors(tgt_space, out / "tgt_vectors.txt")
        emit("src_vectors", out / "src_vectors.txt")
        emit("tgt_vectors", out / "tgt_vectors.txt")

    with _stage("bdi"):
        if cfg.method == "adversarial":
            adv = bdi.AdvConfig(
                hidden=cfg.adv_hidden, epochs=cfg.adv_epochs,
                top_freq=min(cfg.adv_top_freq, len(src_space),
                             len(tgt_space)),
                csls_k=cfg.csls_k, seed=cfg.seed)
            amap = bdi.adversarial_fit(src_space, tgt_space, adv)
        else:
            seed_pairs = [(a, a) for a in anchors]
            if cfg.method == "selflearn":
                amap = bdi.self_learning_fit(
                    src_space, tgt_space, seed_pairs, csls_k=cfg.csls_k)
            else:
                amap = bdi.procrustes_iterate(
                    src_space, tgt_space, seed_pairs, iters=cfg.iters,
                    csls_k=cfg.csls_k)
        bdi.save_map(amap, out / "alignment_map.txt")
        emit("alignment_map", out / "alignment_map.txt")
        stats["bdi"] = {"method": cfg.method,
                        "orth_residual": amap.orth_residual,
                        "converged": amap.converged, **amap.info}

    with _stage("spectral"):
        nodes = anchors if anchors else None
        n_nodes = len(nodes) if nodes else min(len(src_space),
                                               len(tgt_space))
        if n_nodes > cfg.nn_graph_k + 1:
            if nodes is None:
                nodes_src = src_space.words[:n_nodes]
                nodes_tgt = tgt_space.words[:n_nodes]
            else:
                nodes_src = nodes_tgt = nodes
            g1 = spectral.build_nn_graph(src_space, cfg.nn_graph_k, nodes_src)
            g2 = spectral.build_nn_graph(tgt_space, cfg.nn_graph_k, nodes_tgt)
            before = spectral.eigenvector_score(g1, g2)
            xm = amap.transform_source(
                bdi.preprocess_matrix(src_space.vectors))
            ym = amap.transform_target(
                bdi.preprocess_matrix(tgt_space.vectors))
            g1m = spectral.build_nn_graph(
                EmbeddingSpace(src_space.words, xm), cfg.nn_graph_k,
                nodes_src)
            g2m = spectral.build_nn_graph(
                EmbeddingSpace(tgt_space.words, ym), cfg.nn_graph_k,
                nodes_tgt)
            after = spectral.eigenvector_score(g1m, g2m)
            stats["eigenvector_score"] = {
                "before": before.score, "after": after.score,
                "k_before": before.k_used, "k_after": after.k_used}
            e1 = spectral.laplacian_eigenvalues(g1)
            e2 = spectral.laplacian_eigenvalues(g2)
            plot_spectra(e1, e2, before.k_used, before.score,
                         out / "spectra.png")
            emit("spectra_figure", out / "spectra.png")
        else:
            stats["eigenvector_score"] = {
                "skipped": f"{n_nodes} nodes need g < n; g={cfg.nn_graph_k}"}

    with _stage("retrieval"):
        idx = retrieval.build_index(src_space, tgt_space, amap,
                                    k_csls=cfg.csls_k)
        induced = retrieval.induce_dictionary(idx, src_space.words)
        save_pairs(induced, out / "induced_dict.tsv")
        emit("induced_dict", out / "induced_dict.tsv")
        if cfg.gold:
            gold = load_pairs(cfg.gold)
            report = retrieval.evaluate_retrieval(idx, gold)
            with open(out / "retrieval_eval.json", "w") as fh:
                json.dump(report, fh, indent=2, sort_keys=True)
            emit("retrieval_eval", out / "retrieval_eval.json")
            plot_precision_bars(report, out / "precision.png")
            emit("precision_figure", out / "precision.png")
            stats["retrieval"] = report

    with _stage("smt"):
        lm_c = tgt_c
        if cfg.lm_source == "general" and cfg.lm_corpus:
            lm_c = load_corpus(cfg.lm_corpus, name="lm")
        lm_tgt = train_lm(lm_c, cfg.lm_order)
        lm_src = train_lm(src_c, cfg.lm_order)
        save_arpa(lm_tgt, out / "lm_tgt.arpa")
        emit("lm_tgt", out / "lm_tgt.arpa")
        smt_cfg = SmtConfig(
            T=cfg.T, invert_temperature=cfg.invert_temperature,
            beam=cfg.beam, iterations=cfg.iterations, seed=cfg.seed,
            sample_size=cfg.sample_size, k_csls=cfg.csls_k,
            distortion_limit=cfg.distortion_limit)
        pt0 = init_phrase_table(amap, src_space, tgt_space, smt_cfg)
        pt0.save(out / "phrase_table_gen0.txt")
        emit("phrase_table_gen0", out / "phrase_table_gen0.txt")
        pt_final, history = back_translate_loop(
            src_c, tgt_c, pt0, lm_src, lm_tgt, smt_cfg)
        pt_final.save(out / "phrase_table.txt")
        emit("phrase_table", out / "phrase_table.txt")
        stats["smt"] = {"bt_iterations": len(history),
                        "table_rows_gen0": len(pt0),
                        "table_rows_final": len(pt_final)}
        if cfg.translate_input:
            to_translate = load_corpus(cfg.translate_input).sentences
        else:
            to_translate = src_c.sentences[: cfg.translate_limit]
        translated = translate_corpus(pt_final, lm_tgt, to_translate,
                                      smt_cfg)
        with open(out / "translations.txt", "w", encoding="utf-8") as fh:
            for toks in translated:
                fh.write(" ".join(toks) + "\n")
        emit("translations", out / "translations.txt")

    with _stage("manifest"):
        config_dump = {k: v for k, v in asdict(cfg).items() if k != "outdir"}
        manifest = {"version": __version__, "config": config_dump,
                    "stats": stats, "artifacts": artifacts}
        with open(out / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
    return out
