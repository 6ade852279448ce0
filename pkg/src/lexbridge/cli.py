"""Command-line interface.

Every subcommand accepts --config FILE holding INI-style ``key = value``
lines (section headers and #/; comments ignored); keys are the long option
names with - or _ interchangeable. Explicit command-line flags always win
over the config file. Exit codes: 0 success, 1 validation problem, 2 runtime
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from types import SimpleNamespace

from . import bdi, retrieval, spectral
from .corpus import load_anchors, load_corpus, load_pairs, save_pairs, \
    save_vocab, tokenize
from .embedding import TrainConfig, load_vectors, save_vectors, \
    train_skipgram
from .errors import LexbridgeError, StageError, ValidationError
from .figures import plot_iteration_metric, plot_mos_bars, \
    plot_precision_bars, plot_spectra
from .pipeline import PipelineConfig, manifest_hash, run_pipeline
from .sheets import export_eval_sheets, mos_summarize
from .smt import SmtConfig, back_translate_loop, corpus_bleu, decode, \
    dictionary_replace_baseline, init_phrase_table, load_arpa, save_arpa, \
    train_lm, translate_corpus
from .smt.phrase_table import PhraseTable


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_config_file(path) -> dict:
    values = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config file: {exc}") from exc
    for ln, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            continue
        if "=" not in line:
            raise ValidationError(f"config line {ln}: expected key=value")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(value: str, default):
    if isinstance(default, bool):
        low = value.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValidationError(f"expected boolean, got {value!r}")
    if isinstance(default, int) and not isinstance(default, bool):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


class _Builder:
    """Collects per-command defaults so config-file values can sit between
    hardcoded defaults and explicit CLI flags."""

    def __init__(self):
        self.parser = _Parser(prog="lexbridge")
        self.sub = self.parser.add_subparsers(dest="cmd", required=True,
                                              parser_class=_Parser)
        self.defaults: dict[str, dict] = {}

    def command(self, name, help):
        p = self.sub.add_parser(name, help=help)
        p.add_argument("--config", default=argparse.SUPPRESS,
                       help="key=value config file")
        self.defaults[name] = {"config": None}
        return p

    def opt(self, p, cmd, flag, default, type=None, help=None, choices=None):
        dest = flag.lstrip("-").replace("-", "_")
        self.defaults[cmd][dest] = default
        if isinstance(default, bool):
            p.add_argument(flag, dest=dest, default=argparse.SUPPRESS,
                           action=argparse.BooleanOptionalAction, help=help)
        else:
            ty = type or (str if default is None else default.__class__)
            p.add_argument(flag, dest=dest, default=argparse.SUPPRESS,
                           type=ty, help=help, choices=choices)

    def finalize(self, argv):
        args = self.parser.parse_args(argv)
        ns = vars(args)
        cmd = ns.pop("cmd")
        merged = dict(self.defaults[cmd])
        config_path = ns.get("config", merged.get("config"))
        if config_path:
            for key, raw in _parse_config_file(config_path).items():
                if key not in merged:
                    raise ValidationError(
                        f"config key {key!r} is not a flag of {cmd!r}")
                merged[key] = _coerce(raw, self.defaults[cmd][key])
        merged.update(ns)
        return cmd, SimpleNamespace(**merged)


def _emb_options(b, p, cmd):
    b.opt(p, cmd, "--dim", 300)
    b.opt(p, cmd, "--window", 5)
    b.opt(p, cmd, "--epochs", 5)
    b.opt(p, cmd, "--learning-rate", 0.1)
    b.opt(p, cmd, "--subsample", 1e-5,
          help="frequent-word subsampling threshold; 1.0 disables")
    b.opt(p, cmd, "--negatives", 5)
    b.opt(p, cmd, "--min-count", 2)
    b.opt(p, cmd, "--subword", False)
    b.opt(p, cmd, "--seed", 0)


def build() -> _Builder:
    b = _Builder()

    p = b.command("train-emb", "train skip-gram embeddings")
    p.add_argument("corpus")
    b.opt(p, "train-emb", "--out", None, help="vector file to write")
    b.opt(p, "train-emb", "--vocab-out", None)
    _emb_options(b, p, "train-emb")

    p = b.command("score-spaces", "eigenvector score between two spaces")
    p.add_argument("src_emb")
    p.add_argument("tgt_emb")
    b.opt(p, "score-spaces", "--anchors", None,
          help="node subset file (one word per line)")
    b.opt(p, "score-spaces", "--top-n", 1000,
          help="fallback node count when no anchor file is given")
    b.opt(p, "score-spaces", "--g", 10)
    b.opt(p, "score-spaces", "--json", None)
    b.opt(p, "score-spaces", "--figure", None)

    p = b.command("align", "fit an alignment map between two spaces")
    p.add_argument("src_emb")
    p.add_argument("tgt_emb")
    b.opt(p, "align", "--method", "procrustes",
          choices=["procrustes", "selflearn", "adversarial"])
    b.opt(p, "align", "--anchors", None)
    b.opt(p, "align", "--seed-dict", None, help="TSV seed pairs")
    b.opt(p, "align", "--out", None)
    b.opt(p, "align", "--dict-out", None)
    b.opt(p, "align", "--iters", 5)
    b.opt(p, "align", "--max-iters", 50)
    b.opt(p, "align", "--csls-k", 10)
    b.opt(p, "align", "--adv-epochs", 50)
    b.opt(p, "align", "--top-freq", 1000)
    b.opt(p, "align", "--hidden", 2048)
    b.opt(p, "align", "--seed", 0)

    p = b.command("eval-bdi", "precision@k of word translation against gold")
    p.add_argument("src_emb")
    p.add_argument("tgt_emb")
    p.add_argument("map_file")
    p.add_argument("gold")
    b.opt(p, "eval-bdi", "--method", "csls", choices=["csls", "nn"])
    b.opt(p, "eval-bdi", "--bootstrap", 0)
    b.opt(p, "eval-bdi", "--csls-k", 10)
    b.opt(p, "eval-bdi", "--json", None)
    b.opt(p, "eval-bdi", "--figure", None)

    p = b.command("init-pt", "phrase table from aligned embeddings")
    p.add_argument("src_emb")
    p.add_argument("tgt_emb")
    p.add_argument("map_file")
    b.opt(p, "init-pt", "--out", None)
    b.opt(p, "init-pt", "--T", 30.0)
    b.opt(p, "init-pt", "--invert-temperature", False)
    b.opt(p, "init-pt", "--candidates", 100)
    b.opt(p, "init-pt", "--csls-k", 10)

    p = b.command("train-lm", "Kneser-Ney n-gram model, ARPA output")
    p.add_argument("corpus")
    b.opt(p, "train-lm", "--order", 4)
    b.opt(p, "train-lm", "--out", None)

    p = b.command("translate", "decode sentences (stdin/stdout by default)")
    b.opt(p, "translate", "--pt", None)
    b.opt(p, "translate", "--lm", None, help="ARPA file")
    b.opt(p, "translate", "--input", "-")
    b.opt(p, "translate", "--output", "-")
    b.opt(p, "translate", "--beam", 10)
    b.opt(p, "translate", "--w-phrase", 1.0)
    b.opt(p, "translate", "--w-lm", 1.0)
    b.opt(p, "translate", "--w-word", -0.1)
    b.opt(p, "translate", "--distortion", 0)
    b.opt(p, "translate", "--oov-logprob", -20.0)

    p = b.command("backtranslate", "iterative back-translation")
    b.opt(p, "backtranslate", "--src-corpus", None)
    b.opt(p, "backtranslate", "--tgt-corpus", None)
    b.opt(p, "backtranslate", "--pt", None)
    b.opt(p, "backtranslate", "--src-lm", None)
    b.opt(p, "backtranslate", "--tgt-lm", None)
    b.opt(p, "backtranslate", "--outdir", None)
    b.opt(p, "backtranslate", "--iterations", 3)
    b.opt(p, "backtranslate", "--sample-size", 2000)
    b.opt(p, "backtranslate", "--beam", 10)
    b.opt(p, "backtranslate", "--distortion", 0)
    b.opt(p, "backtranslate", "--seed", 0)
    b.opt(p, "backtranslate", "--eval-src", None,
          help="held-out source file for per-iteration BLEU")
    b.opt(p, "backtranslate", "--eval-ref", None)

    p = b.command("pipeline", "full end-to-end run")
    b.opt(p, "pipeline", "--src-corpus", None)
    b.opt(p, "pipeline", "--tgt-corpus", None)
    b.opt(p, "pipeline", "--outdir", None)
    b.opt(p, "pipeline", "--preset", None,
          help="A-F anchored grid or N (adversarial)")
    b.opt(p, "pipeline", "--lm-corpus", None)
    b.opt(p, "pipeline", "--aug-corpus", None)
    b.opt(p, "pipeline", "--gold", None)
    b.opt(p, "pipeline", "--translate-input", None)
    b.opt(p, "pipeline", "--src-vectors", None)
    b.opt(p, "pipeline", "--tgt-vectors", None)
    b.opt(p, "pipeline", "--method", "procrustes")
    b.opt(p, "pipeline", "--anchors", True)
    b.opt(p, "pipeline", "--augment", False)
    b.opt(p, "pipeline", "--T", 30.0)
    b.opt(p, "pipeline", "--invert-temperature", False)
    b.opt(p, "pipeline", "--beam", 10)
    b.opt(p, "pipeline", "--iterations", 3)
    b.opt(p, "pipeline", "--sample-size", 2000)
    b.opt(p, "pipeline", "--lm-order", 4)
    b.opt(p, "pipeline", "--iters", 5)
    b.opt(p, "pipeline", "--csls-k", 10)
    b.opt(p, "pipeline", "--adv-epochs", 50)
    b.opt(p, "pipeline", "--adv-top-freq", 1000)
    b.opt(p, "pipeline", "--adv-hidden", 2048)
    b.opt(p, "pipeline", "--translate-limit", 200)
    _emb_options(b, p, "pipeline")

    p = b.command("export-sheets", "blinded MOS evaluation sheets")
    b.opt(p, "export-sheets", "--originals", None)
    p.add_argument("--translations", action="append", default=[],
                   metavar="NAME=FILE", help="repeatable")
    b.opt(p, "export-sheets", "--n-sets", 20)
    b.opt(p, "export-sheets", "--n-evaluators", 2)
    b.opt(p, "export-sheets", "--seed", 0)
    b.opt(p, "export-sheets", "--outdir", None)

    p = b.command("mos-report", "summarize MOS score files")
    p.add_argument("scores", nargs="+")
    b.opt(p, "mos-report", "--json", None)
    b.opt(p, "mos-report", "--figure", None)

    p = b.command("baseline-replace", "dictionary replacement baseline")
    b.opt(p, "baseline-replace", "--dict", None, help="TSV src<TAB>tgt")
    b.opt(p, "baseline-replace", "--input", "-")
    b.opt(p, "baseline-replace", "--output", "-")
    return b


def _require(ns, *names):
    for name in names:
        if getattr(ns, name) in (None, []):
            raise ValidationError(f"--{name.replace('_', '-')} is required")


def _read_lines(path):
    if path == "-":
        return [line.rstrip("\n") for line in sys.stdin]
    return Path(path).read_text(encoding="utf-8").splitlines()


def _write_lines(path, lines):
    text = "".join(line + "\n" for line in lines)
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _emit_json(report, path):
    text = json.dumps(report, indent=2, sort_keys=True)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def _cmd_train_emb(ns):
    _require(ns, "out")
    corpus = load_corpus(ns.corpus)
    cfg = TrainConfig(
        dim=ns.dim, window=ns.window, epochs=ns.epochs,
        learning_rate=ns.learning_rate, negative_sampling_rate=ns.subsample,
        negatives_per_sample=ns.negatives, min_count=ns.min_count,
        subword=(2, 5) if ns.subword else None, seed=ns.seed)
    space = train_skipgram(corpus, cfg)
    save_vectors(space, ns.out)
    if ns.vocab_out:
        from .corpus import build_vocab
        save_vocab(build_vocab(corpus, ns.min_count), ns.vocab_out)
    print(f"trained {len(space)} x {space.dim} vectors -> {ns.out}")


def _cmd_score_spaces(ns):
    src, tgt = load_vectors(ns.src_emb), load_vectors(ns.tgt_emb)
    if ns.anchors:
        nodes_src = nodes_tgt = load_anchors(ns.anchors)
    else:
        n = min(ns.top_n, len(src), len(tgt))
        nodes_src, nodes_tgt = src.words[:n], tgt.words[:n]
    g1 = spectral.build_nn_graph(src, ns.g, nodes_src)
    g2 = spectral.build_nn_graph(tgt, ns.g, nodes_tgt)
    res = spectral.eigenvector_score(g1, g2)
    print(f"score={res.score:.6g} k={res.k_used}")
    if ns.json:
        _emit_json({"score": res.score, "k_used": res.k_used,
                    "nodes": len(g1.nodes), "g": ns.g}, ns.json)
    if ns.figure:
        plot_spectra(spectral.laplacian_eigenvalues(g1),
                     spectral.laplacian_eigenvalues(g2),
                     res.k_used, res.score, ns.figure)


def _load_seed(ns, src, tgt):
    if ns.seed_dict:
        return load_pairs(ns.seed_dict)
    if ns.anchors:
        return [(w, w) for w in load_anchors(ns.anchors)]
    raise ValidationError("anchored methods need --anchors or --seed-dict")


def _cmd_align(ns):
    _require(ns, "out")
    src, tgt = load_vectors(ns.src_emb), load_vectors(ns.tgt_emb)
    if ns.method == "adversarial":
        cfg = bdi.AdvConfig(hidden=ns.hidden, epochs=ns.adv_epochs,
                            top_freq=min(ns.top_freq, len(src), len(tgt)),
                            csls_k=ns.csls_k, seed=ns.seed)
        amap = bdi.adversarial_fit(src, tgt, cfg)
    elif ns.method == "selflearn":
        amap = bdi.self_learning_fit(src, tgt, _load_seed(ns, src, tgt),
                                     max_iters=ns.max_iters,
                                     csls_k=ns.csls_k)
    else:
        amap = bdi.procrustes_iterate(src, tgt, _load_seed(ns, src, tgt),
                                      iters=ns.iters, csls_k=ns.csls_k)
    bdi.save_map(amap, ns.out)
    if ns.dict_out and amap.dictionary:
        save_pairs(amap.dictionary, ns.dict_out)
    print(f"method={amap.method} orth_residual={amap.orth_residual:.3g} "
          f"converged={amap.converged}")


def _cmd_eval_bdi(ns):
    src, tgt = load_vectors(ns.src_emb), load_vectors(ns.tgt_emb)
    amap = bdi.load_map(ns.map_file)
    idx = retrieval.build_index(src, tgt, amap, k_csls=ns.csls_k)
    report = retrieval.evaluate_retrieval(idx, load_pairs(ns.gold),
                                          method=ns.method,
                                          bootstrap=ns.bootstrap)
    _emit_json(report, ns.json)
    if ns.figure:
        plot_precision_bars(report, ns.figure)


def _cmd_init_pt(ns):
    _require(ns, "out")
    src, tgt = load_vectors(ns.src_emb), load_vectors(ns.tgt_emb)
    amap = bdi.load_map(ns.map_file)
    cfg = SmtConfig(T=ns.T, invert_temperature=ns.invert_temperature,
                    candidates=ns.candidates, k_csls=ns.csls_k)
    pt = init_phrase_table(amap, src, tgt, cfg)
    pt.save(ns.out)
    print(f"{len(pt)} source phrases -> {ns.out}")


def _cmd_train_lm(ns):
    _require(ns, "out")
    lm = train_lm(load_corpus(ns.corpus), ns.order)
    save_arpa(lm, ns.out)
    note = f" ({lm.warning})" if lm.warning else ""
    print(f"order-{lm.order} model -> {ns.out}{note}")


def _cmd_translate(ns):
    _require(ns, "pt", "lm")
    pt = PhraseTable.load(ns.pt)
    lm = load_arpa(ns.lm)
    cfg = SmtConfig(beam=ns.beam, weights=(ns.w_phrase, ns.w_lm, ns.w_word),
                    oov_logprob=ns.oov_logprob,
                    distortion_limit=ns.distortion)
    out = []
    for line in _read_lines(ns.input):
        toks = tokenize(line)
        out.append(" ".join(decode(pt, lm, toks, cfg)) if toks else "")
    _write_lines(ns.output, out)


def _cmd_backtranslate(ns):
    _require(ns, "src_corpus", "tgt_corpus", "pt", "src_lm", "tgt_lm",
             "outdir")
    outdir = Path(ns.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    src_c = load_corpus(ns.src_corpus)
    tgt_c = load_corpus(ns.tgt_corpus)
    pt0 = PhraseTable.load(ns.pt)
    lm_src, lm_tgt = load_arpa(ns.src_lm), load_arpa(ns.tgt_lm)
    cfg = SmtConfig(beam=ns.beam, iterations=ns.iterations,
                    sample_size=ns.sample_size, seed=ns.seed,
                    distortion_limit=ns.distortion)
    final, history = back_translate_loop(src_c, tgt_c, pt0, lm_src, lm_tgt,
                                         cfg)
    final.save(outdir / "final_forward.txt")
    for i, (fwd, bwd) in enumerate(history, 1):
        fwd.save(outdir / f"iter{i}_forward.txt")
        bwd.save(outdir / f"iter{i}_backward.txt")
    print(f"{len(history)} iterations -> {outdir}")
    if ns.eval_src and ns.eval_ref:
        eval_src = [tokenize(s) for s in _read_lines(ns.eval_src) if s]
        eval_ref = [tokenize(s) for s in _read_lines(ns.eval_ref) if s]
        scores = []
        for table in [pt0] + [fwd for fwd, _ in history]:
            hyp = translate_corpus(table, lm_tgt, eval_src, cfg)
            scores.append(corpus_bleu(hyp, eval_ref))
        _emit_json({"bleu_per_iteration": scores},
                   outdir / "bleu.json")
        plot_iteration_metric(scores, outdir / "bleu.png")


def _cmd_pipeline(ns):
    _require(ns, "src_corpus", "tgt_corpus", "outdir")
    cfg = PipelineConfig(
        src_corpus=ns.src_corpus, tgt_corpus=ns.tgt_corpus,
        outdir=ns.outdir, lm_corpus=ns.lm_corpus, aug_corpus=ns.aug_corpus,
        gold=ns.gold, translate_input=ns.translate_input,
        src_vectors=ns.src_vectors, tgt_vectors=ns.tgt_vectors,
        preset=ns.preset, dim=ns.dim, subword=ns.subword,
        augment=ns.augment, window=ns.window, epochs=ns.epochs,
        learning_rate=ns.learning_rate, subsample=ns.subsample,
        negatives=ns.negatives, min_count=ns.min_count, anchors=ns.anchors,
        method=ns.method, iters=ns.iters, csls_k=ns.csls_k,
        lm_order=ns.lm_order, T=ns.T,
        invert_temperature=ns.invert_temperature, beam=ns.beam,
        iterations=ns.iterations, sample_size=ns.sample_size,
        adv_epochs=ns.adv_epochs, adv_top_freq=ns.adv_top_freq,
        adv_hidden=ns.adv_hidden, translate_limit=ns.translate_limit,
        seed=ns.seed)
    out = run_pipeline(cfg)
    manifest = json.loads((out / "manifest.json").read_text())
    print(f"artifacts -> {out}")
    print(f"manifest hash: {manifest_hash(manifest)}")


def _cmd_export_sheets(ns):
    _require(ns, "originals", "outdir")
    if not ns.translations:
        raise ValidationError("--translations NAME=FILE required")
    originals = [l for l in _read_lines(ns.originals)]
    translations = {}
    for spec in ns.translations:
        if "=" not in spec:
            raise ValidationError(f"--translations wants NAME=FILE: {spec!r}")
        name, path = spec.split("=", 1)
        translations[name] = _read_lines(path)
    paths = export_eval_sheets(originals, translations, ns.n_sets,
                               ns.n_evaluators, ns.seed, ns.outdir)
    print(f"{len(paths['sheets'])} sheets + key -> {ns.outdir}")


def _cmd_mos_report(ns):
    report = mos_summarize(list(ns.scores))
    _emit_json(report, ns.json)
    if ns.figure:
        plot_mos_bars(report, ns.figure)


def _cmd_baseline_replace(ns):
    _require(ns, "dict")
    mapping = load_pairs(ns.dict)
    out = [" ".join(dictionary_replace_baseline(mapping, tokenize(line)))
           for line in _read_lines(ns.input)]
    _write_lines(ns.output, out)


_COMMANDS = {
    "train-emb": _cmd_train_emb,
    "score-spaces": _cmd_score_spaces,
    "align": _cmd_align,
    "eval-bdi": _cmd_eval_bdi,
    "init-pt": _cmd_init_pt,
    "train-lm": _cmd_train_lm,
    "translate": _cmd_translate,
    "backtranslate": _cmd_backtranslate,
    "pipeline": _cmd_pipeline,
    "export-sheets": _cmd_export_sheets,
    "mos-report": _cmd_mos_report,
    "baseline-replace": _cmd_baseline_replace,
}


def main(argv=None) -> int:
    try:
        cmd, ns = build().finalize(argv)
        _COMMANDS[cmd](ns)
        return 0
    except (ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, (ValidationError, FileNotFoundError)):
            return 1
        return 2
    except (LexbridgeError, OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
