"""Blinded evaluation-sheet export and two-step MOS summarization.

Sheets: every evaluator receives a CSV of sentence sets; within each set the
translations of the requested configurations appear under shuffled blind
labels T1..Tk, and the label->configuration mapping goes to a separate key
file. Sets containing an empty translation, or one where more than half of
the tokens carry no letters, are filtered out before assignment.

Scores: CSV rows evaluator,group,set_id,config,correctness,readability
with scores in 1..5 (readability may be blank). Correctness aggregates per
configuration over all rows; readability aggregates per evaluator group and
configuration, but only over sentences whose mean correctness is >= 4.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import NotEnoughSentences, ValidationError


def _set_ok(translations_for_set):
    for text in translations_for_set:
        toks = text.split()
        if not toks:
            return False
        non_alpha = sum(1 for t in toks if not any(ch.isalpha() for ch in t))
        if non_alpha / len(toks) > 0.5:
            return False
    return True


def export_eval_sheets(originals, translations: dict, n_sets: int,
                       n_evaluators: int, seed: int, outdir) -> dict:
    """Write evaluator_<i>.csv sheets plus key.csv; returns the paths."""
    if not translations:
        raise ValidationError("need at least one configuration")
    configs = sorted(translations)
    for name, lines in translations.items():
        if len(lines) != len(originals):
            raise ValidationError(
                f"config {name!r} has {len(lines)} translations for "
                f"{len(originals)} originals")
    kept = [i for i in range(len(originals))
            if _set_ok([translations[c][i] for c in configs])]
    if len(kept) < n_sets:
        raise NotEnoughSentences(
            f"{len(kept)} usable sets after filtering, need {n_sets}")

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    labels = [f"T{i + 1}" for i in range(len(configs))]
    sheet_paths = []
    key_rows = []
    for ev in range(1, n_evaluators + 1):
        rng = np.random.default_rng([seed, ev])
        chosen = sorted(rng.choice(len(kept), size=n_sets, replace=False))
        path = outdir / f"evaluator_{ev}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["set_id", "original"] + labels
                            + [f"correctness_{lb}" for lb in labels]
                            + [f"readability_{lb}" for lb in labels])
            for slot in chosen:
                i = kept[slot]
                perm = rng.permutation(len(configs))
                blind = [translations[configs[p]][i] for p in perm]
                writer.writerow([i, originals[i]] + blind
                                + [""] * (2 * len(configs)))
                for lb, p in zip(labels, perm):
                    key_rows.append([ev, i, lb, configs[p]])
        sheet_paths.append(path)
    key_path = outdir / "key.csv"
    with open(key_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["evaluator", "set_id", "label", "config"])
        writer.writerows(key_rows)
    return {"sheets": sheet_paths, "key": key_path}


def _parse_score(value, row, field):
    if value is None or value == "":
        return None
    try:
        score = float(value)
    except ValueError:
        raise ValidationError(f"bad {field} {value!r} in row {row}") from None
    if not 1 <= score <= 5:
        raise ValidationError(f"{field} {score} outside 1..5 in row {row}")
    return score


def load_scores(paths) -> list[dict]:
    rows = []
    for path in paths:
        with open(path, newline="", encoding="utf-8") as fh:
            for raw in csv.DictReader(fh):
                rows.append({
                    "evaluator": raw["evaluator"],
                    "group": raw.get("group", "all") or "all",
                    "set_id": raw.get("set_id", raw.get("sentence_id")),
                    "config": raw["config"],
                    "correctness": _parse_score(
                        raw.get("correctness"), raw, "correctness"),
                    "readability": _parse_score(
                        raw.get("readability"), raw, "readability"),
                })
    return rows


def mos_summarize(rows) -> dict:
    """rows: parsed score dicts (see load_scores) or paths to score CSVs."""
    if rows and not isinstance(rows[0], dict):
        rows = load_scores(rows)
    if not rows:
        raise ValidationError("no score rows")
    corr: dict[str, list] = {}
    per_sentence: dict[tuple, list] = {}
    for r in rows:
        if r["correctness"] is not None:
            corr.setdefault(r["config"], []).append(r["correctness"])
            per_sentence.setdefault(
                (r["config"], r["set_id"]), []).append(r["correctness"])
    eligible = {
        cfg_sid for cfg_sid, scores in per_sentence.items()
        if np.mean(scores) >= 4.0}
    read: dict[str, dict[str, list]] = {}
    for r in rows:
        if r["readability"] is None:
            continue
        if (r["config"], r["set_id"]) not in eligible:
            continue
        read.setdefault(r["config"], {}).setdefault(
            r["group"], []).append(r["readability"])
    report = {"correctness": {}, "readability": {}, "eligible": {}}
    for cfg, scores in sorted(corr.items()):
        report["correctness"][cfg] = {
            "mean": float(np.mean(scores)),
            "std": float(np.std(scores)),
            "n": len(scores)}
        report["eligible"][cfg] = sorted(
            sid for c, sid in eligible if c == cfg)
    for cfg, groups in sorted(read.items()):
        report["readability"][cfg] = {
            g: {"mean": float(np.mean(v)), "std": float(np.std(v)),
                "n": len(v)}
            for g, v in sorted(groups.items())}
    return report
