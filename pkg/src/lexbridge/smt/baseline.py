"""Dictionary-replacement baseline: single-pass token substitution."""

from __future__ import annotations


def dictionary_replace_baseline(dictionary, tokens):
    """Replace each token with its dictionary entry when one exists.

    dictionary: mapping or (src, tgt) pair list; the first entry per source
    word wins. Single pass: outputs are never re-replaced."""
    if not isinstance(dictionary, dict):
        mapping = {}
        for s, t in dictionary:
            mapping.setdefault(s, t)
    else:
        mapping = dictionary
    return [mapping.get(t, t) for t in tokens]
