"""Unsupervised phrase-based statistical MT over aligned embedding spaces."""

from .baseline import dictionary_replace_baseline
from .backtranslate import (back_translate_loop, extract_phrases,
                            train_table_from_pairs, word_align)
from .bleu import corpus_bleu
from .decoder import decode, score_translation, translate_corpus
from .lm import KneserNeyLM, load_arpa, save_arpa, train_lm
from .phrase_table import PhraseTable, SmtConfig, init_phrase_table

__all__ = [
    "PhraseTable", "SmtConfig", "init_phrase_table",
    "KneserNeyLM", "train_lm", "save_arpa", "load_arpa",
    "decode", "score_translation", "translate_corpus",
    "back_translate_loop", "word_align", "extract_phrases",
    "train_table_from_pairs", "corpus_bleu", "dictionary_replace_baseline",
]
