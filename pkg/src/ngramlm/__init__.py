"""Backoff n-gram language model toolkit.

Train, prune, interpolate, serve, and evaluate backoff n-gram models,
and rescore ASR word lattices with them.
"""

from .arpa import read_arpa, write_arpa
from .counts import CountTable, adjust_counts_kn, count_ngrams, merge_counts
from .evaluate import EvalReport, WerReport, corpus_wer, perplexity, word_error_rate
from .lattice import (
    Edge,
    Hypothesis,
    Lattice,
    best_path,
    nbest,
    read_lattice,
    rescore,
    write_lattice,
)
from .model import (
    BackoffModel,
    MixtureModel,
    WeightVector,
    estimate_kn,
    fit_weights_em,
    interpolate_static,
    mixture_prob,
)
from .prune import PruneResult, prune_entropy, prune_to_size
from .tune import MertResult, TuneSet, envelope_sweep, mert
from .vocab import Vocabulary, build_vocab, map_tokens, oov_rate

__version__ = "0.1.0"
