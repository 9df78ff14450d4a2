"""Shared fixtures: small seeded corpora, models, and lattices."""

from __future__ import annotations

import random

import pytest

from ngramlm import (
    Edge,
    Lattice,
    WeightVector,
    adjust_counts_kn,
    build_vocab,
    count_ngrams,
    estimate_kn,
    map_tokens,
)
from corpusgen import random_sentences


def make_model(seed: int, n_sentences: int, order: int, discounts=0.5,
               vocab_words=None, max_vocab=None, tail_mass=0.0):
    sentences = random_sentences(seed, n_sentences, vocab=vocab_words,
                                 tail_mass=tail_mass)
    vocab = build_vocab(sentences, max_size=max_vocab)
    ids = [map_tokens(vocab, s) for s in sentences]
    counts = adjust_counts_kn(count_ngrams(ids, order))
    return estimate_kn(counts, vocab, discounts=discounts), sentences


def make_shared_models(seeds, order=2, vocab_words=None, n_sentences=60,
                       discounts=0.5, bigram_bias=0.6):
    """Component models estimated over one shared vocabulary."""
    corpora = [
        random_sentences(s, n_sentences, vocab=vocab_words,
                         bigram_bias=bigram_bias)
        for s in seeds
    ]
    vocab = build_vocab([sent for corpus in corpora for sent in corpus])
    models = []
    for corpus in corpora:
        ids = [map_tokens(vocab, s) for s in corpus]
        counts = adjust_counts_kn(count_ngrams(ids, order))
        models.append(estimate_kn(counts, vocab, discounts=discounts))
    return models, vocab, corpora


@pytest.fixture(scope="session")
def small_model():
    """Order-2 model over ~40 sentences, fixed discount."""
    return make_model(11, 40, 2)[0]


@pytest.fixture(scope="session")
def medium_model():
    """Order-3 model over 400 sentences, fixed discount."""
    return make_model(23, 400, 3)[0]


@pytest.fixture(scope="session")
def medium_auto_model():
    """Order-3 model with count-of-count discounts."""
    return make_model(37, 1500, 3, discounts="auto", tail_mass=0.08)[0]


def chain_lattice(words, labels, per_edge_scores, finals=None, times=None):
    """Single-path lattice spelling out ``words``."""
    edges = [
        Edge(i, i + 1, w, tuple(s))
        for i, (w, s) in enumerate(zip(words, per_edge_scores))
    ]
    return Lattice(
        num_nodes=len(words) + 1,
        edges=edges,
        labels=tuple(labels),
        finals=frozenset(finals if finals is not None else {len(words)}),
        times=times,
    )


def exhaustive_lattice(word_ids, max_len, seed, labels=("am", "lm", "wip")):
    """All word sequences of length 1..max_len over ``word_ids``.

    Node i is reached after i words; nodes 1..max_len are final, so
    most finals still have outgoing edges. Acoustic scores are seeded
    noise; lm scores start at zero; wip counts 1 per edge.
    """
    rng = random.Random(seed)
    edges = []
    for i in range(max_len):
        for w in word_ids:
            scores = {"am": rng.uniform(-3.0, 0.0), "lm": 0.0, "wip": 1.0}
            edges.append(Edge(i, i + 1, w, tuple(scores[lb] for lb in labels)))
    return Lattice(
        num_nodes=max_len + 1,
        edges=edges,
        labels=tuple(labels),
        finals=frozenset(range(1, max_len + 1)),
    )


def random_dag_lattice(seed, labels=("am", "lm", "wip"), n_layers=5,
                       width=3, word_ids=(3, 4, 5, 6)):
    """Layered random DAG with several paths per node pair."""
    rng = random.Random(seed)
    layers = [[0]]
    next_id = 1
    for _ in range(n_layers - 1):
        layer = [next_id + i for i in range(rng.randint(2, width))]
        next_id += len(layer)
        layers.append(layer)
    edges = []

    def add_edge(u, v):
        for w in rng.sample(word_ids, k=rng.randint(1, 2)):
            scores = {
                "am": rng.uniform(-4.0, 0.0),
                "lm": rng.uniform(-2.0, 0.0),
                "wip": 1.0,
            }
            edges.append(Edge(u, v, w, tuple(scores[lb] for lb in labels)))

    for a, b in zip(layers, layers[1:]):
        covered = set()
        for u in a:
            targets = rng.sample(b, k=max(1, len(b) - 1))
            covered.update(targets)
            for v in targets:
                add_edge(u, v)
        for v in b:  # keep every node reachable
            if v not in covered:
                add_edge(rng.choice(a), v)
    finals = frozenset(layers[-1])
    return Lattice(
        num_nodes=next_id,
        edges=edges,
        labels=tuple(labels),
        finals=finals,
    )


@pytest.fixture
def uniform_weights():
    return WeightVector.uniform(("am", "lm", "wip"))
