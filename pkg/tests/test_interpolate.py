"""Static interpolation, on-the-fly mixtures, and EM weight fitting."""

import math
import random

import pytest

from ngramlm import (
    build_vocab,
    fit_weights_em,
    interpolate_static,
    map_tokens,
    mixture_prob,
)
from ngramlm.errors import BadWeights, EmptyHeldout, VocabMismatch
from ngramlm.model import MixtureModel, WeightVector
from ngramlm.vocab import BOS_ID
from conftest import make_shared_models
from corpusgen import random_sentences
from oracles import conditional_mass, em_grid_best

VOCAB = list("abcdefgh")


def two_components(seed_a=61, seed_b=62, order=2):
    (ma, mb), _, _ = make_shared_models([seed_a, seed_b], order=order,
                                        vocab_words=VOCAB)
    return ma, mb


def test_identity_weight_reproduces_component():
    ma, mb = two_components()
    merged = interpolate_static(
        [ma, mb], WeightVector(values=(1.0, 0.0), labels=("a", "b"))
    )
    for g in ma.probs:
        if g[-1] == BOS_ID:
            continue
        assert merged.probs[g] == pytest.approx(ma.prob(g[:-1], g[-1]), abs=1e-10)


def test_identical_components_fixed_point():
    ma, _ = two_components()
    merged = interpolate_static(
        [ma, ma], WeightVector(values=(0.3, 0.7), labels=("a", "b"))
    )
    for g in ma.probs:
        if g[-1] == BOS_ID:
            continue
        assert merged.probs[g] == pytest.approx(ma.probs[g], abs=1e-10)


def test_mixture_matches_direct_sum():
    ma, mb = two_components()
    merged = interpolate_static(
        [ma, mb], WeightVector(values=(0.3, 0.7), labels=("a", "b"))
    )
    for g in list(merged.probs)[:500]:
        if g[-1] == BOS_ID:
            continue
        expected = 0.3 * 10.0 ** ma.prob(g[:-1], g[-1]) + 0.7 * 10.0 ** mb.prob(
            g[:-1], g[-1]
        )
        assert merged.probs[g] == pytest.approx(math.log10(expected), abs=1e-10)


def test_interpolated_model_normalizes():
    ma, mb = two_components()
    merged = interpolate_static(
        [ma, mb], WeightVector(values=(0.45, 0.55), labels=("a", "b"))
    )
    vocab_size = len(merged.vocab)
    histories = [()] + [g for g in merged.probs if len(g) < merged.order]
    for h in histories:
        assert conditional_mass(merged, h, vocab_size) == pytest.approx(
            1.0, abs=1e-6
        )


def test_static_matches_mixture_at_stored_ngrams():
    ma, mb = two_components()
    wv = WeightVector(values=(0.25, 0.75), labels=("a", "b"))
    merged = interpolate_static([ma, mb], wv)
    mix = MixtureModel(components=[ma, mb], weights=wv)
    for g in merged.probs:
        if g[-1] == BOS_ID:
            continue
        assert merged.probs[g] == pytest.approx(
            mixture_prob(mix, g[:-1], g[-1]), abs=1e-10
        )


def test_mixture_prob_exact_everywhere():
    ma, mb = two_components()
    wv = WeightVector(values=(0.5, 0.5), labels=("a", "b"))
    mix = MixtureModel(components=[ma, mb], weights=wv)
    rng = random.Random(8)
    vocab_size = len(ma.vocab)
    for _ in range(300):
        h = tuple(rng.randrange(vocab_size) for _ in range(rng.randint(0, 3)))
        w = rng.randrange(vocab_size)
        expected = 0.5 * 10.0 ** ma.prob(h, w) + 0.5 * 10.0 ** mb.prob(h, w)
        assert mixture_prob(mix, h, w) == pytest.approx(
            math.log10(expected), abs=1e-12
        )


def test_vocab_mismatch_rejected():
    ma, _ = two_components()
    (other,), _, _ = make_shared_models([63], vocab_words=list("xyz"),
                                        n_sentences=40)
    with pytest.raises(VocabMismatch):
        interpolate_static(
            [ma, other], WeightVector(values=(0.5, 0.5), labels=("a", "b"))
        )


def test_bad_weights_rejected():
    ma, mb = two_components()
    with pytest.raises(BadWeights):
        interpolate_static(
            [ma, mb], WeightVector(values=(0.5, 0.6), labels=("a", "b"))
        )
    with pytest.raises(BadWeights):
        interpolate_static(
            [ma, mb], WeightVector(values=(-0.1, 1.1), labels=("a", "b"))
        )


# ----------------------------------------------------------------------
# EM weight fitting
# ----------------------------------------------------------------------

def heldout_ids(vocab, seed=70, n=60):
    sentences = random_sentences(seed, n, vocab=VOCAB)
    return [map_tokens(vocab, s) for s in sentences]


def test_identical_components_stay_uniform():
    ma, _ = two_components()
    heldout = heldout_ids(ma.vocab)
    wv = fit_weights_em([ma, ma], heldout, max_iters=20)
    assert wv.values == pytest.approx((0.5, 0.5), abs=1e-12)


def test_single_component_immediate():
    ma, _ = two_components()
    heldout = heldout_ids(ma.vocab)
    wv = fit_weights_em([ma], heldout)
    assert wv.values == (1.0,)


def test_empty_heldout_raises():
    ma, mb = two_components()
    with pytest.raises(EmptyHeldout):
        fit_weights_em([ma, mb], [])


def test_ll_trace_non_decreasing():
    ma, mb = two_components()
    heldout = heldout_ids(ma.vocab)
    trace: list[float] = []
    fit_weights_em([ma, mb], heldout, max_iters=50, tol=1e-12, trace=trace)
    assert len(trace) >= 2
    assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))


def test_dominant_component_wins():
    # Held-out drawn from the same process as component A's training
    # data; component B saw a different process, so A assigns far
    # higher probability per token.
    (ma, mb), vocab, (corpus_a, _) = make_shared_models(
        [64, 65], n_sentences=200, vocab_words=VOCAB, bigram_bias=0.95
    )
    sentences = random_sentences(64, 80, vocab=VOCAB, bigram_bias=0.95)
    heldout = [map_tokens(vocab, s) for s in sentences]
    wv = fit_weights_em([ma, mb], heldout, max_iters=300, tol=1e-10)
    assert wv.values[0] > 0.9


def test_em_matches_grid_search_oracle():
    ma, mb = two_components(66, 67)
    heldout = heldout_ids(ma.vocab, seed=71)
    from ngramlm.model import sentence_events

    p1, p2 = [], []
    order = max(ma.order, mb.order)
    for sent in heldout:
        for h, w in sentence_events(sent, order):
            p1.append(10.0 ** ma.prob(h, w))
            p2.append(10.0 ** mb.prob(h, w))
    lam_grid = em_grid_best(p1, p2)
    wv = fit_weights_em([ma, mb], heldout, max_iters=500, tol=1e-12)
    assert abs(wv.values[0] - lam_grid) <= 0.02
