"""Relative-entropy pruning of backoff models.

Every n-gram of order >= 2 is scored once against the original model:
the score is the model's own marginal probability of the history times
the KL divergence between the conditional distribution before and after
removing that single entry (removal re-routes the word through the
backoff path and shifts the history's backoff weight). Entries whose
score is <= threshold are dropped, except prefixes of surviving
higher-order entries; unigrams are never dropped. Backoff weights of
all surviving histories are then recomputed bottom-up so conditional
distributions renormalize exactly.

Because decisions come from one pass against the original model, the
retained sets at increasing thresholds are nested, which also makes the
size-targeted search exact.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .counts import Ngram
from .errors import TargetTooSmall
from .model import LN10, BackoffModel, resolve_logprob
from .vocab import BOS_ID, EOS_ID

INF = math.inf


class PruneResult(NamedTuple):
    model: BackoffModel
    threshold: float


def _history_marginal(model: BackoffModel, cache: dict[Ngram, float]) -> callable:
    """Log10 marginal probability of a history under the model itself.

    Chain rule over the history words. A leading run of begin symbols
    is scored as the end-symbol unigram: sentence starts are as
    frequent as sentence ends, and the begin symbol itself carries no
    probability.
    """
    entry = model.entry
    eos_lp = model.probs[(EOS_ID,)]

    def marginal(h: Ngram) -> float:
        got = cache.get(h)
        if got is not None:
            return got
        j = 0
        while j < len(h) and h[j] == BOS_ID:
            j += 1
        acc = eos_lp if j else 0.0
        for i in range(j, len(h)):
            acc += resolve_logprob(entry, h[:i], h[i])
        cache[h] = acc
        return acc

    return marginal


def entropy_scores(model: BackoffModel) -> dict[Ngram, float]:
    """Raw removal scores (nats) for every entry of order >= 2.

    Pure begin-symbol placeholders score 0: once their continuations
    are gone they carry no probability mass and are exactly free to
    drop.
    """
    cached = getattr(model, "_entropy_scores", None)
    if cached is not None:
        return cached

    probs = model.probs
    bows = model.backoffs
    entry = model.entry
    marginal = _history_marginal(model, {})

    children: dict[Ngram, list[Ngram]] = {}
    for g in probs:
        if len(g) >= 2:
            children.setdefault(g[:-1], []).append(g)

    scores: dict[Ngram, float] = {}
    log10 = math.log10
    for h, kids in children.items():
        # Mass totals at this history: num/den are the numerator and
        # denominator of its backoff weight.
        num = 1.0
        den = 1.0
        lowers = []
        suffix = h[1:]
        for g in kids:
            p = 10.0 ** probs[g]
            lo_log = resolve_logprob(entry, suffix, g[-1])
            lowers.append(lo_log)
            num -= p
            den -= 10.0 ** lo_log
        if num < 0.0:
            num = 0.0
        bow_log = bows.get(h, 0.0)
        marg = 10.0 ** marginal(h)
        for g, lo_log in zip(kids, lowers):
            if g[-1] == BOS_ID:
                scores[g] = 0.0
                continue
            p_w = 10.0 ** probs[g]
            p_lo = 10.0 ** lo_log
            new_num = num + p_w
            new_den = den + p_lo
            if new_num <= 0.0 or new_den <= 0.0:
                scores[g] = INF
                continue
            new_bow_log = log10(new_num) - log10(new_den)
            delta_word = lo_log + new_bow_log - probs[g]
            delta_hist = new_bow_log - bow_log
            scores[g] = -marg * (p_w * delta_word + num * delta_hist) * LN10

    model._entropy_scores = scores
    return scores


def effective_scores(model: BackoffModel) -> dict[Ngram, float]:
    """Removal thresholds with prefix protection folded in.

    An entry leaves the model at threshold t iff its effective score is
    <= t: the max of its own score and the effective scores of its
    stored extensions, so prefixes survive as long as any extension
    does and retained sets stay nested across thresholds.
    """
    cached = getattr(model, "_effective_scores", None)
    if cached is not None:
        return cached
    eff = dict(entropy_scores(model))
    by_order: list[list[Ngram]] = [[] for _ in range(model.order + 1)]
    for g in eff:
        by_order[len(g)].append(g)
    for k in range(model.order, 2, -1):
        for g in by_order[k]:
            h = g[:-1]
            s = eff[g]
            if s > eff[h]:
                eff[h] = s
    model._effective_scores = eff
    return eff


def prune_entropy(model: BackoffModel, threshold: float) -> BackoffModel:
    """Drop entries whose effective removal score is <= threshold."""
    if threshold < 0:
        raise ValueError(f"threshold must be nonnegative, got {threshold}")
    eff = effective_scores(model)
    probs = {g: lp for g, lp in model.probs.items() if eff.get(g, INF) > threshold}

    backoffs: dict[Ngram, float] = {}
    n = model.order
    if n > 1:
        children: dict[Ngram, list[Ngram]] = {}
        for g in probs:
            if len(g) >= 2:
                children.setdefault(g[:-1], []).append(g)

        def entry(g: Ngram):
            lp = probs.get(g)
            if lp is None:
                return None
            return lp, backoffs.get(g)

        log10 = math.log10
        for k in range(1, n):
            for g in probs:
                if len(g) != k:
                    continue
                kids = children.get(g)
                if not kids:
                    backoffs[g] = 0.0
                    continue
                num = 1.0
                den = 1.0
                suffix = g[1:]
                for kid in kids:
                    num -= 10.0 ** probs[kid]
                    den -= 10.0 ** resolve_logprob(entry, suffix, kid[-1])
                if num > 0.0 and den > 0.0:
                    backoffs[g] = log10(num) - log10(den)
                else:
                    backoffs[g] = 0.0
    return BackoffModel(
        order=n, vocab=model.vocab, probs=probs, backoffs=backoffs
    )


def prune_to_size(model: BackoffModel, target: int) -> PruneResult:
    """Largest pruned model with at most ``target`` total entries.

    Retained size is a step function of the threshold (retained sets
    are nested), so the achieved threshold is read directly off the
    sorted effective scores instead of numerically bisected.
    """
    unigrams = model.per_order_counts()[0]
    if target < unigrams:
        raise TargetTooSmall(
            f"target {target} below the {unigrams}-entry unigram floor"
        )
    total = model.total_entries()
    if target >= total:
        return PruneResult(model, 0.0)
    ranked = sorted(effective_scores(model).values(), reverse=True)
    threshold = max(ranked[target - unigrams], 0.0)
    return PruneResult(prune_entropy(model, threshold), threshold)
