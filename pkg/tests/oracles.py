"""Independent reference implementations the tests check against.

Everything here recomputes answers from first principles: direct
formula application, exhaustive enumeration, or grid search. None of
it reuses the library's estimation, pruning, or alignment code paths.
"""

from __future__ import annotations

import math
from functools import lru_cache

from ngramlm.counts import CountTable
from ngramlm.model import BackoffModel
from ngramlm.vocab import BOS_ID, EOS_ID


# ----------------------------------------------------------------------
# interpolated modified Kneser-Ney by direct formula
# ----------------------------------------------------------------------

class KnOracle:
    """Direct-formula interpolated KN probabilities from adjusted counts.

    Works top-down per query from the count table alone: no backoff
    weights, no stored model. Probabilities are linear.
    """

    def __init__(self, counts: CountTable, vocab_size: int, discounts):
        assert counts.adjusted
        self.order = counts.order
        self.vocab_size = vocab_size
        self.table = counts.table

        events = [
            [] for _ in range(self.order + 1)
        ]  # per order: (ngram, count) of real events
        for g, c in self.table.items():
            if g[-1] != BOS_ID:
                events[len(g)].append((g, c))

        if discounts == "auto":
            self.d = []
            for k in range(1, self.order + 1):
                coc = {}
                for _, c in events[k]:
                    if c <= 4:
                        coc[c] = coc.get(c, 0) + 1
                y = coc[1] / (coc[1] + 2 * coc[2])
                self.d.append(
                    (
                        1 - 2 * y * coc[2] / coc[1],
                        2 - 3 * y * coc[3] / coc[2],
                        3 - 4 * y * coc.get(4, 0) / coc[3],
                    )
                )
        elif isinstance(discounts, (int, float)):
            self.d = [(discounts,) * 3] * self.order
        else:
            self.d = [(d,) * 3 for d in discounts]

        # History aggregates: total adjusted mass and total discount.
        self.totals: list[dict] = [dict() for _ in range(self.order + 1)]
        self.dmass: list[dict] = [dict() for _ in range(self.order + 1)]
        for k in range(1, self.order + 1):
            t, dm = self.totals[k], self.dmass[k]
            for g, c in events[k]:
                h = g[:-1]
                t[h] = t.get(h, 0) + c
                dm[h] = dm.get(h, 0.0) + min(self._disc(c, k), c)

    def _disc(self, c: int, k: int) -> float:
        d1, d2, d3 = self.d[k - 1]
        return d1 if c == 1 else d2 if c == 2 else d3

    def prob(self, ngram: tuple[int, ...]) -> float:
        h, w = ngram[:-1], ngram[-1]
        k = len(ngram)
        if w == BOS_ID:
            return 1e-99
        if k == 1:
            total = self.totals[1][()]
            gamma = self.dmass[1][()] / total
            c = self.table.get(ngram, 0)
            base = max(c - self._disc(c, 1), 0.0) / total if c else 0.0
            return base + gamma / (self.vocab_size - 1)
        total = self.totals[k].get(h)
        if total is None:
            # Unseen history: pure backoff with weight 1.
            return self.prob(ngram[1:])
        c = self.table.get(ngram, 0)
        base = max(c - self._disc(c, k), 0.0) / total if c else 0.0
        gamma = self.dmass[k][h] / total
        return base + gamma * self.prob(ngram[1:])


# ----------------------------------------------------------------------
# pruning: brute-force weighted relative entropy per candidate
# ----------------------------------------------------------------------

def history_marginal_linear(model: BackoffModel, h: tuple[int, ...]) -> float:
    """Model's own marginal of a history: chain rule, with a leading
    begin-symbol run scored as the end-symbol unigram (the model puts
    no mass on the begin symbol itself)."""
    j = 0
    while j < len(h) and h[j] == BOS_ID:
        j += 1
    lp = model.probs[(EOS_ID,)] if j else 0.0
    for i in range(j, len(h)):
        lp += model.prob(h[:i], h[i])
    return 10.0 ** lp


def brute_removal_score(model: BackoffModel, ngram: tuple[int, ...]) -> float:
    """Weighted KL of removing one entry, by full event-space sums.

    Rebuilds the history's post-removal conditional distribution over
    the entire vocabulary (including the recomputed backoff weight) and
    sums P(w|h) * ln(P(w|h)/P'(w|h)) directly.
    """
    h = ngram[:-1]
    stored = {
        g[-1]: 10.0 ** lp
        for g, lp in model.probs.items()
        if len(g) == len(ngram) and g[:-1] == h
    }
    lower = {w: 10.0 ** model.prob(h[1:], w) for w in range(len(model.vocab))}
    # Post-removal backoff weight over the whole vocabulary.
    kept = {w: p for w, p in stored.items() if w != ngram[-1]}
    new_bow = (1.0 - sum(kept.values())) / (1.0 - sum(lower[w] for w in kept))
    kl = 0.0
    for w in range(len(model.vocab)):
        p = stored.get(w)
        if p is None:
            p = 10.0 ** model.prob(h, w)
        q = kept.get(w)
        if q is None:
            q = new_bow * lower[w]
        kl += p * math.log(p / q)
    return history_marginal_linear(model, h) * kl


def brute_prune_retained(model: BackoffModel, threshold: float) -> set:
    """Removal decisions by definition: highest order first, score each
    entry by brute force, keep prefixes of survivors and unigrams."""
    removed: set = set()
    for k in range(model.order, 1, -1):
        for g in model.entries_of_order(k):
            extended = any(
                x[:-1] == g and x not in removed
                for x in model.entries_of_order(k + 1)
            ) if k < model.order else False
            if extended:
                continue
            # A childless begin-symbol placeholder is exactly free.
            score = 0.0 if g[-1] == BOS_ID else brute_removal_score(model, g)
            if score <= threshold:
                removed.add(g)
    return {g for g in model.probs if g not in removed}


# ----------------------------------------------------------------------
# edit distance by memoized recursion
# ----------------------------------------------------------------------

def edit_distance_enum(a: tuple, b: tuple) -> int:
    """Minimal edit count by top-down enumeration of alignments."""

    @lru_cache(maxsize=None)
    def rec(i: int, j: int) -> int:
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        best = rec(i + 1, j + 1) + (a[i] != b[j])
        ins = rec(i + 1, j) + 1
        dele = rec(i, j + 1) + 1
        return min(best, ins, dele)

    return rec(0, 0)


# ----------------------------------------------------------------------
# grid searches
# ----------------------------------------------------------------------

def em_grid_best(p1: list[float], p2: list[float], step: float = 0.01) -> float:
    """Two-component mixture weight maximizing total log-likelihood."""
    best_lam, best_ll = 0.0, -math.inf
    steps = round(1.0 / step)
    for i in range(steps + 1):
        lam = i * step
        ll = sum(math.log(lam * a + (1.0 - lam) * b) for a, b in zip(p1, p2))
        if ll > best_ll:
            best_ll, best_lam = ll, lam
    return best_lam


def conditional_mass(model, history, vocab_size: int) -> float:
    """Sum of P(w | history) over the entire vocabulary."""
    return sum(10.0 ** model.prob(history, w) for w in range(vocab_size))
