"""Backoff n-gram models: interpolated Kneser-Ney estimation, queries,
linear interpolation, and held-out EM weight fitting.

Probabilities and backoff weights are stored as base-10 logs (the ARPA
convention); accumulation during estimation happens in linear space and
converts once at the boundary. A query for P(w | h) walks the longest
stored suffix of the last n-1 history words, multiplying the backoff
weights of the skipped histories.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

from .counts import CountTable, Ngram
from .errors import (
    BadWeights,
    DegenerateDiscounts,
    EmptyHeldout,
    VocabMismatch,
)
from .vocab import BOS_ID, EOS_ID, Vocabulary

# Log-probability surrogate for events that never occur (the begin
# symbol as a predicted word). Finite so files stay parseable.
LOG10_NEVER = -99.0

LN10 = math.log(10.0)


# ----------------------------------------------------------------------
# weight vectors
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class WeightVector:
    """Named real coefficients over feature scores or component models."""

    values: tuple[float, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) != len(self.labels):
            raise BadWeights("values and labels differ in length")
        if any(not math.isfinite(v) for v in self.values):
            raise BadWeights("weights must be finite")

    @classmethod
    def uniform(cls, labels: Sequence[str]) -> "WeightVector":
        k = len(labels)
        return cls(values=(1.0 / k,) * k, labels=tuple(labels))

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, self.values))

    def get(self, label: str) -> float:
        try:
            return self.values[self.labels.index(label)]
        except ValueError:
            raise BadWeights(f"no weight for label {label!r}") from None


def check_simplex(weights: WeightVector, size: int, tol: float = 1e-9) -> None:
    if len(weights.values) != size:
        raise BadWeights(f"expected {size} weights, got {len(weights.values)}")
    if any(v < 0 for v in weights.values):
        raise BadWeights("weights must be nonnegative")
    if abs(sum(weights.values) - 1.0) > tol:
        raise BadWeights(f"weights must sum to 1, got {sum(weights.values)}")


# ----------------------------------------------------------------------
# model representation and queries
# ----------------------------------------------------------------------

Entry = tuple[float, float | None]
EntryGetter = Callable[[Ngram], Entry | None]


@dataclass
class BackoffModel:
    """Stored n-grams with log10 probabilities and backoff weights.

    ``probs`` maps every stored n-gram (length 1..order) to its log10
    conditional probability; ``backoffs`` maps every stored n-gram of
    length < order to its log10 backoff weight (0.0 when it has no
    continuations). Immutable once built; queries are thread-safe.
    """

    order: int
    vocab: Vocabulary
    probs: dict[Ngram, float]
    backoffs: dict[Ngram, float]

    def entry(self, ngram: Ngram) -> Entry | None:
        lp = self.probs.get(ngram)
        if lp is None:
            return None
        return lp, self.backoffs.get(ngram)

    def total_entries(self) -> int:
        return len(self.probs)

    def per_order_counts(self) -> list[int]:
        sizes = [0] * self.order
        for g in self.probs:
            sizes[len(g) - 1] += 1
        return sizes

    def entries_of_order(self, k: int) -> list[Ngram]:
        return [g for g in self.probs if len(g) == k]

    def prob(self, history: Sequence[int], word: int) -> float:
        """Log10 P(word | history), truncated to the last order-1 ids."""
        h = tuple(history)
        if self.order > 1:
            h = h[-(self.order - 1):]
        else:
            h = ()
        return resolve_logprob(self.entry, h, word)


def resolve_logprob(get_entry: EntryGetter, history: Ngram, word: int) -> float:
    """Backoff recursion over entry lookups.

    Shared by local models and the distributed client so both produce
    bit-identical floats: backoff weights of skipped histories are
    accumulated longest-first, then the matched log probability added.
    """
    acc = 0.0
    h = history
    while True:
        e = get_entry(h + (word,))
        if e is not None:
            return acc + e[0]
        if not h:
            raise KeyError(f"word id {word} has no unigram entry")
        hist = get_entry(h)
        if hist is not None and hist[1] is not None:
            acc += hist[1]
        h = h[1:]


def sentence_events(
    sent: Sequence[int], order: int, include_eos: bool = True
) -> Iterable[tuple[Ngram, int]]:
    """Yield (history, word) prediction events for one id sentence."""
    span = order - 1
    ctx: Ngram = (BOS_ID,) * span
    for w in sent:
        yield ctx, w
        if span:
            ctx = (ctx + (w,))[-span:]
    if include_eos:
        yield ctx, EOS_ID


# ----------------------------------------------------------------------
# interpolated modified Kneser-Ney estimation
# ----------------------------------------------------------------------

def _auto_discounts(coc: dict[int, int], order_k: int) -> tuple[float, float, float]:
    """Count-of-count discounts: D1 = 1 - 2*Y*n2/n1 with Y = n1/(n1+2*n2),
    and the analogous D2, D3+ for twice- and thrice-seen n-grams."""
    n1 = coc.get(1, 0)
    n2 = coc.get(2, 0)
    n3 = coc.get(3, 0)
    n4 = coc.get(4, 0)
    if n1 == 0 or n2 == 0 or n3 == 0:
        raise DegenerateDiscounts(
            f"order {order_k}: counts-of-counts n1={n1} n2={n2} n3={n3} "
            "leave a discount undefined; supply explicit discounts"
        )
    y = n1 / (n1 + 2.0 * n2)
    d1 = 1.0 - 2.0 * y * n2 / n1
    d2 = 2.0 - 3.0 * y * n3 / n2
    d3 = 3.0 - 4.0 * y * n4 / n3
    for i, d in enumerate((d1, d2, d3), start=1):
        if not (0.0 <= d <= i):
            raise DegenerateDiscounts(
                f"order {order_k}: discount D{i}={d:.4f} out of [0,{i}]"
            )
    return d1, d2, d3


def _resolve_discounts(
    discounts, order: int, per_order_coc: list[dict[int, int]]
) -> list[tuple[float, float, float]]:
    if discounts == "auto":
        return [_auto_discounts(per_order_coc[k], k + 1) for k in range(order)]
    if isinstance(discounts, (int, float)):
        values = [float(discounts)] * order
    else:
        values = [float(d) for d in discounts]
        if len(values) != order:
            raise ValueError(f"need {order} per-order discounts, got {len(values)}")
    for d in values:
        if not (math.isfinite(d) and d > 0):
            raise ValueError(f"explicit discounts must be positive, got {d}")
    return [(d, d, d) for d in values]


def estimate_kn(
    counts: CountTable,
    vocab: Vocabulary,
    discounts="auto",
) -> BackoffModel:
    """Estimate an interpolated modified-KN backoff model.

    ``counts`` must hold continuation-adjusted counts (see
    :func:`ngramlm.counts.adjust_counts_kn`). ``discounts`` is "auto"
    for count-of-count estimates (three discounts per order), or an
    explicit positive float (single or per-order list) applied at every
    count.

    The unigram distribution is interpolated with the uniform
    distribution over the predictable vocabulary, so every word
    including <unk> has positive probability. Pure begin-symbol
    n-grams are kept as history entries with the -99 surrogate.
    """
    if not counts.adjusted:
        raise ValueError("estimate_kn requires continuation-adjusted counts")
    n = counts.order
    nwords = len(vocab)

    per_order: list[dict[Ngram, int]] = [{} for _ in range(n)]
    for g, c in counts.table.items():
        per_order[len(g) - 1][g] = c

    # Count-of-counts over real events; begin-symbol placeholders are
    # history structure, not events.
    per_order_coc: list[dict[int, int]] = []
    for k in range(n):
        coc: dict[int, int] = {}
        for g, c in per_order[k].items():
            if g[-1] != BOS_ID and c <= 4:
                coc[c] = coc.get(c, 0) + 1
        per_order_coc.append(coc)

    d_by_order = _resolve_discounts(discounts, n, per_order_coc)

    def discount(c: int, d123: tuple[float, float, float]) -> float:
        if c >= 3:
            return d123[2]
        return d123[c - 1]

    lin: dict[Ngram, float] = {}
    gamma: dict[Ngram, float] = {}  # interpolation mass per history

    # Unigrams: discounted continuation counts plus a uniform floor.
    d123 = d_by_order[0]
    uni = per_order[0]
    total = float(sum(uni.values()))
    gamma_num = 0.0
    for c in uni.values():
        d = discount(c, d123)
        gamma_num += d if d <= c else c
    gamma0 = gamma_num / total
    if gamma0 <= 0.0:
        raise DegenerateDiscounts("no discount mass at order 1")
    floor = gamma0 / (nwords - 1)  # uniform over everything but <s>
    for wid in range(nwords):
        if wid == BOS_ID:
            continue
        c = uni.get((wid,), 0)
        if c:
            d = discount(c, d123)
            lin[(wid,)] = (c - d if d <= c else 0.0) / total + floor
        else:
            lin[(wid,)] = floor

    for k in range(2, n + 1):
        entries = per_order[k - 1]
        d123 = d_by_order[k - 1]
        totals: dict[Ngram, float] = {}
        gnums: dict[Ngram, float] = {}
        for g, c in entries.items():
            if g[-1] == BOS_ID:
                continue
            h = g[:-1]
            totals[h] = totals.get(h, 0.0) + c
            d = discount(c, d123)
            gnums[h] = gnums.get(h, 0.0) + (d if d <= c else c)
        for h, num in gnums.items():
            gamma[h] = num / totals[h]
        for g, c in entries.items():
            if g[-1] == BOS_ID:
                continue
            h = g[:-1]
            d = discount(c, d123)
            lin[g] = (c - d if d <= c else 0.0) / totals[h] + gamma[h] * lin[g[1:]]

    probs: dict[Ngram, float] = {}
    backoffs: dict[Ngram, float] = {}
    log10 = math.log10
    for wid in range(nwords):
        g = (wid,)
        probs[g] = LOG10_NEVER if wid == BOS_ID else log10(lin[g])
    for k in range(2, n + 1):
        for g in per_order[k - 1]:
            probs[g] = LOG10_NEVER if g[-1] == BOS_ID else log10(lin[g])
    if n > 1:
        for g in probs:
            if len(g) < n:
                gm = gamma.get(g)
                backoffs[g] = log10(gm) if gm is not None else 0.0
    return BackoffModel(order=n, vocab=vocab, probs=probs, backoffs=backoffs)


# ----------------------------------------------------------------------
# mixtures
# ----------------------------------------------------------------------

def _check_shared_vocab(components: Sequence[BackoffModel]) -> None:
    if not components:
        raise ValueError("need at least one component model")
    first = components[0].vocab.words
    for m in components[1:]:
        if m.vocab.words != first:
            raise VocabMismatch("component models must share one vocabulary")


@dataclass
class MixtureModel:
    """Linear interpolation of backoff models, evaluated on the fly."""

    components: list[BackoffModel]
    weights: WeightVector

    def __post_init__(self):
        _check_shared_vocab(self.components)
        check_simplex(self.weights, len(self.components))

    @property
    def order(self) -> int:
        return max(m.order for m in self.components)

    @property
    def vocab(self) -> Vocabulary:
        return self.components[0].vocab

    def prob(self, history: Sequence[int], word: int) -> float:
        return mixture_prob(self, history, word)


def mixture_prob(mix: MixtureModel, history: Sequence[int], word: int) -> float:
    """Log10 of the exact weighted mixture sum at (history, word)."""
    p = 0.0
    for lam, m in zip(mix.weights.values, mix.components):
        p += lam * 10.0 ** m.prob(history, word)
    return math.log10(p)


def interpolate_static(
    components: Sequence[BackoffModel], weights: WeightVector
) -> BackoffModel:
    """Collapse a mixture into one backoff model.

    The result stores the union of component n-grams; each stored entry
    carries the exact mixture probability, and backoff weights are
    recomputed bottom-up so conditional distributions renormalize.
    Off-union queries back off, so they approximate (rather than equal)
    the on-the-fly mixture.
    """
    _check_shared_vocab(components)
    check_simplex(weights, len(components))
    vocab = components[0].vocab
    n = max(m.order for m in components)
    lam = weights.values

    by_order: list[set[Ngram]] = [set() for _ in range(n)]
    for m in components:
        for g in m.probs:
            by_order[len(g) - 1].add(g)

    probs: dict[Ngram, float] = {}
    log10 = math.log10
    for k in range(1, n + 1):
        for g in sorted(by_order[k - 1]):
            if g[-1] == BOS_ID:
                probs[g] = LOG10_NEVER
                continue
            h, w = g[:-1], g[-1]
            p = 0.0
            for li, m in zip(lam, components):
                if li:
                    p += li * 10.0 ** m.prob(h, w)
            probs[g] = log10(p)

    backoffs: dict[Ngram, float] = {}
    if n > 1:
        children: dict[Ngram, list[Ngram]] = {}
        for k in range(2, n + 1):
            for g in by_order[k - 1]:
                children.setdefault(g[:-1], []).append(g)
        entry = lambda g: (probs[g], backoffs.get(g)) if g in probs else None
        for k in range(1, n):
            for g in sorted(by_order[k - 1]):
                kids = children.get(g)
                if not kids:
                    backoffs[g] = 0.0
                    continue
                num = 1.0
                den = 1.0
                suffix = g[1:]
                for kid in sorted(kids):
                    num -= 10.0 ** probs[kid]
                    den -= 10.0 ** resolve_logprob(entry, suffix, kid[-1])
                if num > 0.0 and den > 0.0:
                    backoffs[g] = log10(num) - log10(den)
                else:
                    # Continuations cover the vocabulary: no mass left
                    # to distribute.
                    backoffs[g] = 0.0
    return BackoffModel(order=n, vocab=vocab, probs=probs, backoffs=backoffs)


# ----------------------------------------------------------------------
# held-out EM weight fitting
# ----------------------------------------------------------------------

def fit_weights_em(
    components: Sequence[BackoffModel],
    heldout: Iterable[Sequence[int]],
    init: WeightVector | None = None,
    max_iters: int = 100,
    tol: float = 1e-7,
    trace: list[float] | None = None,
) -> WeightVector:
    """Fit mixture weights maximizing held-out probability by EM.

    The held-out log-likelihood is non-decreasing across iterations
    (appended to ``trace`` when given); iteration stops once the gain
    drops below ``tol`` or after ``max_iters``. The objective is
    concave in the weights, so EM approaches the global optimum.
    """
    _check_shared_vocab(components)
    k = len(components)
    labels = tuple(f"lm{i}" for i in range(k))
    order = max(m.order for m in components)

    event_probs: list[list[float]] = []
    for sent in heldout:
        for h, w in sentence_events(sent, order):
            event_probs.append([10.0 ** m.prob(h, w) for m in components])
    if not event_probs:
        raise EmptyHeldout("held-out stream yielded no events")

    if init is None:
        lam = [1.0 / k] * k
    else:
        check_simplex(init, k)
        lam = list(init.values)
        labels = init.labels
    if k == 1:
        return WeightVector(values=(1.0,), labels=labels)

    nev = len(event_probs)
    log = math.log
    prev_ll = None
    for _ in range(max_iters):
        ll = 0.0
        post = [0.0] * k
        for row in event_probs:
            s = 0.0
            for i in range(k):
                s += lam[i] * row[i]
            ll += log(s)
            for i in range(k):
                post[i] += lam[i] * row[i] / s
        if trace is not None:
            trace.append(ll)
        if prev_ll is not None and ll - prev_ll < tol:
            break
        prev_ll = ll
        lam = [p / nev for p in post]
    return WeightVector(values=tuple(lam), labels=labels)
