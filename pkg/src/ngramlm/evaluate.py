"""Quality measures: perplexity and word error rate."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .errors import EmptyReference, ZeroProbability
from .model import LN10, BackoffModel, MixtureModel, sentence_events
from .vocab import UNK_ID


@dataclass
class SentenceScore:
    tokens: int
    log_prob: float  # natural log


@dataclass
class EvalReport:
    """Accumulated per-token log-likelihood and derived perplexity."""

    token_count: int
    total_log_prob: float  # natural log
    ppl: float
    oov_count: int
    sentences: list[SentenceScore] = field(default_factory=list)


def perplexity(
    model: BackoffModel | MixtureModel,
    test: Iterable[Sequence[int]],
    count_end_symbol: bool = True,
) -> EvalReport:
    """Perplexity of ``model`` on an id-sentence stream.

    exp of the average negative natural-log probability per predicted
    token. Unknown-id tokens score as the unknown symbol and count in
    the token total; the end symbol is predicted per sentence when
    ``count_end_symbol`` is set (the default).
    """
    total_l10 = 0.0
    ntokens = 0
    oov = 0
    per_sentence: list[SentenceScore] = []
    order = model.order
    prob = model.prob
    for sent in test:
        sent_l10 = 0.0
        sent_tokens = 0
        for h, w in sentence_events(sent, order, include_eos=count_end_symbol):
            lp = prob(h, w)
            if lp == -math.inf:
                raise ZeroProbability(f"zero probability for word id {w}")
            sent_l10 += lp
            sent_tokens += 1
            if w == UNK_ID:
                oov += 1
        total_l10 += sent_l10
        ntokens += sent_tokens
        per_sentence.append(SentenceScore(sent_tokens, sent_l10 * LN10))
    if ntokens == 0:
        raise EmptyReference("no predicted events in test stream")
    total_ln = total_l10 * LN10  # scores accumulate in log10, convert once
    return EvalReport(
        token_count=ntokens,
        total_log_prob=total_ln,
        ppl=math.exp(-total_ln / ntokens),
        oov_count=oov,
        sentences=per_sentence,
    )


@dataclass
class WerReport:
    substitutions: int
    deletions: int
    insertions: int
    ref_length: int
    wer: float

    @property
    def edits(self) -> int:
        return self.substitutions + self.deletions + self.insertions


def word_error_rate(hyp: Sequence, ref: Sequence) -> WerReport:
    """Minimal-edit-distance word error rate.

    Unit costs; on cost ties the backtrace prefers a substitution over
    an insertion+deletion pair. Normalized by the reference length.
    """
    if len(ref) == 0:
        raise EmptyReference("reference word sequence is empty")
    m, n = len(hyp), len(ref)
    # dist[i][j]: edits aligning hyp[:i] to ref[:j]
    prev = list(range(n + 1))
    rows = [prev]
    for i in range(1, m + 1):
        cur = [i] + [0] * n
        hi = hyp[i - 1]
        for j in range(1, n + 1):
            diag = prev[j - 1] + (hi != ref[j - 1])
            ins = prev[j] + 1
            dele = cur[j - 1] + 1
            cur[j] = diag if diag <= ins and diag <= dele else min(ins, dele)
        rows.append(cur)
        prev = cur

    subs = dels = inss = 0
    i, j = m, n
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            cost = hyp[i - 1] != ref[j - 1]
            if rows[i][j] == rows[i - 1][j - 1] + cost:
                subs += cost
                i -= 1
                j -= 1
                continue
        if i > 0 and rows[i][j] == rows[i - 1][j] + 1:
            inss += 1
            i -= 1
        else:
            dels += 1
            j -= 1
    edits = subs + dels + inss
    return WerReport(
        substitutions=subs,
        deletions=dels,
        insertions=inss,
        ref_length=n,
        wer=edits / n,
    )


def corpus_wer(pairs: Iterable[tuple[Sequence, Sequence]]) -> WerReport:
    """Sum per-pair edit counts; normalize by total reference length."""
    subs = dels = inss = reflen = 0
    for hyp, ref in pairs:
        r = word_error_rate(hyp, ref)
        subs += r.substitutions
        dels += r.deletions
        inss += r.insertions
        reflen += r.ref_length
    if reflen == 0:
        raise EmptyReference("tune pairs contain no reference words")
    return WerReport(
        substitutions=subs,
        deletions=dels,
        insertions=inss,
        ref_length=reflen,
        wer=(subs + dels + inss) / reflen,
    )
