"""N-gram occurrence counting with shard-mergeable tables.

Each sentence is padded with n-1 begin symbols and one end symbol, so
the first real word always has a full-length history and the end symbol
is a predicted event. Every 1..n-gram window of the padded sentence is
counted, except the bare begin-symbol unigram: <s> is context, never a
predicted token. Runs of begin symbols (e.g. the (<s>,<s>) bigram of an
order-3 table) stay in the table because they serve as histories.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .errors import AdjustedMerge, AlreadyAdjusted, BadOrder, OrderMismatch
from .io import open_text
from .vocab import BOS_ID, EOS_ID

Ngram = tuple[int, ...]


@dataclass
class CountTable:
    """Per-order n-gram counts; ``adjusted`` marks Kneser-Ney
    continuation counts at the lower orders."""

    order: int
    table: dict[Ngram, int] = field(default_factory=dict)
    adjusted: bool = False

    def total_entries(self) -> int:
        return len(self.table)

    def entries_of_order(self, k: int) -> dict[Ngram, int]:
        return {g: c for g, c in self.table.items() if len(g) == k}

    def per_order_counts(self) -> list[int]:
        sizes = [0] * self.order
        for g in self.table:
            sizes[len(g) - 1] += 1
        return sizes


def count_ngrams(sentences: Iterable[Sequence[int]], order: int) -> CountTable:
    """Count all 1..order-gram windows over the padded id stream."""
    if not isinstance(order, int) or order < 1:
        raise BadOrder(f"order must be a positive integer, got {order!r}")
    counter: Counter[Ngram] = Counter()
    pad = (BOS_ID,) * (order - 1)
    for sent in sentences:
        padded = pad + tuple(sent) + (EOS_ID,)
        m = len(padded)
        for k in range(1, order + 1):
            counter.update(padded[i : i + k] for i in range(m - k + 1))
    counter.pop((BOS_ID,), None)  # <s> is never a predicted unigram
    return CountTable(order=order, table=dict(counter))


def merge_counts(a: CountTable, b: CountTable) -> CountTable:
    """Entrywise sum of two raw tables of the same order."""
    if a.order != b.order:
        raise OrderMismatch(f"cannot merge order {a.order} with order {b.order}")
    if a.adjusted or b.adjusted:
        raise AdjustedMerge("adjusted tables cannot be merged")
    merged = Counter(a.table)
    merged.update(b.table)
    return CountTable(order=a.order, table=dict(merged))


def adjust_counts_kn(raw: CountTable) -> CountTable:
    """Replace lower-order counts with Kneser-Ney continuation counts.

    The highest order keeps raw counts. A lower-order entry becomes the
    number of distinct words extending it to the left, except entries
    whose history starts with the begin symbol: those cannot be freely
    left-extended, so their raw counts stay.
    """
    if raw.adjusted:
        raise AlreadyAdjusted("table already holds continuation counts")
    n = raw.order
    out: dict[Ngram, int] = {}

    # Distinct left-extension counts per (k+1)-gram suffix. Two distinct
    # keys with the same suffix differ exactly in their first word.
    cont: Counter[Ngram] = Counter()
    for g in raw.table:
        if len(g) > 1:
            cont[g[1:]] += 1

    for g, c in raw.table.items():
        if len(g) == n or (len(g) > 1 and g[0] == BOS_ID):
            out[g] = c
        else:
            out[g] = cont[g]
    return CountTable(order=n, table=out, adjusted=True)


def write_counts(counts: CountTable, path: str) -> None:
    """Write ``w1 .. wk<TAB>count`` lines sorted by id sequence."""
    with open_text(path, "w") as fh:
        for g in sorted(counts.table):
            fh.write(" ".join(map(str, g)) + f"\t{counts.table[g]}\n")


def read_counts(path: str, adjusted: bool = False) -> CountTable:
    table: dict[Ngram, int] = {}
    order = 1
    with open_text(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            ids, c = line.split("\t")
            g = tuple(int(t) for t in ids.split())
            table[g] = int(c)
            if len(g) > order:
                order = len(g)
    return CountTable(order=order, table=table, adjusted=adjusted)
