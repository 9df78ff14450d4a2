"""Shard partitioning of a backoff model.

An n-gram lives on shard splitmix64(first word id) mod S, so an entry
and its same-head prefixes colocate and a query's backoff chain fans
out to few shards. Shards store raw (logprob, backoff) entries only;
clients compose the backoff recursion.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..counts import Ngram
from ..errors import ParseError
from ..io import open_text
from ..model import BackoffModel, Entry


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return x ^ (x >> 31)


def shard_of(ngram: Ngram, num_shards: int) -> int:
    """Shard index owning ``ngram``: keyed on its first word id."""
    return _splitmix64(ngram[0]) % num_shards


@dataclass
class ShardStore:
    """One shard's entries; immutable after load, safe to share."""

    index: int
    num_shards: int
    order: int
    vocab_size: int
    entries: dict[Ngram, Entry]

    def get(self, ngram: Ngram) -> Entry | None:
        return self.entries.get(ngram)

    def entry_count(self) -> int:
        return len(self.entries)


@dataclass
class ShardPlan:
    num_shards: int
    order: int
    vocab_size: int
    per_shard_counts: list[int]


def shard_model(model: BackoffModel, num_shards: int) -> tuple[list[ShardStore], ShardPlan]:
    """Partition every model entry onto exactly one shard."""
    if num_shards < 1:
        raise ValueError(f"need at least one shard, got {num_shards}")
    buckets: list[dict[Ngram, Entry]] = [{} for _ in range(num_shards)]
    bows = model.backoffs
    for g, lp in model.probs.items():
        buckets[shard_of(g, num_shards)][g] = (lp, bows.get(g))
    stores = [
        ShardStore(
            index=i,
            num_shards=num_shards,
            order=model.order,
            vocab_size=len(model.vocab),
            entries=bucket,
        )
        for i, bucket in enumerate(buckets)
    ]
    plan = ShardPlan(
        num_shards=num_shards,
        order=model.order,
        vocab_size=len(model.vocab),
        per_shard_counts=[len(b) for b in buckets],
    )
    return stores, plan


# ----------------------------------------------------------------------
# shard store files and the shard -> endpoint manifest
# ----------------------------------------------------------------------

def write_shard(store: ShardStore, path: str) -> None:
    with open_text(path, "w") as fh:
        fh.write(
            f"shard {store.index} of {store.num_shards} "
            f"vocab {store.vocab_size} order {store.order}\n"
        )
        for g in sorted(store.entries):
            lp, bow = store.entries[g]
            ids = " ".join(map(str, g))
            fh.write(f"{ids}\t{lp!r}\t{'' if bow is None else repr(bow)}\n")


def read_shard(path: str) -> ShardStore:
    with open_text(path) as fh:
        head = fh.readline().split()
        if len(head) != 8 or head[0] != "shard" or head[2] != "of":
            raise ParseError(f"bad shard header {' '.join(head)!r}", 1)
        index, num_shards = int(head[1]), int(head[3])
        vocab_size, order = int(head[5]), int(head[7])
        entries: dict[Ngram, Entry] = {}
        for no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                ids, lp, bow = line.split("\t")
                g = tuple(int(t) for t in ids.split())
                entries[g] = (float(lp), float(bow) if bow else None)
            except ValueError:
                raise ParseError(f"bad shard entry {line!r}", no) from None
    return ShardStore(
        index=index,
        num_shards=num_shards,
        order=order,
        vocab_size=vocab_size,
        entries=entries,
    )


def write_manifest(plan: ShardPlan, endpoints: list[str], path: str) -> None:
    """Map shard index -> endpoint (``host:port`` or a store path)."""
    if len(endpoints) != plan.num_shards:
        raise ValueError(
            f"{plan.num_shards} shards need {plan.num_shards} endpoints, "
            f"got {len(endpoints)}"
        )
    with open_text(path, "w") as fh:
        fh.write(
            f"shards {plan.num_shards} vocab {plan.vocab_size} order {plan.order}\n"
        )
        for i, ep in enumerate(endpoints):
            fh.write(f"shard {i} {ep}\n")


def read_manifest(path: str) -> tuple[ShardPlan, list[str]]:
    with open_text(path) as fh:
        head = fh.readline().split()
        if len(head) != 6 or head[0] != "shards":
            raise ParseError(f"bad manifest header {' '.join(head)!r}", 1)
        num_shards, vocab_size, order = int(head[1]), int(head[3]), int(head[5])
        endpoints: list[str] = [""] * num_shards
        for no, line in enumerate(fh, start=2):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 3 or fields[0] != "shard":
                raise ParseError(f"bad manifest line {line!r}", no)
            endpoints[int(fields[1])] = fields[2]
    if any(not ep for ep in endpoints):
        raise ParseError("manifest does not list every shard endpoint")
    plan = ShardPlan(
        num_shards=num_shards,
        order=order,
        vocab_size=vocab_size,
        per_shard_counts=[],
    )
    return plan, endpoints
