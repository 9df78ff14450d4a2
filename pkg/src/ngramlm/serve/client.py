"""Client-side batched lookups over sharded stores.

For a batch of (history, word) queries the client gathers every entry
the backoff recursion might touch (all suffix n-grams of each query and
their histories), deduplicates them, fetches each shard's share in one
request round, and resolves the recursion locally with the same
arithmetic as an unsharded model, so results are bit-identical to
local queries. A transport failure raises ShardUnavailable with no
partial results.
"""

from __future__ import annotations

import socket
import threading
from dataclasses import dataclass, field

from ..counts import Ngram
from ..errors import ShardUnavailable, VocabMismatch
from ..lattice import Lattice, rescore_with_provider
from ..model import Entry, resolve_logprob
from . import codec
from .store import ShardStore, read_manifest, shard_of


@dataclass
class LookupBatch:
    """Queries of (history ids, word id); histories at most order-1 long."""

    queries: list[tuple[Ngram, int]]


class LocalTransport:
    """In-process transport for tests and single-host use.

    Requests still round-trip through the wire codec so byte-level
    behavior matches the TCP path; ``fail_after`` injects a transport
    failure after that many rounds.
    """

    def __init__(self, store: ShardStore, fail_after: int | None = None):
        self._store = store
        self.rounds = 0
        self.fail_after = fail_after

    def get_entries(self, ngrams: list[Ngram]) -> list[Entry | None]:
        if self.fail_after is not None and self.rounds >= self.fail_after:
            raise ShardUnavailable(f"shard {self._store.index} is down")
        self.rounds += 1
        frame = codec.encode_ngrams(ngrams)
        msg_type, payload = codec.split_frame(frame[4:])
        assert msg_type == codec.MSG_GET
        reply = codec.encode_entries(
            [self._store.get(g) for g in codec.decode_ngrams(payload)]
        )
        msg_type, payload = codec.split_frame(reply[4:])
        return codec.decode_entries(payload)

    def health(self) -> int:
        return self._store.entry_count()

    def close(self) -> None:
        pass


class TcpTransport:
    """One persistent connection per shard; FIFO request/response."""

    def __init__(self, endpoint: str, timeout: float = 10.0):
        self.endpoint = endpoint
        self.rounds = 0
        host, _, port = endpoint.rpartition(":")
        try:
            self._sock = socket.create_connection((host, int(port)), timeout=timeout)
            self._sock.sendall(codec.encode_hello())
            reply = codec.read_frame(self._sock)
        except (OSError, ConnectionError) as exc:
            raise ShardUnavailable(f"cannot reach shard at {endpoint}: {exc}") from exc
        if reply is None or reply[0] != codec.MSG_HELLO_OK:
            raise ShardUnavailable(f"bad handshake from shard at {endpoint}")
        self._lock = threading.Lock()

    def _roundtrip(self, frame: bytes, want: int) -> bytes:
        with self._lock:
            try:
                self._sock.sendall(frame)
                reply = codec.read_frame(self._sock)
            except (OSError, ConnectionError) as exc:
                raise ShardUnavailable(
                    f"shard at {self.endpoint} failed mid-request: {exc}"
                ) from exc
        if reply is None:
            raise ShardUnavailable(f"shard at {self.endpoint} closed the connection")
        msg_type, payload = reply
        if msg_type == codec.MSG_ERROR:
            raise ShardUnavailable(
                f"shard at {self.endpoint}: {payload.decode('utf-8', 'replace')}"
            )
        if msg_type != want:
            raise ShardUnavailable(
                f"shard at {self.endpoint} sent unexpected message {msg_type}"
            )
        return payload

    def get_entries(self, ngrams: list[Ngram]) -> list[Entry | None]:
        self.rounds += 1
        payload = self._roundtrip(codec.encode_ngrams(ngrams), codec.MSG_ENTRIES)
        return codec.decode_entries(payload)

    def health(self) -> int:
        payload = self._roundtrip(
            codec.pack_frame(codec.MSG_HEALTH), codec.MSG_HEALTH_OK
        )
        return codec.decode_u64(payload)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


class DistributedClient:
    """Answers probability queries against sharded stores."""

    def __init__(self, transports: list, order: int, vocab_size: int):
        self.transports = transports
        self.order = order
        self.vocab_size = vocab_size

    @classmethod
    def for_stores(
        cls, stores: list[ShardStore], fail_after: int | None = None
    ) -> "DistributedClient":
        return cls(
            transports=[LocalTransport(s, fail_after) for s in stores],
            order=stores[0].order,
            vocab_size=stores[0].vocab_size,
        )

    @classmethod
    def from_manifest(cls, path: str) -> "DistributedClient":
        plan, endpoints = read_manifest(path)
        return cls(
            transports=[TcpTransport(ep) for ep in endpoints],
            order=plan.order,
            vocab_size=plan.vocab_size,
        )

    @property
    def rounds(self) -> list[int]:
        return [t.rounds for t in self.transports]

    def health(self) -> list[int]:
        return [t.health() for t in self.transports]

    def close(self) -> None:
        for t in self.transports:
            t.close()

    def batch_lookup(self, batch: LookupBatch | list[tuple[Ngram, int]]) -> list[float]:
        """Log10 probabilities for a batch, one request round per shard."""
        queries = batch.queries if isinstance(batch, LookupBatch) else batch
        if not queries:
            return []
        span = self.order - 1
        norm: list[tuple[Ngram, int]] = []
        for history, word in queries:
            h = tuple(history)[-span:] if span else ()
            for wid in (*h, word):
                if not 0 <= wid < self.vocab_size:
                    raise VocabMismatch(f"word id {wid} outside vocabulary")
            norm.append((h, word))

        num_shards = len(self.transports)
        per_shard: list[list[Ngram]] = [[] for _ in range(num_shards)]
        seen: set[Ngram] = set()

        def want(g: Ngram) -> None:
            if g not in seen:
                seen.add(g)
                per_shard[shard_of(g, num_shards)].append(g)

        for h, w in norm:
            for i in range(len(h) + 1):
                want(h[i:] + (w,))
            for i in range(len(h)):
                want(h[i:])

        fetched: dict[Ngram, Entry] = {}
        for shard_idx, ngrams in enumerate(per_shard):
            if not ngrams:
                continue
            entries = self.transports[shard_idx].get_entries(ngrams)
            for g, e in zip(ngrams, entries):
                if e is not None:
                    fetched[g] = e
        get = fetched.get
        return [resolve_logprob(get, h, w) for h, w in norm]


def rescore_remote(
    lat: Lattice,
    client: DistributedClient,
    lm_label: str = "lm",
    order: int | None = None,
) -> Lattice:
    """Lattice rescoring against sharded stores.

    Same contract as local rescoring; probability queries batch once
    per topological level, so each level costs at most one request
    round per shard. Output is bit-identical to the local path.
    """
    return rescore_with_provider(
        lat,
        client.batch_lookup,
        lm_label,
        order if order is not None else client.order,
        client.vocab_size,
    )
