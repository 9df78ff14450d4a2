"""Sharded model serving with bit-exact parity to local queries."""

from .client import DistributedClient, LocalTransport, LookupBatch, TcpTransport, rescore_remote
from .server import ShardServer, serve_shard
from .store import (
    ShardPlan,
    ShardStore,
    read_manifest,
    read_shard,
    shard_model,
    shard_of,
    write_manifest,
    write_shard,
)

__all__ = [
    "DistributedClient",
    "LocalTransport",
    "LookupBatch",
    "TcpTransport",
    "rescore_remote",
    "ShardServer",
    "serve_shard",
    "ShardPlan",
    "ShardStore",
    "read_manifest",
    "read_shard",
    "shard_model",
    "shard_of",
    "write_manifest",
    "write_shard",
]
