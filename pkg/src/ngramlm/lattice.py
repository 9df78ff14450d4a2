"""Word lattices with multi-feature edge scores.

A lattice is a DAG over dense node ids; node 0 is the start, and every
node lies on some path from the start to a final node. Each edge
carries one word id and one score per feature label (acoustic score,
LM scores, word-insertion count, ...). Scores are log-domain,
higher-better; path score under a weight vector is the weighted sum of
per-label totals.

Rescoring expands states to (node, last n-1 words) pairs so the new LM
score of every complete path equals the model's log probability of its
word sequence, end symbol included. The expansion is exact: no score
pushing or approximation.
"""

from __future__ import annotations

import heapq
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

from .counts import Ngram
from .errors import (
    CycleDetected,
    EmptyLattice,
    LabelMismatch,
    ParseError,
    UnreachableNode,
)
from .io import open_text
from .model import BackoffModel, MixtureModel, WeightVector
from .vocab import BOS_ID, EOS_ID, UNK_ID

ProbProvider = Callable[[list[tuple[Ngram, int]]], list[float]]


class Edge(NamedTuple):
    src: int
    dst: int
    word: int
    scores: tuple[float, ...]


@dataclass
class Lattice:
    """Acyclic word graph; start node is 0. Validated on construction."""

    num_nodes: int
    edges: list[Edge]
    labels: tuple[str, ...]
    finals: frozenset[int]
    times: list[float | None] | None = None

    def __post_init__(self):
        self.finals = frozenset(self.finals)
        self.labels = tuple(self.labels)
        self._validate()

    # -- structure ------------------------------------------------------

    def _validate(self) -> None:
        n = self.num_nodes
        if n < 1:
            raise EmptyLattice("lattice has no nodes")
        if len(set(self.labels)) != len(self.labels) or not self.labels:
            raise ParseError(f"bad feature labels {self.labels!r}")
        if not self.finals:
            raise UnreachableNode("lattice has no final nodes")
        if self.times is not None and len(self.times) != n:
            raise ParseError("times list does not match node count")
        for node in self.finals:
            if not 0 <= node < n:
                raise ParseError(f"final node {node} out of range")
        nlabels = len(self.labels)
        for e in self.edges:
            if not (0 <= e.src < n and 0 <= e.dst < n):
                raise ParseError(f"edge {e} references undeclared node")
            if len(e.scores) != nlabels:
                raise ParseError(f"edge {e} has {len(e.scores)} scores, want {nlabels}")
        self._topo_order()  # raises CycleDetected
        fwd = {0}
        stack = [0]
        out = self.out_edges()
        while stack:
            u = stack.pop()
            for e in out[u]:
                if e.dst not in fwd:
                    fwd.add(e.dst)
                    stack.append(e.dst)
        bwd = set(self.finals)
        rev: list[list[int]] = [[] for _ in range(n)]
        for e in self.edges:
            rev[e.dst].append(e.src)
        stack = list(self.finals)
        while stack:
            u = stack.pop()
            for p in rev[u]:
                if p not in bwd:
                    bwd.add(p)
                    stack.append(p)
        for v in range(n):
            if v not in fwd or v not in bwd:
                raise UnreachableNode(f"node {v} is on no start-to-final path")

    def _topo_order(self) -> list[int]:
        indeg = [0] * self.num_nodes
        out = self.out_edges()
        for e in self.edges:
            indeg[e.dst] += 1
        ready = [v for v in range(self.num_nodes) if indeg[v] == 0]
        order: list[int] = []
        while ready:
            u = ready.pop()
            order.append(u)
            for e in out[u]:
                indeg[e.dst] -= 1
                if indeg[e.dst] == 0:
                    ready.append(e.dst)
        if len(order) != self.num_nodes:
            raise CycleDetected("lattice graph contains a cycle")
        return order

    def out_edges(self) -> list[list[Edge]]:
        out: list[list[Edge]] = [[] for _ in range(self.num_nodes)]
        for e in self.edges:
            out[e.src].append(e)
        return out

    def depths(self) -> list[int]:
        """Longest-path level of each node from the start."""
        depth = [0] * self.num_nodes
        out = self.out_edges()
        for u in self._topo_order():
            for e in out[u]:
                if depth[u] + 1 > depth[e.dst]:
                    depth[e.dst] = depth[u] + 1
        return depth

    def canonical(self) -> "Lattice":
        return Lattice(
            num_nodes=self.num_nodes,
            edges=sorted(self.edges),
            labels=self.labels,
            finals=self.finals,
            times=self.times,
        )


# ----------------------------------------------------------------------
# file format
# ----------------------------------------------------------------------

def write_lattice(lat: Lattice, path: str) -> None:
    """Write canonical form: header, node lines, sorted edges, finals."""
    lat = lat.canonical()
    with open_text(path, "w") as fh:
        fh.write(f"N {lat.num_nodes} E {len(lat.edges)} F {' '.join(lat.labels)}\n")
        for v in range(lat.num_nodes):
            t = lat.times[v] if lat.times is not None else None
            fh.write(f"n {v}\n" if t is None else f"n {v} {t!r}\n")
        for e in lat.edges:
            scores = " ".join(repr(s) for s in e.scores)
            fh.write(f"e {e.src} {e.dst} {e.word} {scores}\n")
        fh.write("f " + " ".join(str(v) for v in sorted(lat.finals)) + "\n")


def read_lattice(path: str) -> Lattice:
    with open_text(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines:
        raise ParseError("empty lattice file")
    head = lines[0].split()
    if len(head) < 6 or head[0] != "N" or head[2] != "E" or head[4] != "F":
        raise ParseError(f"bad header {lines[0]!r}", 1)
    try:
        num_nodes = int(head[1])
        num_edges = int(head[3])
    except ValueError:
        raise ParseError(f"bad header counts {lines[0]!r}", 1) from None
    labels = tuple(head[5:])

    times: list[float | None] = [None] * num_nodes
    saw_time = False
    nodes_seen = 0
    edges: list[Edge] = []
    finals: frozenset[int] | None = None
    for no, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        kind, _, rest = line.partition(" ")
        fields = rest.split()
        if kind == "n":
            if len(fields) not in (1, 2):
                raise ParseError(f"bad node line {line!r}", no)
            v = int(fields[0])
            if not 0 <= v < num_nodes:
                raise ParseError(f"node id {v} out of range", no)
            if len(fields) == 2:
                times[v] = float(fields[1])
                saw_time = True
            nodes_seen += 1
        elif kind == "e":
            if len(fields) != 3 + len(labels):
                raise ParseError(f"bad edge line {line!r}", no)
            src, dst, word = int(fields[0]), int(fields[1]), int(fields[2])
            if not (0 <= src < num_nodes and 0 <= dst < num_nodes):
                raise ParseError(f"edge references undeclared node", no)
            scores = tuple(float(s) for s in fields[3:])
            edges.append(Edge(src, dst, word, scores))
        elif kind == "f":
            finals = frozenset(int(v) for v in fields)
        else:
            raise ParseError(f"unknown line kind {kind!r}", no)
    if nodes_seen != num_nodes:
        raise ParseError(f"header declares {num_nodes} nodes, found {nodes_seen}")
    if len(edges) != num_edges:
        raise ParseError(f"header declares {num_edges} edges, found {len(edges)}")
    if finals is None:
        raise ParseError("missing final-node line")
    for v in finals:
        if not 0 <= v < num_nodes:
            raise ParseError(f"final node {v} out of range")
    return Lattice(
        num_nodes=num_nodes,
        edges=sorted(edges),
        labels=labels,
        finals=finals,
        times=times if saw_time else None,
    )


# ----------------------------------------------------------------------
# rescoring
# ----------------------------------------------------------------------

def rescore(
    lat: Lattice,
    lm: BackoffModel | MixtureModel,
    lm_label: str = "lm",
    order: int | None = None,
) -> Lattice:
    """Replace ``lm_label`` scores with exact model log probabilities."""
    if order is None:
        order = lm.order
    vocab_size = len(lm.vocab)

    def provider(queries: list[tuple[Ngram, int]]) -> list[float]:
        return [lm.prob(h, w) for h, w in queries]

    return rescore_with_provider(lat, provider, lm_label, order, vocab_size)


def rescore_with_provider(
    lat: Lattice,
    prob_batch: ProbProvider,
    lm_label: str,
    order: int,
    vocab_size: int,
) -> Lattice:
    """Context-expansion rescoring against a batched probability source.

    States are (input node, LM context) pairs; probability queries are
    batched once per topological level of the input lattice. A final
    node that still has outgoing edges splits into a stopping copy
    (incoming edges pick up the end-symbol probability) and a
    continuing copy, keeping per-path scores exact.
    """
    if lat.num_nodes == 0 or not lat.edges:
        raise EmptyLattice("cannot rescore an empty lattice")
    if lm_label not in lat.labels:
        raise LabelMismatch(f"lattice has no feature label {lm_label!r}")
    if 0 in lat.finals:
        # The empty path's end-symbol probability has no edge to ride on.
        raise EmptyLattice("start node must not be final for rescoring")
    lm_idx = lat.labels.index(lm_label)
    span = order - 1

    out: list[list[Edge]] = [[] for _ in range(lat.num_nodes)]
    for e in sorted(lat.edges):
        out[e.src].append(e)
    depth = lat.depths()
    max_depth = max(depth)
    nodes_at: list[list[int]] = [[] for _ in range(max_depth + 1)]
    for v in range(lat.num_nodes):
        nodes_at[depth[v]].append(v)

    init_ctx: Ngram = (BOS_ID,) * span

    def push(ctx: Ngram, word: int) -> Ngram:
        return (ctx + (word,))[-span:] if span else ()

    state_id: dict[tuple[int, Ngram], int] = {(0, init_ctx): 0}
    final_copy: dict[int, int] = {}  # continuing-state id -> stopping copy id
    state_node: list[int] = [0]
    states_by_node: dict[int, list[Ngram]] = {0: [init_ctx]}
    new_edges: list[Edge] = []
    new_finals: set[int] = set()
    memo: dict[tuple[Ngram, int], float] = {}

    def state_of(node: int, ctx: Ngram) -> int:
        key = (node, ctx)
        sid = state_id.get(key)
        if sid is None:
            sid = len(state_node)
            state_id[key] = sid
            state_node.append(node)
            states_by_node.setdefault(node, []).append(ctx)
        return sid

    for level in range(max_depth + 1):
        # Gather this level's queries, one provider round per level.
        wanted: list[tuple[Ngram, int]] = []
        seen: set[tuple[Ngram, int]] = set()

        def want(ctx: Ngram, word: int) -> None:
            key = (ctx, word)
            if key not in memo and key not in seen:
                seen.add(key)
                wanted.append(key)

        for u in nodes_at[level]:
            for ctx in states_by_node.get(u, ()):
                for e in out[u]:
                    qw = e.word if 0 <= e.word < vocab_size else UNK_ID
                    want(ctx, qw)
                    if e.dst in lat.finals:
                        want(push(ctx, qw), EOS_ID)
        if wanted:
            for key, lp in zip(wanted, prob_batch(wanted)):
                memo[key] = lp

        for u in nodes_at[level]:
            for ctx in states_by_node.get(u, ()):
                src_sid = state_id[(u, ctx)]
                for e in out[u]:
                    qw = e.word if 0 <= e.word < vocab_size else UNK_ID
                    lp = memo[(ctx, qw)]
                    dst_ctx = push(ctx, qw)
                    scores = list(e.scores)
                    scores[lm_idx] = lp
                    if e.dst in lat.finals:
                        eos_lp = memo[(dst_ctx, EOS_ID)]
                        stop_scores = list(scores)
                        stop_scores[lm_idx] = lp + eos_lp
                        if out[e.dst]:
                            # Final node with continuations: split into a
                            # continuing state and a stopping copy.
                            cont = state_of(e.dst, dst_ctx)
                            stop = final_copy.get(cont)
                            if stop is None:
                                stop = len(state_node)
                                final_copy[cont] = stop
                                state_node.append(e.dst)
                                new_finals.add(stop)
                            new_edges.append(
                                Edge(src_sid, cont, e.word, tuple(scores))
                            )
                            new_edges.append(
                                Edge(src_sid, stop, e.word, tuple(stop_scores))
                            )
                        else:
                            sid = state_of(e.dst, dst_ctx)
                            new_finals.add(sid)
                            new_edges.append(
                                Edge(src_sid, sid, e.word, tuple(stop_scores))
                            )
                    else:
                        sid = state_of(e.dst, dst_ctx)
                        new_edges.append(Edge(src_sid, sid, e.word, tuple(scores)))

    times = None
    if lat.times is not None:
        times = [lat.times[v] for v in state_node]
    return Lattice(
        num_nodes=len(state_node),
        edges=sorted(new_edges),
        labels=lat.labels,
        finals=frozenset(new_finals),
        times=times,
    )


# ----------------------------------------------------------------------
# path extraction
# ----------------------------------------------------------------------

@dataclass
class Hypothesis:
    """One word sequence with its per-label feature totals."""

    words: tuple[int, ...]
    features: dict[str, float]
    combined: float


def _edge_weights(lat: Lattice, weights: WeightVector) -> list[float]:
    missing = [lb for lb in lat.labels if lb not in weights.labels]
    if missing:
        raise LabelMismatch(f"weights missing labels {missing}")
    wmap = weights.as_dict()
    coef = [wmap[lb] for lb in lat.labels]
    return [
        sum(c * s for c, s in zip(coef, e.scores)) for e in lat.edges
    ]


def nbest(lat: Lattice, weights: WeightVector, n: int) -> list[Hypothesis]:
    """Top-n distinct word sequences by combined score.

    Best-first path enumeration with the exact best-completion
    heuristic; sequences pop in nonincreasing score order, duplicates
    keep their best-scoring path. Ties break toward the
    lexicographically smallest word sequence.
    """
    if lat.num_nodes == 0 or not lat.edges:
        raise EmptyLattice("cannot extract paths from an empty lattice")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    escore = _edge_weights(lat, weights)
    order = list(enumerate(lat.edges))
    out: list[list[tuple[int, Edge]]] = [[] for _ in range(lat.num_nodes)]
    for i, e in order:
        out[e.src].append((i, e))
    for bucket in out:
        bucket.sort(key=lambda ie: (ie[1].word, ie[1].dst, ie[0]))

    # Exact max completion score from each node (0 allows stopping at a
    # final node).
    best_to_go = [-math.inf] * lat.num_nodes
    for u in reversed(lat._topo_order()):
        best = 0.0 if u in lat.finals else -math.inf
        for i, e in out[u]:
            cand = escore[i] + best_to_go[e.dst]
            if cand > best:
                best = cand
        best_to_go[u] = best

    nlabels = len(lat.labels)
    zero = (0.0,) * nlabels
    STOP = -1
    results: list[Hypothesis] = []
    seen: set[tuple[int, ...]] = set()
    # entry: (-potential, words, edge-path, node, score, features)
    heap = [(-best_to_go[0], (), (), 0, 0.0, zero)]
    while heap and len(results) < n:
        _, words, path, node, score, feats = heapq.heappop(heap)
        if node == STOP:
            if words not in seen:
                seen.add(words)
                results.append(
                    Hypothesis(
                        words=words,
                        features=dict(zip(lat.labels, feats)),
                        combined=score,
                    )
                )
            continue
        if node in lat.finals:
            heapq.heappush(heap, (-score, words, path + (STOP,), STOP, score, feats))
        for i, e in out[node]:
            nscore = score + escore[i]
            npot = nscore + best_to_go[e.dst]
            nfeats = tuple(f + s for f, s in zip(feats, e.scores))
            heapq.heappush(
                heap,
                (-npot, words + (e.word,), path + (i,), e.dst, nscore, nfeats),
            )
    return results


def best_path(lat: Lattice, weights: WeightVector) -> Hypothesis:
    """Highest combined-score complete path (lex-smallest on ties)."""
    return nbest(lat, weights, 1)[0]
