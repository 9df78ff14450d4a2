"""Minimum-error-rate training of feature weights.

N-best MERT: per round, hypotheses are extracted from every lattice
under the current weights and merged into cumulative pools; then, per
search direction, the corpus error along the line w + gamma*d is an
exact piecewise-constant function computed from the upper envelope of
per-hypothesis linear score functions, and the weights move to the
midpoint of the best interval. A round's result is only accepted if it
lowers the genuinely re-decoded corpus WER, so the returned weights are
never worse than the initial ones on the tune set.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_right
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import EmptyReference, EmptyTuneSet, LabelMismatch
from .evaluate import corpus_wer, word_error_rate
from .lattice import Lattice, best_path, nbest
from .model import WeightVector

INF = math.inf


@dataclass
class TuneSet:
    """Lattices paired with reference id sequences, sharing one label set."""

    items: list[tuple[Lattice, tuple[int, ...]]]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.items:
            raise EmptyTuneSet("tune set has no items")
        if not self.labels:
            self.labels = self.items[0][0].labels
        for lat, ref in self.items:
            if lat.labels != self.labels:
                raise LabelMismatch(
                    f"lattice labels {lat.labels} != tune labels {self.labels}"
                )
            if len(ref) == 0:
                raise EmptyReference("tune reference is empty")


class Interval(NamedTuple):
    lo: float
    hi: float
    hyp: int  # index into the input line list
    error: int


def envelope_sweep(
    lines: Sequence[tuple[float, float, int]], ref_len: int
) -> tuple[list[Interval], int]:
    """Exact upper envelope of score lines gamma -> offset + slope*gamma.

    Returns the envelope as intervals covering the whole line, each
    with its winning hypothesis index and error count, plus the index
    of the argmin interval: lowest error, then widest (unbounded beats
    bounded), then leftmost. ``ref_len`` scales errors to rates for
    callers that report them; it does not affect the argmin.
    """
    if not lines:
        raise ValueError("need at least one hypothesis line")
    # Per slope keep the highest offset; among identical lines the one
    # with the lowest error (then lowest index) wins deterministically.
    best_by_slope: dict[float, tuple[float, int, int]] = {}
    for idx, (offset, slope, err) in enumerate(lines):
        cur = best_by_slope.get(slope)
        cand = (-offset, err, idx)
        if cur is None or cand < cur:
            best_by_slope[slope] = cand
    cands = sorted(
        (slope, -negoff, err, idx)
        for slope, (negoff, err, idx) in best_by_slope.items()
    )

    hull: list[tuple[float, float, int, int]] = []  # slope, offset, err, idx
    starts: list[float] = []
    for slope, offset, err, idx in cands:
        while hull:
            s0, o0, _, _ = hull[-1]
            x = (o0 - offset) / (slope - s0)  # crossing with hull top
            if x <= starts[-1]:
                hull.pop()
                starts.pop()
            else:
                break
        starts.append(-INF if not hull else x)
        hull.append((slope, offset, err, idx))

    intervals: list[Interval] = []
    for i, (slope, offset, err, idx) in enumerate(hull):
        hi = starts[i + 1] if i + 1 < len(hull) else INF
        intervals.append(Interval(starts[i], hi, idx, err))
    best = min(
        range(len(intervals)),
        key=lambda i: (
            intervals[i].error,
            -(intervals[i].hi - intervals[i].lo),
            intervals[i].lo,
        ),
    )
    return intervals, best


@dataclass
class MertResult:
    weights: WeightVector
    wer_trace: list[float] = field(default_factory=list)
    rounds: int = 0


def _interval_midpoint(lo: float, hi: float) -> float:
    if lo == -INF and hi == INF:
        return 0.0
    if lo == -INF:
        return hi - 1.0
    if hi == INF:
        return lo + 1.0
    return 0.5 * (lo + hi)


def _corpus_line_search(
    pools: list[dict[tuple[float, ...], tuple[tuple[int, ...], int]]],
    ref_lens: list[int],
    w: list[float],
    d: list[float],
) -> tuple[int, int, float]:
    """Best corpus error along w + gamma*d over pooled hypotheses.

    Returns (best_error, error_at_zero, best_gamma).
    """
    per_item: list[list[Interval]] = []
    boundaries: set[float] = set()
    for pool, ref_len in zip(pools, ref_lens):
        lines = []
        for feats, (_, err) in pool.items():
            offset = sum(wi * f for wi, f in zip(w, feats))
            slope = sum(di * f for di, f in zip(d, feats))
            lines.append((offset, slope, err))
        intervals, _ = envelope_sweep(lines, ref_len)
        per_item.append(intervals)
        for iv in intervals[1:]:
            boundaries.add(iv.lo)

    cuts = sorted(boundaries)
    spans = [(-INF, cuts[0])] if cuts else [(-INF, INF)]
    spans += [(cuts[i], cuts[i + 1]) for i in range(len(cuts) - 1)]
    if cuts:
        spans.append((cuts[-1], INF))

    def err_at(gamma: float) -> int:
        total = 0
        for intervals in per_item:
            lows = [iv.lo for iv in intervals]
            k = bisect_right(lows, gamma) - 1
            total += intervals[k].error
        return total

    best = None
    for lo, hi in spans:
        gamma = _interval_midpoint(lo, hi)
        err = err_at(gamma)
        key = (err, -(hi - lo), lo)
        if best is None or key < best[0]:
            best = (key, err, gamma)
    return best[1], err_at(0.0), best[2]


def mert(
    ts: TuneSet,
    init: WeightVector,
    directions: Sequence[Sequence[float]] | None = None,
    max_rounds: int = 8,
    nbest_size: int = 50,
    random_directions: int = 0,
    seed: int = 0,
) -> MertResult:
    """Minimize tune-set corpus WER over linear feature weights.

    ``directions`` defaults to the coordinate axes over the tune set's
    labels; ``random_directions`` adds that many seeded random
    directions per round. ``wer_trace`` holds the corpus WER of the
    held weights after each round (non-increasing by construction:
    rounds that fail to improve the re-decoded WER are rejected).
    """
    if set(ts.labels) - set(init.labels):
        raise LabelMismatch(
            f"init weights missing labels {set(ts.labels) - set(init.labels)}"
        )
    labels = ts.labels
    wmap = init.as_dict()
    w = [wmap[lb] for lb in labels]
    k = len(labels)

    axis_dirs = [[1.0 if i == j else 0.0 for j in range(k)] for i in range(k)]
    fixed_dirs = (
        [list(d) for d in directions] if directions is not None else axis_dirs
    )
    for d in fixed_dirs:
        if len(d) != k:
            raise LabelMismatch(f"direction {d} does not cover {k} labels")
    rng = random.Random(seed)

    ref_lens = [len(ref) for _, ref in ts.items]
    pools: list[dict[tuple[float, ...], tuple[tuple[int, ...], int]]] = [
        {} for _ in ts.items
    ]

    def decode_wer(values: list[float]) -> float:
        wv = WeightVector(values=tuple(values), labels=labels)
        pairs = [(best_path(lat, wv).words, ref) for lat, ref in ts.items]
        return corpus_wer(pairs).wer

    def merge_nbest(values: list[float]) -> None:
        wv = WeightVector(values=tuple(values), labels=labels)
        for pool, (lat, ref) in zip(pools, ts.items):
            for hyp in nbest(lat, wv, nbest_size):
                feats = tuple(hyp.features[lb] for lb in labels)
                err = word_error_rate(hyp.words, ref).edits
                cur = pool.get(feats)
                # Identical feature vectors tie under every weight
                # setting; the decoder would emit the lex-smallest
                # word sequence, so keep that one's error.
                if cur is None or hyp.words < cur[0]:
                    pool[feats] = (hyp.words, err)

    best_wer = decode_wer(w)
    trace = [best_wer]
    rounds_run = 0
    for _ in range(max_rounds):
        rounds_run += 1
        merge_nbest(w)
        dirs = [list(d) for d in fixed_dirs]
        for _ in range(random_directions):
            vec = [rng.uniform(-1.0, 1.0) for _ in range(k)]
            norm = math.sqrt(sum(v * v for v in vec)) or 1.0
            dirs.append([v / norm for v in vec])

        cand = list(w)
        for d in dirs:
            best_err, err0, gamma = _corpus_line_search(pools, ref_lens, cand, d)
            if best_err < err0:
                cand = [wi + gamma * di for wi, di in zip(cand, d)]
        cand_wer = decode_wer(cand)
        if cand_wer < best_wer:
            w = cand
            best_wer = cand_wer
            trace.append(best_wer)
        else:
            trace.append(best_wer)
            break
    return MertResult(
        weights=WeightVector(values=tuple(w), labels=labels),
        wer_trace=trace,
        rounds=rounds_run,
    )
