"""ARPA text format reader and writer.

Canonical files are bit-stable: entries sorted by word-id sequence,
logs printed with 7 significant digits, a backoff column on every
order below the highest. write -> read -> write reproduces the bytes.
"""

from __future__ import annotations

import math

from .counts import Ngram
from .errors import CountMismatch, MissingSection, ParseError
from .io import open_text
from .model import BackoffModel
from .vocab import RESERVED, Vocabulary

_FMT = "{:.7g}"


def _fmt(value: float) -> str:
    if value == 0.0:
        return "0"  # normalize -0.0
    return _FMT.format(value)


def write_arpa(model: BackoffModel, path: str) -> None:
    """Write ``model`` in canonical ARPA form."""
    per_order: list[list[Ngram]] = [[] for _ in range(model.order)]
    for g in model.probs:
        per_order[len(g) - 1].append(g)
    for bucket in per_order:
        bucket.sort()

    words = model.vocab.words
    with open_text(path, "w") as fh:
        fh.write("\\data\\\n")
        for k in range(1, model.order + 1):
            fh.write(f"ngram {k}={len(per_order[k - 1])}\n")
        for k in range(1, model.order + 1):
            fh.write(f"\n\\{k}-grams:\n")
            has_backoff = k < model.order
            for g in per_order[k - 1]:
                text = " ".join(words[i] for i in g)
                lp = _fmt(model.probs[g])
                if has_backoff:
                    bo = _fmt(model.backoffs.get(g, 0.0))
                    fh.write(f"{lp}\t{text}\t{bo}\n")
                else:
                    fh.write(f"{lp}\t{text}\n")
        fh.write("\n\\end\\\n")


def read_arpa(path: str) -> BackoffModel:
    """Parse an ARPA file into a model.

    The unigram section must contain the reserved symbols; remaining
    words are assigned ids in section order, so canonical files round
    trip with identical ids.
    """
    declared: dict[int, int] = {}
    sections: dict[int, list[tuple[float, tuple[str, ...], float | None]]] = {}

    with open_text(path) as fh:
        lines = fh.read().split("\n")

    i = 0
    nlines = len(lines)

    def skip_blank(j: int) -> int:
        while j < nlines and not lines[j].strip():
            j += 1
        return j

    i = skip_blank(i)
    if i >= nlines or lines[i].strip() != "\\data\\":
        raise MissingSection("missing \\data\\ header", i + 1 if i < nlines else None)
    i += 1
    while i < nlines and lines[i].strip():
        line = lines[i].strip()
        if not line.startswith("ngram "):
            raise ParseError(f"expected 'ngram k=count', got {line!r}", i + 1)
        try:
            k_str, count_str = line[len("ngram "):].split("=")
            declared[int(k_str)] = int(count_str)
        except ValueError:
            raise ParseError(f"bad ngram count line {line!r}", i + 1) from None
        i += 1
    if not declared:
        raise MissingSection("no ngram counts declared", i + 1)
    order = max(declared)
    if sorted(declared) != list(range(1, order + 1)):
        raise ParseError(f"non-contiguous orders declared: {sorted(declared)}", i + 1)

    saw_end = False
    while True:
        i = skip_blank(i)
        if i >= nlines:
            break
        header = lines[i].strip()
        if header == "\\end\\":
            saw_end = True
            break
        if not (header.startswith("\\") and header.endswith("-grams:")):
            raise ParseError(f"expected section header, got {header!r}", i + 1)
        try:
            k = int(header[1:-len("-grams:")])
        except ValueError:
            raise ParseError(f"bad section header {header!r}", i + 1) from None
        if k not in declared:
            raise ParseError(f"section order {k} not declared in header", i + 1)
        i += 1
        rows: list[tuple[float, tuple[str, ...], float | None]] = []
        while i < nlines and lines[i].strip() and not lines[i].startswith("\\"):
            fields = lines[i].rstrip("\n").split("\t")
            if len(fields) not in (2, 3):
                raise ParseError(f"expected 2 or 3 tab fields, got {len(fields)}", i + 1)
            try:
                lp = float(fields[0])
            except ValueError:
                raise ParseError(f"bad log probability {fields[0]!r}", i + 1) from None
            gram = tuple(fields[1].split(" "))
            if len(gram) != k:
                raise ParseError(
                    f"{len(gram)}-gram in \\{k}-grams: section", i + 1
                )
            bo: float | None = None
            if len(fields) == 3:
                if k == order:
                    raise ParseError("backoff weight at highest order", i + 1)
                try:
                    bo = float(fields[2])
                except ValueError:
                    raise ParseError(f"bad backoff weight {fields[2]!r}", i + 1) from None
            rows.append((lp, gram, bo))
            i += 1
        sections[k] = rows

    if not saw_end:
        raise MissingSection("missing \\end\\ terminator")
    for k in range(1, order + 1):
        if k not in sections:
            raise MissingSection(f"missing \\{k}-grams: section")
        if len(sections[k]) != declared[k]:
            raise CountMismatch(
                f"header declares {declared[k]} {k}-grams, body has {len(sections[k])}"
            )

    seen = [g[0] for _, g, _ in sections[1]]
    if len(set(seen)) != len(seen):
        raise ParseError("duplicate unigram entry")
    for sym in RESERVED:
        if sym not in seen:
            raise ParseError(f"reserved symbol {sym!r} missing from unigrams")
    # Reserved symbols take their fixed ids; canonical files already
    # list them first, so this is the identity there.
    unigrams = list(RESERVED) + [w for w in seen if w not in RESERVED]
    id_of = {w: i for i, w in enumerate(unigrams)}
    vocab = Vocabulary(
        words=unigrams, id_of=id_of, counts=[0] * len(unigrams)
    )

    probs: dict[Ngram, float] = {}
    backoffs: dict[Ngram, float] = {}
    for k in range(1, order + 1):
        for lp, gram, bo in sections[k]:
            try:
                g = tuple(id_of[w] for w in gram)
            except KeyError as exc:
                raise ParseError(f"word {exc.args[0]!r} not in unigram section")
            probs[g] = lp
            if k < order:
                backoffs[g] = bo if bo is not None else 0.0
    return BackoffModel(order=order, vocab=vocab, probs=probs, backoffs=backoffs)
