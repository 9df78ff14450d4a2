"""Small file helpers shared across modules."""

from __future__ import annotations

import gzip
import io


def open_text(path: str, mode: str = "r") -> io.TextIOBase:
    """Open a UTF-8 text file; paths ending in .gz are gzip-compressed."""
    if str(path).endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def read_sentences(path: str):
    """Yield non-empty lines of a corpus file (one sentence per line)."""
    with open_text(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield line
