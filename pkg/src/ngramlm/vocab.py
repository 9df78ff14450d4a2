"""Capped closed vocabularies with out-of-vocabulary mapping.

Words get dense integer ids. Three reserved symbols are always present
and occupy fixed ids so files interchange bit-exactly:

    <s>   id 0   sentence begin (context only, never predicted)
    </s>  id 1   sentence end
    <unk> id 2   unknown word
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .errors import EmptyCorpus
from .io import open_text

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
BOS_ID = 0
EOS_ID = 1
UNK_ID = 2

RESERVED = (BOS, EOS, UNK)

Sentence = str | Sequence[str]


def _tokens(sentence: Sentence) -> list[str]:
    # Pre-segmented sentences; whitespace splitting, no normalization.
    if isinstance(sentence, str):
        return sentence.split()
    return list(sentence)


@dataclass
class Vocabulary:
    """Immutable closed word set. Build with :func:`build_vocab`."""

    words: list[str]
    id_of: dict[str, int]
    counts: list[int]
    reserved: tuple[int, int, int] = (BOS_ID, EOS_ID, UNK_ID)

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.id_of

    def id(self, word: str) -> int:
        """Id of ``word``, or the unknown id if out of vocabulary."""
        return self.id_of.get(word, UNK_ID)

    def word(self, wid: int) -> str:
        return self.words[wid]


def build_vocab(
    sentences: Iterable[Sentence],
    max_size: int | None = None,
    min_count: int = 1,
) -> Vocabulary:
    """Build a frequency-capped vocabulary from a sentence stream.

    Keeps the reserved symbols plus the most frequent words with count
    >= ``min_count``, truncated so the total size (reserved included)
    does not exceed ``max_size``. Frequency ties break by ascending
    lexicographic word order, so builds are reproducible.
    """
    freq: Counter[str] = Counter()
    for sent in sentences:
        freq.update(_tokens(sent))
    if not freq:
        raise EmptyCorpus("no tokens in input stream")

    reserved_freq = {w: freq.pop(w, 0) for w in RESERVED}
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    keep = [(w, c) for w, c in ranked if c >= min_count]
    if max_size is not None:
        budget = max(max_size - len(RESERVED), 0)
        keep = keep[:budget]

    words = list(RESERVED) + [w for w, _ in keep]
    counts = [reserved_freq[w] for w in RESERVED] + [c for _, c in keep]
    id_of = {w: i for i, w in enumerate(words)}
    return Vocabulary(words=words, id_of=id_of, counts=counts)


def map_tokens(vocab: Vocabulary, sentence: Sentence) -> list[int]:
    """Map one sentence to ids; out-of-vocabulary tokens become <unk>."""
    get = vocab.id_of.get
    return [get(t, UNK_ID) for t in _tokens(sentence)]


def map_corpus(vocab: Vocabulary, sentences: Iterable[Sentence]):
    """Lazily map a sentence stream to id sentences."""
    for sent in sentences:
        yield map_tokens(vocab, sent)


def oov_rate(vocab: Vocabulary, sentences: Iterable[Sentence]) -> float:
    """Fraction of tokens mapped to <unk>, boundary symbols excluded."""
    total = 0
    oov = 0
    for sent in sentences:
        for tok in _tokens(sent):
            if tok == BOS or tok == EOS:
                continue
            total += 1
            if tok not in vocab.id_of:
                oov += 1
    if total == 0:
        raise EmptyCorpus("no countable tokens in input stream")
    return oov / total


def write_vocab(vocab: Vocabulary, path: str) -> None:
    """Write ``word<TAB>count`` lines ordered by id, reserved first."""
    with open_text(path, "w") as fh:
        for w, c in zip(vocab.words, vocab.counts):
            fh.write(f"{w}\t{c}\n")


def read_vocab(path: str) -> Vocabulary:
    words: list[str] = []
    counts: list[int] = []
    with open_text(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            w, c = line.split("\t")
            words.append(w)
            counts.append(int(c))
    if words[:3] != list(RESERVED):
        from .errors import ParseError

        raise ParseError(f"vocabulary file must start with {RESERVED}")
    id_of = {w: i for i, w in enumerate(words)}
    return Vocabulary(words=words, id_of=id_of, counts=counts)
