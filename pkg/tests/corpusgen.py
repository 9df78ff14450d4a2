"""Seeded corpus and lattice generators for test fixtures."""

from __future__ import annotations

import random

WORDS = [
    "ka", "to", "mi", "ra", "su", "ne", "bo", "di", "fu", "ge",
    "lo", "pa", "ve", "za", "nu", "ki", "ta", "mo", "re", "si",
]


def random_sentences(
    seed: int,
    n: int,
    vocab: list[str] | None = None,
    min_len: int = 2,
    max_len: int = 9,
    bigram_bias: float = 0.6,
    tail_mass: float = 0.0,
    tail_size: int = 200,
) -> list[str]:
    """Sentences with mild bigram structure over a small word list.

    ``tail_mass`` mixes in rare Zipf-tail words (q0, q1, ...) so larger
    corpora keep singleton and doubleton counts at every order, which
    count-of-count discount estimation needs.
    """
    words = vocab if vocab is not None else WORDS
    rng = random.Random(seed)
    # Each word prefers a couple of successors, so counts-of-counts and
    # continuation counts are non-trivial.
    succ = {w: rng.sample(words, 3) for w in words}

    def tail_word() -> str:
        r = min(int(rng.expovariate(1.0 / (tail_size / 8.0))), tail_size - 1)
        return f"q{r}"

    out = []
    for _ in range(n):
        length = rng.randint(min_len, max_len)
        cur = rng.choice(words)
        sent = [cur]
        for _ in range(length - 1):
            if tail_mass and rng.random() < tail_mass:
                sent.append(tail_word())
                cur = rng.choice(words)
                continue
            if rng.random() < bigram_bias:
                cur = rng.choice(succ[cur])
            else:
                cur = rng.choice(words)
            sent.append(cur)
        out.append(" ".join(sent))
    return out
