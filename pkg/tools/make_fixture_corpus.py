#!/usr/bin/env python3
"""Generate the bundled synthetic corpus (CC0 / public domain).

A seeded Zipfian second-order Markov text: each word has a sparse set
of preferred successors, and the preference order over them is rotated
by a hash of the two preceding words, so the text carries genuine
trigram structure on top of a hapax-rich Zipf vocabulary. Pruning
sweeps and held-out perplexity then behave the way they do on natural
text. Deterministic for a fixed seed; regenerating with the defaults
reproduces the committed data/ files byte for byte.
"""

import argparse
import gzip
import random

CONSONANTS = "bdfgklmnprstvz"
VOWELS = "aeiou"


def word_surface(rank: int) -> str:
    """Pronounceable CV-syllable spelling of a vocabulary rank."""
    base = len(CONSONANTS) * len(VOWELS)
    r = rank
    syllables = []
    while True:
        syllables.append(r % base)
        r //= base
        if not r:
            break
    out = []
    for s in reversed(syllables):
        out.append(CONSONANTS[s // len(VOWELS)])
        out.append(VOWELS[s % len(VOWELS)])
    return "".join(out)


class MarkovZipf:
    def __init__(self, vocab_size: int, seed: int, fanout: int = 10,
                 local_weight: float = 0.85, zipf_exponent: float = 1.3,
                 pref_base: float = 0.5):
        rng = random.Random(seed)
        self.rng = rng
        self.fanout = fanout
        self.local_weight = local_weight
        self.words = [word_surface(r) for r in range(vocab_size)]
        weights = [1.0 / (r + 2.7) ** zipf_exponent for r in range(vocab_size)]
        self.global_cum = []
        acc = 0.0
        for w in weights:
            acc += w
            self.global_cum.append(acc)
        self.population = list(range(vocab_size))
        # Sparse preferred successors per word, Zipf-biased draws.
        self.local: list[list[int]] = []
        for _ in range(vocab_size):
            succ = sorted(
                set(rng.choices(self.population, cum_weights=self.global_cum,
                                k=fanout))
            )
            rng.shuffle(succ)
            self.local.append(succ)
        self.pref = [pref_base ** j for j in range(fanout)]
        self.pref_total = sum(self.pref)

    def _draw_global(self) -> int:
        return self.rng.choices(self.population, cum_weights=self.global_cum, k=1)[0]

    def _draw_local(self, prev: int, cur: int) -> int:
        # Rotate the preference order by a hash of (prev, cur): the
        # successor distribution genuinely depends on both words.
        succ = self.local[cur]
        k = len(succ)
        shift = ((prev + 1) * 2654435761 ^ (cur + 1) * 40503) % k
        r = self.rng.random() * (self.pref_total if k == self.fanout
                                 else sum(self.pref[:k]))
        pref = self.pref
        for j in range(k):
            r -= pref[(j + shift) % k]
            if r <= 0.0:
                return succ[j]
        return succ[k - 1]

    def sentence(self) -> list[str]:
        rng = self.rng
        length = 4 + min(int(rng.expovariate(1.0 / 8.0)), 26)
        prev = -1
        cur = self._draw_global()
        out = [self.words[cur]]
        for _ in range(length - 1):
            if rng.random() < self.local_weight:
                nxt = self._draw_local(prev, cur)
            else:
                nxt = self._draw_global()
            prev, cur = cur, nxt
            out.append(self.words[cur])
        return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--vocab-size", type=int, default=30000)
    ap.add_argument("--train-tokens", type=int, default=1_000_000)
    ap.add_argument("--heldout-sentences", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=20080701)
    ap.add_argument("--train-out", default="data/train.txt.gz")
    ap.add_argument("--heldout-out", default="data/heldout.txt.gz")
    args = ap.parse_args()

    gen = MarkovZipf(args.vocab_size, args.seed)
    ntok = 0
    nsent = 0
    with gzip.open(args.train_out, "wt", encoding="utf-8") as fh:
        while ntok < args.train_tokens:
            sent = gen.sentence()
            ntok += len(sent)
            nsent += 1
            fh.write(" ".join(sent) + "\n")
    print(f"train: {nsent} sentences, {ntok} tokens")

    ntok = 0
    with gzip.open(args.heldout_out, "wt", encoding="utf-8") as fh:
        for _ in range(args.heldout_sentences):
            sent = gen.sentence()
            ntok += len(sent)
            fh.write(" ".join(sent) + "\n")
    print(f"heldout: {args.heldout_sentences} sentences, {ntok} tokens")


if __name__ == "__main__":
    main()
