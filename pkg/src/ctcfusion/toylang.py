"""Deterministic toy language for synthetic decoding benchmarks.

A seeded Markov word chain over a small invented lexicon: enough n-gram
structure for a fused LM to repair acoustically garbled words, no external
data needed.
"""
from __future__ import annotations

import random

_ONSETS = ["b", "d", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "w"]
_VOWELS = ["a", "e", "i", "o", "u"]


def make_lexicon(n_words: int, seed: int) -> list[str]:
    rng = random.Random(seed)
    words: set[str] = set()
    while len(words) < n_words:
        n_syll = rng.choice([2, 2, 3])
        word = "".join(rng.choice(_ONSETS) + rng.choice(_VOWELS) for _ in range(n_syll))
        words.add(word)
    return sorted(words)


def make_sentences(
    n_sentences: int,
    seed: int,
    n_words: int = 30,
    min_len: int = 3,
    max_len: int = 6,
) -> list[str]:
    """Sentences from a first-order word chain with sparse transitions."""
    rng = random.Random(seed)
    lexicon = make_lexicon(n_words, seed)
    successors = {
        w: rng.sample(lexicon, 3) for w in lexicon
    }
    starts = rng.sample(lexicon, max(3, n_words // 4))
    sentences = []
    for _ in range(n_sentences):
        word = rng.choice(starts)
        sent = [word]
        for _ in range(rng.randint(min_len, max_len) - 1):
            word = rng.choice(successors[word])
            sent.append(word)
        sentences.append(" ".join(sent))
    return sentences
