"""Backoff n-gram language model: counting, interpolated modified Kneser-Ney
estimation, ARPA read/write, and log10 scoring with backoff.

Conventions follow the ARPA ecosystem: probabilities and backoff weights are
base-10 logs; sentences are padded with <s> / </s>; OOV words map to <unk>,
which carries real unigram mass. <s> is never predicted: its "probability"
entry is the conventional -99 placeholder and it is excluded from
normalization sums.
"""
from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

# log10 placeholder for entries that exist only as backoff contexts.
NEVER_PREDICTED = -99.0


def count_ngrams(sentences: list[list[str]], order: int) -> dict[int, Counter]:
    """Counts for all orders 1..order.

    Each order k counts windows over the sentence padded with (k-1) <s>
    markers and one </s>, so the k-gram at the sentence start is
    (<s>,)*(k-1) + (first word) and <s> is never a predicted word.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if not sentences:
        raise ValueError("no sentences to count")
    counts: dict[int, Counter] = {k: Counter() for k in range(1, order + 1)}
    for sent in sentences:
        for k in range(1, order + 1):
            padded = [BOS] * (k - 1) + list(sent) + [EOS]
            table = counts[k]
            for i in range(len(padded) - k + 1):
                table[tuple(padded[i : i + k])] += 1
    return counts


@dataclass(frozen=True)
class Discounts:
    """Modified Kneser-Ney discounts for one order (count 1, 2, 3+)."""

    d1: float
    d2: float
    d3: float

    def for_count(self, c: int) -> float:
        if c >= 3:
            return self.d3
        return (0.0, self.d1, self.d2)[c]


def discounts_from_counts(count_of_counts: Counter) -> Discounts:
    """Standard estimator from the count-of-counts n1..n4.

    Raises if the statistics are degenerate (any n1..n4 zero or a discount
    falling outside its valid range).
    """
    n = [count_of_counts.get(i, 0) for i in (1, 2, 3, 4)]
    if any(v == 0 for v in n):
        raise ValueError("insufficient statistics: count-of-counts n1..n4 must all be nonzero")
    n1, n2, n3, n4 = n
    y = n1 / (n1 + 2.0 * n2)
    d = Discounts(
        d1=1.0 - 2.0 * y * n2 / n1,
        d2=2.0 - 3.0 * y * n3 / n2,
        d3=3.0 - 4.0 * y * n4 / n3,
    )
    if not (0.0 < d.d1 <= 1.0 and 0.0 < d.d2 <= 2.0 and 0.0 < d.d3 <= 3.0):
        raise ValueError(f"insufficient statistics: discounts out of range {d}")
    return d


FALLBACK_DISCOUNT = Discounts(0.5, 0.5, 0.5)


@dataclass
class NGramModel:
    """Order-n backoff LM.

    tables[k] maps k-word tuples to [log10_prob, log10_backoff]; entries at
    the highest order have backoff 0.0 (unused, omitted in ARPA). vocab is
    the predicted-word set plus <s>.
    """

    order: int
    tables: dict[int, dict[tuple, list]]
    vocab: set = field(default_factory=set)

    def lookup(self, ngram: tuple) -> list | None:
        return self.tables.get(len(ngram), {}).get(ngram)

    def map_word(self, word: str) -> str:
        return word if word in self.vocab else UNK

    def score_word(self, context: tuple | list, word: str) -> float:
        """log10 P(word | context) by standard backoff recursion."""
        word = self.map_word(word)
        ctx = tuple(self.map_word(w) for w in context)[-(self.order - 1) :] if self.order > 1 else ()
        backoff = 0.0
        while True:
            entry = self.lookup(ctx + (word,))
            if entry is not None:
                return backoff + entry[0]
            if not ctx:
                # <unk> always has a unigram entry, so this is unreachable
                # for mapped words; guard for malformed models.
                raise KeyError(f"no unigram entry for {word!r}")
            ctx_entry = self.lookup(ctx)
            if ctx_entry is not None:
                backoff += ctx_entry[1]
            ctx = ctx[1:]

    def score_sentence(self, words: list[str]) -> float:
        """log10 P(sentence), padding as in count_ngrams at the model order."""
        ctx = (BOS,) * (self.order - 1)
        total = 0.0
        for w in list(words) + [EOS]:
            total += self.score_word(ctx, w)
            ctx = (ctx + (self.map_word(w),))[1:] if self.order > 1 else ()
        return total

    def perplexity(self, sentences: list[list[str]]) -> float:
        if not sentences:
            raise ValueError("empty evaluation set")
        total = 0.0
        n_words = 0
        for sent in sentences:
            total += self.score_sentence(sent)
            n_words += len(sent) + 1  # + </s>
        return 10.0 ** (-total / n_words)

    @property
    def predicted_vocab(self) -> list[str]:
        """Words the model can predict (vocab without <s>)."""
        return sorted(w for w in self.vocab if w != BOS)


def estimate(
    counts: dict[int, Counter],
    order: int,
    discounts: dict[int, Discounts] | None = None,
    strict: bool = True,
) -> NGramModel:
    """Interpolated modified Kneser-Ney estimation.

    Lower-order counts are replaced by continuation counts (distinct
    preceding-word types), except n-grams starting with <s>, which keep raw
    counts. Per-order discounts come from count-of-counts unless supplied;
    degenerate statistics raise in strict mode and fall back to a fixed 0.5
    discount otherwise.
    """
    if set(counts) != set(range(1, order + 1)):
        raise ValueError("counts do not cover orders 1..order")

    # Adjusted counts per order.
    adjusted: dict[int, Counter] = {order: Counter(counts[order])}
    for k in range(order - 1, 0, -1):
        adj = Counter()
        preceders: dict[tuple, set] = {}
        for gram in counts[k + 1]:
            preceders.setdefault(gram[1:], set()).add(gram[0])
        for gram, raw in counts[k].items():
            if gram[0] == BOS:
                adj[gram] = raw
            else:
                adj[gram] = len(preceders.get(gram, ()))
        adjusted[k] = adj

    disc: dict[int, Discounts] = {}
    for k in range(1, order + 1):
        if discounts and k in discounts:
            disc[k] = discounts[k]
            continue
        coc = Counter(adjusted[k].values())
        try:
            disc[k] = discounts_from_counts(coc)
        except ValueError:
            if strict:
                raise
            warnings.warn(
                f"order {k}: degenerate count-of-counts, using fixed discount 0.5"
            )
            disc[k] = FALLBACK_DISCOUNT

    vocab = {w for (w,) in counts[1]} | {UNK, EOS, BOS}
    n_predicted = len(vocab) - 1  # <s> excluded

    tables: dict[int, dict[tuple, list]] = {k: {} for k in range(1, order + 1)}
    model = NGramModel(order=order, tables=tables, vocab=vocab)

    # Unigrams: interpolate with the uniform distribution over predicted words.
    uni = adjusted[1]
    s1 = sum(uni.values())
    d1 = disc[1]
    gamma1 = sum(d1.for_count(c) for c in uni.values()) / s1
    p_unif = 1.0 / n_predicted
    for (w,), c in uni.items():
        p = (c - d1.for_count(c)) / s1 + gamma1 * p_unif
        tables[1][(w,)] = [math.log10(p), 0.0]
    # Zero discounts (only possible when supplied explicitly) leave <unk>
    # without mass; keep its entry with the never-predicted placeholder.
    unk_mass = gamma1 * p_unif
    tables[1].setdefault(
        (UNK,), [math.log10(unk_mass) if unk_mass > 0 else NEVER_PREDICTED, 0.0]
    )
    tables[1][(BOS,)] = [NEVER_PREDICTED, 0.0]

    # Higher orders, lowest first so interpolation can query the level below.
    for k in range(2, order + 1):
        dk = disc[k]
        by_context: dict[tuple, list] = {}
        for gram, c in adjusted[k].items():
            by_context.setdefault(gram[:-1], []).append((gram[-1], c))
        for ctx, items in by_context.items():
            total = sum(c for _, c in items)
            gamma = sum(dk.for_count(c) for _, c in items) / total
            log_gamma = math.log10(gamma) if gamma > 0 else 0.0
            for w, c in items:
                p = (c - dk.for_count(c)) / total + gamma * 10.0 ** model.score_word(
                    ctx[1:], w
                )
                tables[k][ctx + (w,)] = [math.log10(p), 0.0]
            # Backoff weight lives on the context's entry one order down;
            # all-<s> contexts never occur as counted (k-1)-grams.
            ctx_entry = tables[k - 1].setdefault(ctx, [NEVER_PREDICTED, 0.0])
            ctx_entry[1] = log_gamma
    return model


def train(
    sentences: list[list[str]],
    order: int,
    discounts: dict[int, Discounts] | None = None,
    strict: bool = False,
) -> NGramModel:
    """count_ngrams + estimate in one step (non-strict by default)."""
    return estimate(count_ngrams(sentences, order), order, discounts, strict=strict)


# --- ARPA serialization -----------------------------------------------------


def _fmt(x: float) -> str:
    return repr(x)


def write_arpa(model: NGramModel) -> str:
    """Serialize to the standard ARPA text layout."""
    lines = ["\\data\\"]
    for k in range(1, model.order + 1):
        lines.append(f"ngram {k}={len(model.tables[k])}")
    for k in range(1, model.order + 1):
        lines.append("")
        lines.append(f"\\{k}-grams:")
        for gram in sorted(model.tables[k]):
            prob, backoff = model.tables[k][gram]
            words = " ".join(gram)
            if k == model.order:
                lines.append(f"{_fmt(prob)}\t{words}")
            else:
                lines.append(f"{_fmt(prob)}\t{words}\t{_fmt(backoff)}")
    lines.append("")
    lines.append("\\end\\")
    return "\n".join(lines) + "\n"


def read_arpa(text: str) -> NGramModel:
    """Parse ARPA text; validates section counts and backoff reachability."""
    lines = text.splitlines()
    i = 0

    def err(lineno: int, msg: str):
        return ValueError(f"ARPA line {lineno + 1}: {msg}")

    while i < len(lines) and lines[i].strip() != "\\data\\":
        if lines[i].strip():
            raise err(i, "expected \\data\\ header")
        i += 1
    if i == len(lines):
        raise ValueError("ARPA: missing \\data\\ header")
    i += 1

    declared: dict[int, int] = {}
    while i < len(lines) and lines[i].strip().startswith("ngram "):
        try:
            k, cnt = lines[i].strip()[len("ngram ") :].split("=")
            declared[int(k)] = int(cnt)
        except ValueError:
            raise err(i, f"bad count line {lines[i]!r}")
        i += 1
    if not declared or sorted(declared) != list(range(1, max(declared) + 1)):
        raise ValueError("ARPA: malformed ngram count declarations")
    order = max(declared)

    tables: dict[int, dict[tuple, list]] = {k: {} for k in range(1, order + 1)}
    current = None
    for lineno in range(i, len(lines)):
        line = lines[lineno].strip()
        if not line:
            continue
        if line == "\\end\\":
            current = "end"
            continue
        if line.endswith("-grams:") and line.startswith("\\"):
            current = int(line[1:].split("-")[0])
            if current not in declared:
                raise err(lineno, f"undeclared section {line!r}")
            continue
        if current is None or current == "end":
            raise err(lineno, f"unexpected content {line!r}")
        parts = line.split("\t")
        if len(parts) == 2:
            prob_s, words_s = parts
            backoff = 0.0
        elif len(parts) == 3:
            prob_s, words_s, backoff_s = parts
            backoff = float(backoff_s)
        else:
            raise err(lineno, f"expected 2 or 3 tab-separated fields, got {len(parts)}")
        if len(parts) == 3 and current == order:
            raise err(lineno, "highest-order entry carries a backoff weight")
        gram = tuple(words_s.split(" "))
        if len(gram) != current:
            raise err(lineno, f"{len(gram)}-gram in \\{current}-grams: section")
        tables[current][gram] = [float(prob_s), backoff]
    if current != "end":
        raise ValueError("ARPA: missing \\end\\ marker")

    for k in range(1, order + 1):
        if len(tables[k]) != declared[k]:
            raise ValueError(
                f"ARPA: header says ngram {k}={declared[k]} but {len(tables[k])} entries listed"
            )
    for k in range(2, order + 1):
        for gram in tables[k]:
            if gram[:-1] not in tables[k - 1]:
                raise ValueError(
                    f"ARPA: {k}-gram {' '.join(gram)!r} has no order-{k - 1} context entry"
                )

    vocab = {w for (w,) in tables[1]} | {UNK, EOS, BOS}
    return NGramModel(order=order, tables=tables, vocab=vocab)
