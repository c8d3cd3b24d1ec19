"""CTC decoding: greedy best-path, prefix beam search with word-level n-gram
shallow fusion, and an exhaustive path-enumeration oracle.

All beam arithmetic is in the natural-log domain; LM scores arrive in log10
(ARPA convention) and are converted at the fusion boundary.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .emissions import EmissionMatrix
from .ngram import NGramModel
from .textnorm import Alphabet

LN10 = math.log(10.0)
NEG_INF = float("-inf")


def _logaddexp(a: float, b: float) -> float:
    if a < b:
        a, b = b, a
    if b == NEG_INF:
        return a
    return a + math.log1p(math.exp(b - a))


@dataclass(frozen=True)
class DecodeParams:
    beam_width: int = 50
    alpha: float = 0.5  # LM weight
    beta: float = 1.0  # word insertion bonus
    prune_log_floor: float = -9.2  # relative to frame max; -inf disables
    lm: Optional[NGramModel] = None

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")


def collapse(path: list[int], blank_id: int) -> list[int]:
    """CTC collapse: merge adjacent duplicates, then drop blanks."""
    out = []
    prev = None
    for s in path:
        if s != prev and s != blank_id:
            out.append(s)
        prev = s
    return out


def greedy_decode(emissions: EmissionMatrix, alphabet: Alphabet) -> str:
    """Best-path decoding: per-frame argmax (ties -> lowest index), collapse."""
    path = np.argmax(emissions.values, axis=1).tolist()
    return alphabet.decode(collapse(path, alphabet.blank_id))


@dataclass
class BeamHypothesis:
    """One beam entry. lm_words/partial are pure functions of the prefix,
    carried along to avoid re-deriving them each frame."""

    prefix: tuple
    log_p_blank: float = NEG_INF
    log_p_nonblank: float = NEG_INF
    lm_acc: float = 0.0
    lm_words: tuple = ()
    partial: str = ""

    def total(self) -> float:
        return _logaddexp(self.log_p_blank, self.log_p_nonblank)


def beam_search_decode(
    emissions: EmissionMatrix, alphabet: Alphabet, params: DecodeParams
) -> list[tuple[str, float]]:
    """CTC prefix beam search; returns hypotheses ranked by fused score.

    Fused score = natural-log total CTC mass + accumulated LM terms. With an
    LM, completing a word (delimiter emission or utterance end) adds
    alpha*ln(10)*log10 P(word | history) + beta.

    Per frame, every surviving prefix may stay (blank emission, or
    re-emitting its last symbol into the same run) or extend by one symbol;
    repeated symbols extend through blank-ending mass only. Candidate
    scoring is vectorized over the beam x symbol grid; losing prefixes are
    never materialized.
    """
    blank = alphabet.blank_id
    # Toy alphabets (oracle tests) may have no word delimiter at all.
    from .textnorm import DELIMITER

    delim = alphabet.symbols.index(DELIMITER) if DELIMITER in alphabet.symbols else -1
    lm = params.lm
    fuse = lm is not None
    values = emissions.values
    n_symbols = values.shape[1]
    width = params.beam_width

    def lm_term(hyp: BeamHypothesis) -> float:
        if not fuse or not hyp.partial:
            return 0.0
        return params.alpha * LN10 * lm.score_word(hyp.lm_words, hyp.partial) + params.beta

    beams: list[BeamHypothesis] = [BeamHypothesis(prefix=(), log_p_blank=0.0)]

    for t in range(values.shape[0]):
        frame = values[t]
        n = len(beams)
        pb = np.array([h.log_p_blank for h in beams])
        pnb = np.array([h.log_p_nonblank for h in beams])
        acc = np.array([h.lm_acc for h in beams])
        tot = np.logaddexp(pb, pnb)
        last = np.array([h.prefix[-1] if h.prefix else -1 for h in beams])

        # Stay-on-prefix masses.
        stay_pb = tot + float(frame[blank])
        stay_pnb = np.where(last >= 0, pnb + frame[np.maximum(last, 0)], NEG_INF)

        # Extension contributions: ext[i, s] grows prefix i by symbol s.
        ext = tot[:, None] + frame[None, :]
        rows = np.arange(n)
        has_last = last >= 0
        ext[rows[has_last], last[has_last]] = pb[has_last] + frame[last[has_last]]
        ext[:, blank] = NEG_INF
        if params.prune_log_floor != NEG_INF:
            ext[:, frame < frame.max() + params.prune_log_floor] = NEG_INF

        # An extension that reproduces an existing beam's prefix merges into
        # that beam's stay entry instead of forming a duplicate candidate.
        index = {h.prefix: i for i, h in enumerate(beams)}
        for j, h in enumerate(beams):
            if h.prefix:
                i = index.get(h.prefix[:-1])
                if i is not None:
                    stay_pnb[j] = _logaddexp(stay_pnb[j], ext[i, last[j]])
                    ext[i, last[j]] = NEG_INF

        ext_acc = np.broadcast_to(acc[:, None], ext.shape).copy()
        if fuse and delim >= 0:
            terms = np.array([lm_term(h) for h in beams])
            ext_acc[:, delim] += terms

        stay_scores = np.logaddexp(stay_pb, stay_pnb) + acc
        scores = np.concatenate([stay_scores, (ext + ext_acc).ravel()])
        live = np.flatnonzero(scores > NEG_INF)
        if live.size > width:
            top = live[np.argpartition(-scores[live], width - 1)[:width]]
        else:
            top = live
        top = top[np.argsort(-scores[top], kind="stable")]

        nxt: list[BeamHypothesis] = []
        for c in top.tolist():
            if c < n:
                h = beams[c]
                nxt.append(
                    BeamHypothesis(
                        prefix=h.prefix,
                        log_p_blank=float(stay_pb[c]),
                        log_p_nonblank=float(stay_pnb[c]),
                        lm_acc=h.lm_acc,
                        lm_words=h.lm_words,
                        partial=h.partial,
                    )
                )
            else:
                i, s = divmod(c - n, n_symbols)
                h = beams[i]
                new = BeamHypothesis(
                    prefix=h.prefix + (s,),
                    log_p_nonblank=float(ext[i, s]),
                    lm_acc=float(ext_acc[i, s]),
                    lm_words=h.lm_words,
                    partial=h.partial,
                )
                if s == delim:
                    if h.partial:
                        new.lm_words = h.lm_words + (h.partial,)
                        if fuse and lm.order > 1:
                            new.lm_words = new.lm_words[-(lm.order - 1) :]
                    new.partial = ""
                else:
                    new.partial = h.partial + alphabet.symbols[s]
                nxt.append(new)
        beams = nxt

    finals = []
    for h in beams:
        score = h.total() + h.lm_acc + lm_term(h)
        finals.append((alphabet.decode(list(h.prefix)), score))
    finals.sort(key=lambda ts: (-ts[1], ts[0]))
    return finals


def exhaustive_label_masses(
    emissions: EmissionMatrix, alphabet: Alphabet, limit: int = 10**7
) -> dict[str, float]:
    """Total probability per collapsed label, by enumerating all V^T paths."""
    t, v = emissions.values.shape
    if v**t > limit:
        raise ValueError(f"exhaustive enumeration infeasible: {v}^{t} paths > {limit}")
    probs = np.exp(emissions.values)
    blank = alphabet.blank_id
    masses: dict[str, float] = {}
    for path in itertools.product(range(v), repeat=t):
        p = 1.0
        for i, s in enumerate(path):
            p *= probs[i, s]
        label = alphabet.decode(collapse(list(path), blank))
        masses[label] = masses.get(label, 0.0) + p
    return masses


def exhaustive_decode(
    emissions: EmissionMatrix, alphabet: Alphabet
) -> tuple[str, float]:
    """Oracle: argmax label by total path probability, ties -> lexicographically
    smallest label."""
    masses = exhaustive_label_masses(emissions, alphabet)
    best = min(masses.items(), key=lambda kv: (-kv[1], kv[0]))
    return best[0], float(best[1])
