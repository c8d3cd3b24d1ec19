"""Acoustic-model boundary: frame-level log-probability matrices.

File format (UTF-8, LF):
  line 1: CTCEMIT 1
  line 2: <T> <V>
  line 3: V space-separated symbols (<blank>, <unk>, "|" spelled literally)
  then T lines of V space-separated natural-log probabilities.

Values are natural logs (acoustic convention); ARPA log10 conversion happens
in the decoder.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .textnorm import Alphabet

MAGIC = "CTCEMIT 1"
ROW_NORM_TOL = 1e-4


@dataclass
class EmissionMatrix:
    """T x V natural-log probabilities over an alphabet (incl. blank)."""

    values: np.ndarray
    alphabet: Alphabet

    def __post_init__(self):
        t, v = self.values.shape
        if t < 1 or v < 2:
            raise ValueError(f"emission matrix must be at least 1x2, got {t}x{v}")
        if v != self.alphabet.size:
            raise ValueError(
                f"matrix width {v} != alphabet size {self.alphabet.size}"
            )
        self.validate_rows()

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    def validate_rows(self):
        from scipy.special import logsumexp

        lse = logsumexp(self.values, axis=1)
        bad = np.flatnonzero(np.abs(lse) > ROW_NORM_TOL)
        if bad.size:
            raise ValueError(f"row {bad[0] + 1} not normalized (logsumexp {lse[bad[0]]:.6g})")


def write_emissions(m: EmissionMatrix) -> str:
    t, v = m.values.shape
    lines = [MAGIC, f"{t} {v}", " ".join(m.alphabet.symbols)]
    for row in m.values:
        lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def read_emissions(text: str) -> EmissionMatrix:
    lines = text.splitlines()
    if not lines or lines[0] != MAGIC:
        raise ValueError("line 1: expected CTCEMIT 1 header")
    try:
        t, v = (int(x) for x in lines[1].split())
    except (IndexError, ValueError):
        raise ValueError("line 2: expected '<T> <V>'")
    if len(lines) < 3:
        raise ValueError("line 3: missing symbol row")
    symbols = tuple(lines[2].split(" "))
    if len(symbols) != v:
        raise ValueError(f"line 3: {len(symbols)} symbols, header says V={v}")
    alphabet = Alphabet(symbols)
    rows = [ln for ln in lines[3:] if ln]
    if len(rows) != t:
        raise ValueError(f"header says T={t} but {len(rows)} value rows present")
    values = np.empty((t, v))
    for i, row in enumerate(rows):
        parts = row.split(" ")
        if len(parts) != v:
            raise ValueError(f"value row {i + 1}: {len(parts)} columns, expected {v}")
        values[i] = [float(p) for p in parts]
    return EmissionMatrix(values=values, alphabet=alphabet)


@dataclass(frozen=True)
class SynthParams:
    frames_per_symbol: int = 1
    blank_prob: float = 0.4
    noise_epsilon: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.frames_per_symbol < 1:
            raise ValueError("frames_per_symbol must be >= 1")
        if not 0.0 <= self.noise_epsilon < 0.5:
            raise ValueError("noise_epsilon must be in [0, 0.5)")
        if not 0.0 < self.blank_prob < 1.0:
            raise ValueError("blank_prob must be in (0,1)")


# Tiny uniform floor keeps all log-probabilities finite in the text format.
_FLOOR = 1e-10


def synthesize_emissions(
    text: str, alphabet: Alphabet, params: SynthParams
) -> EmissionMatrix:
    """Emission matrix peaked on the encoded symbols of `text`.

    Each symbol gets frames_per_symbol frames carrying blank_prob of their
    mass on the blank (realistic CTC posteriors are blank-heavy); a
    blank-dominant frame is inserted between repeated symbols so the CTC
    collapse recovers repeats.

    Noise has two parts, both off at epsilon 0 (exactly recoverable):
    a share noise_epsilon of every frame's mass is spread uniformly over
    the vocabulary, and with probability noise_epsilon**3 a symbol is
    "confused": across all its frames one random rival symbol takes a
    40-60% share and beats the true peak by a small margin. Spanning the
    whole symbol makes the corruption acoustically unrecoverable — the
    decoder alone transcribes the rival — while the margin stays small
    enough for a fused LM to repair. Deterministic per seed.
    """
    ids = alphabet.encode(text)
    if alphabet.unk_id in ids:
        raise ValueError(f"text {text!r} is not encodable over the alphabet")
    rng = np.random.default_rng(params.seed)
    v = alphabet.size
    blank = alphabet.blank_id
    eps = params.noise_epsilon

    frames: list[tuple[int, int, float]] = []  # (peak, rival or -1, rival share)
    prev = None
    for s in ids:
        if s == prev:
            frames.append((blank, -1, 0.0))
        rival, q = -1, 0.0
        if eps > 0.0 and rng.random() < eps**3:
            rival = int(rng.integers(0, v - 1))
            if rival >= s:
                rival += 1
            q = rng.uniform(0.4, 0.6)
        frames.extend([(s, rival, q)] * params.frames_per_symbol)
        prev = s
    if not frames:
        frames = [(blank, -1, 0.0)]

    values = np.empty((len(frames), v))
    for t, (peak, rival, q) in enumerate(frames):
        signal = np.zeros(v)
        if peak == blank:
            signal[blank] = 1.0
        else:
            signal[peak] = 1.0 - params.blank_prob
            signal[blank] = params.blank_prob
        if rival >= 0:
            confused = np.zeros(v)
            confused[rival] = 1.0
            signal = q * confused + (1.0 - q) * signal
        probs = (1.0 - eps) * signal + eps / v
        probs = (1.0 - v * _FLOOR) * probs + _FLOOR
        values[t] = np.log(probs)
    return EmissionMatrix(values=values, alphabet=alphabet)
