"""Manifest ingestion, seeded 90/10(/val) partitioning, LM corpus assembly."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional


@dataclass
class Utterance:
    utterance_id: str
    speaker_id: str = ""
    text: str = ""
    normalized_text: Optional[str] = None
    emission_path: Optional[str] = None


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.10
    val_fraction_of_train: float = 0.10
    seed: int = 0

    def __post_init__(self):
        for name in ("test_fraction", "val_fraction_of_train"):
            f = getattr(self, name)
            if not 0.0 < f < 1.0:
                raise ValueError(f"{name} must be in (0,1), got {f}")


def parse_manifest(content: str) -> list[Utterance]:
    """Parse a 3-column TSV: utterance_id<TAB>speaker_id<TAB>text."""
    utts = []
    seen = set()
    for lineno, line in enumerate(content.splitlines(), start=1):
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise ValueError(f"line {lineno}: expected 3 tab-separated columns, got {len(cols)}")
        utt_id, spk, text = cols
        if not utt_id:
            raise ValueError(f"line {lineno}: empty utterance_id")
        if utt_id in seen:
            raise ValueError(f"line {lineno}: duplicate utterance_id {utt_id!r}")
        seen.add(utt_id)
        utts.append(Utterance(utterance_id=utt_id, speaker_id=spk, text=text))
    return utts


def format_manifest(utterances: list[Utterance]) -> str:
    return "".join(
        f"{u.utterance_id}\t{u.speaker_id}\t{u.text}\n" for u in utterances
    )


def _round_half_up(x: float) -> int:
    import math

    return int(math.floor(x + 0.5))


def split_dataset(
    utterances: list[Utterance], spec: SplitSpec, by_speaker: bool = False
) -> dict[str, list[Utterance]]:
    """Deterministic seeded train/val/test partition.

    Test count = round(N * test_fraction), computed first; val is taken
    from the remaining pool. With by_speaker=True, whole speaker groups
    are assigned to one side of each cut.
    """
    if not utterances:
        raise ValueError("cannot split an empty utterance list")

    rng = random.Random(spec.seed)
    if by_speaker:
        groups: dict[str, list[Utterance]] = {}
        for u in utterances:
            groups.setdefault(u.speaker_id, []).append(u)
        units = [groups[k] for k in sorted(groups)]
    else:
        units = [[u] for u in utterances]
    rng.shuffle(units)

    n = len(utterances)
    n_test = _round_half_up(n * spec.test_fraction)

    def take(target: int, pool: list[list[Utterance]]):
        """Pop leading units until `target` utterances are covered."""
        got: list[Utterance] = []
        while pool and len(got) < target:
            got.extend(pool.pop(0))
        return got

    pool = list(units)
    test = take(n_test, pool)
    n_val = _round_half_up((n - len(test)) * spec.val_fraction_of_train)
    val = take(n_val, pool)
    train = [u for unit in pool for u in unit]

    if not train or not val or not test:
        raise ValueError("degenerate split: a partition would be empty")
    return {"train": train, "val": val, "test": test}


def build_lm_corpus(
    sources: list[tuple[list[str], float]], seed: int = 0
) -> list[str]:
    """Assemble LM training text from (sentences, fraction) sources.

    Each source contributes a seeded uniform sample of ceil(fraction*count)
    sentences; sources are concatenated in the given order.
    """
    import math

    rng = random.Random(seed)
    out: list[str] = []
    for i, (sentences, fraction) in enumerate(sources):
        if not 0.0 < fraction <= 1.0:
            raise ValueError(f"source {i}: fraction must be in (0,1], got {fraction}")
        k = math.ceil(fraction * len(sentences))
        out.extend(rng.sample(sentences, k))
    return out
