"""Transcript normalization and CTC character alphabet.

The alphabet keeps letters a-z plus three specials: the word delimiter "|"
(stands in for space), an unknown token, and the CTC blank. Delimiter and
blank are distinct symbols.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

DELIMITER = "|"
UNK = "<unk>"
BLANK = "<blank>"

_NON_ALPHA = re.compile(r"[^a-z ]+")
_SPACES = re.compile(r"\s+")


def normalize_text(raw: str) -> str:
    """Lowercase, keep only a-z and spaces, collapse whitespace, trim."""
    s = _SPACES.sub(" ", raw.lower())
    s = _NON_ALPHA.sub("", s)
    s = _SPACES.sub(" ", s)
    return s.strip()


@dataclass(frozen=True)
class Alphabet:
    """Ordered CTC symbol inventory.

    Layout: sorted letters, then delimiter, unk, blank (fixed order so
    indices are deterministic across runs).
    """

    symbols: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate symbols in alphabet")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.symbols)})

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def delimiter_id(self) -> int:
        return self._index[DELIMITER]

    @property
    def unk_id(self) -> int:
        return self._index[UNK]

    @property
    def blank_id(self) -> int:
        return self._index[BLANK]

    def encode(self, text: str) -> list[int]:
        """Map normalized text to symbol indices; space -> "|", unseen -> unk."""
        out = []
        for ch in text:
            if ch == " ":
                out.append(self.delimiter_id)
            else:
                out.append(self._index.get(ch, self.unk_id))
        return out

    def decode(self, indices: list[int]) -> str:
        """Inverse of encode; "|" -> space. Raises on out-of-range indices."""
        chars = []
        for i in indices:
            if not 0 <= i < len(self.symbols):
                raise ValueError(f"symbol index {i} out of range 0..{len(self.symbols) - 1}")
            sym = self.symbols[i]
            chars.append(" " if sym == DELIMITER else sym)
        return "".join(chars)

    def to_lines(self) -> str:
        """Vocabulary export: one symbol per line, index = line number."""
        return "\n".join(self.symbols) + "\n"

    @classmethod
    def from_lines(cls, text: str) -> "Alphabet":
        symbols = tuple(line for line in text.splitlines() if line)
        for special in (DELIMITER, UNK, BLANK):
            if special not in symbols:
                raise ValueError(f"vocabulary file missing {special!r}")
        return cls(symbols)


def build_alphabet(transcripts: list[str]) -> Alphabet:
    """Alphabet from the distinct letters of normalized transcripts.

    Letters are sorted lexicographically; specials appended last in fixed
    order (delimiter, unk, blank). Space never becomes a symbol.
    """
    letters = set()
    for t in transcripts:
        letters.update(ch for ch in t if ch != " ")
    if not letters:
        raise ValueError("empty alphabet")
    return Alphabet(tuple(sorted(letters)) + (DELIMITER, UNK, BLANK))
