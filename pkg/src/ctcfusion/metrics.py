"""Word error rate and the model-comparison report.

WER uses minimal edit alignment with unit costs; among minimal alignments the
decomposition with the most matches is reported. Averages are rounded
half-up to two decimals, and cells whose third decimal is exactly 5 are
flagged because published tables disagree on that rounding.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

NO_LM = "none"
LM_VARIANTS = (NO_LM, "2-gram", "3-gram", "4-gram", "5-gram", "6-gram")


@dataclass(frozen=True)
class WerBreakdown:
    substitutions: int
    deletions: int
    insertions: int
    reference_words: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer_percent(self) -> float:
        return 100.0 * self.errors / self.reference_words


def _align(ref: list[str], hyp: list[str]) -> tuple[int, int]:
    """DP over (errors, -matches) lexicographic cost; returns (errors, matches)."""
    n, m = len(ref), len(hyp)
    # dp[j] = (errors, -matches) for ref[:i], hyp[:j]
    dp = [(j, 0) for j in range(m + 1)]
    for i in range(1, n + 1):
        prev = dp
        dp = [(i, 0)] + [None] * m
        ri = ref[i - 1]
        for j in range(1, m + 1):
            if ri == hyp[j - 1]:
                best = (prev[j - 1][0], prev[j - 1][1] - 1)  # match
            else:
                best = (prev[j - 1][0] + 1, prev[j - 1][1])  # substitution
            dele = (prev[j][0] + 1, prev[j][1])
            ins = (dp[j - 1][0] + 1, dp[j - 1][1])
            if dele < best:
                best = dele
            if ins < best:
                best = ins
            dp[j] = best
    errors, neg_matches = dp[m]
    return errors, -neg_matches


def wer(reference: str, hypothesis: str) -> WerBreakdown:
    """Edit-distance decomposition between normalized word sequences."""
    ref = reference.split()
    hyp = hypothesis.split()
    if not ref:
        raise ValueError("undefined WER: empty reference")
    errors, matches = _align(ref, hyp)
    # With E errors and M matches the decomposition is determined:
    # S + M + D = |ref|, S + M + I = |hyp|, E = S + D + I.
    s = len(ref) + len(hyp) - 2 * matches - errors
    d = len(ref) - matches - s
    i = len(hyp) - matches - s
    return WerBreakdown(substitutions=s, deletions=d, insertions=i, reference_words=len(ref))


def pooled_wer(pairs: list[tuple[str, str]]) -> WerBreakdown:
    """Corpus-level WER: edit counts pooled over all (reference, hypothesis)."""
    if not pairs:
        raise ValueError("no utterances to evaluate")
    s = d = i = n = 0
    for ref, hyp in pairs:
        b = wer(ref, hyp)
        s, d, i, n = s + b.substitutions, d + b.deletions, i + b.insertions, n + b.reference_words
    return WerBreakdown(s, d, i, n)


def _mean_decimal(row: list[float]) -> Decimal:
    """Exact decimal mean of the printed cell values (avoids binary-float
    artifacts like (0.77+10.78)/2 != 5.775)."""
    if not row:
        raise ValueError("cannot average an empty row")
    return sum(Decimal(repr(x)) for x in row) / len(row)


def round_half_up(x: "float | Decimal", places: int = 2) -> float:
    q = Decimal(1).scaleb(-places)
    d = x if isinstance(x, Decimal) else Decimal(repr(x))
    return float(d.quantize(q, rounding=ROUND_HALF_UP))


def rounding_sensitive(x: "float | Decimal", places: int = 2) -> bool:
    """True when the digit after the rounding position is exactly 5, i.e.
    half-up and truncation conventions disagree."""
    d = x if isinstance(x, Decimal) else Decimal(repr(x))
    d = d.scaleb(places + 1)
    return d == d.to_integral_value() and int(d) % 10 == 5


def aggregate(row: list[float]) -> float:
    """Row average: arithmetic mean, rounded half-up to 2 decimals."""
    return round_half_up(_mean_decimal(row))


@dataclass
class EvalReport:
    """Comparison grid: (model_tag, lm_variant) x dataset -> WER percent."""

    datasets: list[str]
    cells: dict[tuple[str, str], dict[str, float]]

    def add(self, model_tag: str, lm_variant: str, dataset: str, wer_percent: float):
        if lm_variant not in LM_VARIANTS:
            raise ValueError(f"unknown lm_variant {lm_variant!r}")
        if dataset not in self.datasets:
            self.datasets.append(dataset)
        self.cells.setdefault((model_tag, lm_variant), {})[dataset] = wer_percent

    @classmethod
    def empty(cls) -> "EvalReport":
        return cls(datasets=[], cells={})

    def rows(self) -> list[tuple[str, str, dict[str, float]]]:
        """Rows grouped by model, no-LM first then ascending n-gram order."""
        models = []
        for model_tag, _ in self.cells:
            if model_tag not in models:
                models.append(model_tag)
        out = []
        for model_tag in models:
            for variant in LM_VARIANTS:
                if (model_tag, variant) in self.cells:
                    out.append((model_tag, variant, self.cells[(model_tag, variant)]))
        return out

    def row_average(self, model_tag: str, lm_variant: str) -> float:
        present = self.cells[(model_tag, lm_variant)]
        return aggregate(list(present.values()))


def render_report(report: EvalReport) -> tuple[str, str]:
    """Render the comparison grid as an aligned text table and as CSV.

    Missing dataset cells print "-" and are excluded from the average;
    rounding-sensitive averages are marked with '*' and a footnote.
    """
    if not report.cells:
        raise ValueError("empty report")
    header = ["Model", "KenLM"] + report.datasets + ["AVG"]
    table_rows = [header]
    flagged = False
    for model_tag, variant, cells in report.rows():
        present = [cells[d] for d in report.datasets if d in cells]
        mean = _mean_decimal(present)
        avg = f"{round_half_up(mean):.2f}"
        if rounding_sensitive(mean):
            avg += "*"
            flagged = True
        row = [model_tag, "-" if variant == NO_LM else variant]
        row += [f"{cells[d]:.2f}" if d in cells else "-" for d in report.datasets]
        row.append(avg)
        table_rows.append(row)

    widths = [max(len(r[i]) for r in table_rows) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in table_rows]
    if flagged:
        lines.append("* average is rounding-sensitive (third decimal is 5)")
    text = "\n".join(lines) + "\n"

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model", "lm", "dataset", "wer"])
    for model_tag, variant, cells in report.rows():
        for d in report.datasets:
            if d in cells:
                writer.writerow([model_tag, variant, d, f"{cells[d]:.2f}"])
    return text, buf.getvalue()


def cer(reference: str, hypothesis: str) -> WerBreakdown:
    """Character error rate counterpart (spaces count as characters)."""
    if not reference:
        raise ValueError("undefined CER: empty reference")
    errors, matches = _align(list(reference), list(hypothesis))
    s = len(reference) + len(hypothesis) - 2 * matches - errors
    return WerBreakdown(
        substitutions=s,
        deletions=len(reference) - matches - s,
        insertions=len(hypothesis) - matches - s,
        reference_words=len(reference),
    )
