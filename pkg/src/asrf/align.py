"""Word- and character-level edit alignment, WER/CER, corpus aggregation.

The word alignment is a unit-cost Levenshtein dynamic program with a
deterministic backtrace: ties are resolved from the sequence end preferring
match > substitute > delete > insert. Any minimal alignment yields the same
S/D/I counts; the tie-break only pins span positions for reproducibility.

Corpus WER pools edits over words (sum of edits / sum of reference lengths)
per dataset; across datasets the table rows are the arithmetic mean and the
median of the per-dataset values.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DataError

MATCH = "match"
SUBSTITUTE = "substitute"
INSERT = "insert"
DELETE = "delete"


class EmptyReference(DataError):
    """Scoring against an empty reference is refused, not reported as WER=inf."""


class EmptyInput(DataError):
    pass


@dataclass(frozen=True)
class AlignOp:
    kind: str
    ref_index: int | None = None
    hyp_index: int | None = None
    ref_token: str | None = None
    hyp_token: str | None = None

    @property
    def is_error(self) -> bool:
        return self.kind != MATCH


@dataclass(frozen=True)
class UttScore:
    substitutions: int
    deletions: int
    insertions: int
    ref_len: int
    cer_edits: int
    cer_len: int

    @property
    def edits(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> Fraction:
        return Fraction(self.edits, self.ref_len)

    @property
    def cer(self) -> Fraction:
        return Fraction(self.cer_edits, self.cer_len)


def _cost_matrix(ref: Sequence, hyp: Sequence) -> list[list[int]]:
    rows, cols = len(ref) + 1, len(hyp) + 1
    cost = [[0] * cols for _ in range(rows)]
    for i in range(1, rows):
        cost[i][0] = i
    for j in range(1, cols):
        cost[0][j] = j
    for i in range(1, rows):
        row, above = cost[i], cost[i - 1]
        for j in range(1, cols):
            diag = above[j - 1] + (0 if ref[i - 1] == hyp[j - 1] else 1)
            row[j] = min(diag, above[j] + 1, row[j - 1] + 1)
    return cost


def edit_distance(ref: Sequence, hyp: Sequence) -> int:
    return _cost_matrix(ref, hyp)[len(ref)][len(hyp)]


def word_alignment(ref: Sequence[str], hyp: Sequence[str]) -> list[AlignOp]:
    """Deterministic minimal-cost word alignment."""
    if not ref:
        raise EmptyReference("reference token sequence is empty")
    cost = _cost_matrix(ref, hyp)
    ops: list[AlignOp] = []
    i, j = len(ref), len(hyp)
    while i > 0 or j > 0:
        here = cost[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and cost[i - 1][j - 1] == here:
            ops.append(AlignOp(MATCH, i - 1, j - 1, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and ref[i - 1] != hyp[j - 1] and cost[i - 1][j - 1] + 1 == here:
            ops.append(AlignOp(SUBSTITUTE, i - 1, j - 1, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and cost[i - 1][j] + 1 == here:
            ops.append(AlignOp(DELETE, ref_index=i - 1, ref_token=ref[i - 1]))
            i -= 1
        else:
            ops.append(AlignOp(INSERT, hyp_index=j - 1, hyp_token=hyp[j - 1]))
            j -= 1
    ops.reverse()
    return ops


def score(ref: Sequence[str], hyp: Sequence[str]) -> UttScore:
    """Word and character error counts for one utterance."""
    ops = word_alignment(ref, hyp)
    counts = {MATCH: 0, SUBSTITUTE: 0, INSERT: 0, DELETE: 0}
    for op in ops:
        counts[op.kind] += 1
    ref_chars = " ".join(ref)
    hyp_chars = " ".join(hyp)
    return UttScore(
        substitutions=counts[SUBSTITUTE],
        deletions=counts[DELETE],
        insertions=counts[INSERT],
        ref_len=len(ref),
        cer_edits=edit_distance(ref_chars, hyp_chars),
        cer_len=len(ref_chars),
    )


def is_spacing_only(ref: Sequence[str], hyp: Sequence[str]) -> bool:
    """True when the token sequences differ only in where words were split."""
    return list(ref) != list(hyp) and "".join(ref) == "".join(hyp)


def corpus_wer(scores: Iterable[UttScore]) -> Fraction:
    """Pooled WER over a collection of utterance scores."""
    total_edits = 0
    total_len = 0
    for utt in scores:
        total_edits += utt.edits
        total_len += utt.ref_len
    if total_len == 0:
        raise EmptyInput("no scores to aggregate")
    return Fraction(total_edits, total_len)


def average_and_median(values: Sequence) -> tuple[Fraction, Fraction]:
    """Mean and median of per-dataset WERs (even count: mean of middle two)."""
    if not values:
        raise EmptyInput("no values to aggregate")
    exact = sorted(Fraction(str(v)) if isinstance(v, float) else Fraction(v) for v in values)
    average = sum(exact, Fraction(0)) / len(exact)
    mid = len(exact) // 2
    if len(exact) % 2 == 1:
        median = exact[mid]
    else:
        median = (exact[mid - 1] + exact[mid]) / 2
    return average, median
