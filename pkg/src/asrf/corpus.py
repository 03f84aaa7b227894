"""Error-set algebra, review sampling, substitution mining, vocabulary
coverage, and adjusted WER.

An error set holds the utterance ids a model got wrong (WER != 0, pure
spacing differences excluded). Intersections expose cross-model error
causes; differences expose model-specific ones.

Sampling uses splitmix64 so the same seed reproduces the same sample on
any platform or implementation.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import align, classify
from .errors import DataError

INTERSECTION_ID = "∩all"


class SampleTooLarge(DataError):
    pass


class EmptyVocab(DataError):
    pass


class MissingLabels(DataError):
    pass


@dataclass(frozen=True)
class ScoredUtterance:
    utterance_id: str
    model_id: str
    score: align.UttScore
    spacing_only: bool


@dataclass(frozen=True)
class ErrorSet:
    model_id: str
    members: frozenset[str]

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class SystematicPattern:
    model_id: str
    ref_word: str
    hyp_word: str
    occurrence_count: int
    distinct_utterances: int
    synonym: bool = False


@dataclass(frozen=True)
class VocabReport:
    model_id: str
    training_vocab_size: int
    unseen_word_types: int
    well_generalized_types: int

    @property
    def well_generalized_fraction(self) -> Fraction | None:
        if self.unseen_word_types == 0:
            return None
        return Fraction(self.well_generalized_types, self.unseen_word_types)


def error_set(model_id: str, scores: Iterable[ScoredUtterance]) -> ErrorSet:
    members = {s.utterance_id for s in scores
               if s.model_id == model_id and s.score.edits > 0 and not s.spacing_only}
    return ErrorSet(model_id, frozenset(members))


def intersect(sets: Sequence[ErrorSet]) -> ErrorSet:
    if not sets:
        raise DataError("intersection of zero sets")
    members = frozenset.intersection(*(s.members for s in sets))
    return ErrorSet(INTERSECTION_ID, members)


def difference(target: ErrorSet, others: Sequence[ErrorSet]) -> ErrorSet:
    members = set(target.members)
    for other in others:
        members -= other.members
    return ErrorSet(f"Δ{target.model_id}", frozenset(members))


def _splitmix64(seed: int):
    mask = (1 << 64) - 1
    state = seed & mask

    def nxt() -> int:
        nonlocal state
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        return z ^ (z >> 31)

    return nxt


def sample_errors(errors: ErrorSet, n: int, seed: int) -> list[str]:
    """Deterministic pseudo-random sample of n member ids."""
    if n > len(errors.members):
        raise SampleTooLarge(f"requested {n} from a set of {len(errors.members)}")
    pool = sorted(errors.members)
    nxt = _splitmix64(seed)
    for i in range(len(pool) - 1, 0, -1):
        j = nxt() % (i + 1)
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:n]


def systematic_substitutions(labeled: Sequence[classify.LabeledSpan],
                             min_count: int = 5,
                             min_utts: int = 3) -> list[SystematicPattern]:
    """Substitution pairs a model repeats often enough to look trained-in."""
    occurrences: dict[tuple[str, str, str], int] = {}
    utterances: dict[tuple[str, str, str], set[str]] = {}
    synonym_keys: set[tuple[str, str, str]] = set()
    for item in labeled:
        pair = item.span.single_substitution()
        if pair is None:
            continue
        key = (item.span.model_id, pair[0], pair[1])
        occurrences[key] = occurrences.get(key, 0) + 1
        utterances.setdefault(key, set()).add(item.span.utterance_id)
        if classify.SUBTAG_INDIRECT in item.label.subtags:
            synonym_keys.add(key)
    patterns = [
        SystematicPattern(model_id=key[0], ref_word=key[1], hyp_word=key[2],
                          occurrence_count=count,
                          distinct_utterances=len(utterances[key]),
                          synonym=key in synonym_keys)
        for key, count in occurrences.items()
        if count >= min_count and len(utterances[key]) >= min_utts
    ]
    patterns.sort(key=lambda p: (-p.occurrence_count, p.model_id, p.ref_word, p.hyp_word))
    return patterns


def leading_insertion_pairs(alignments: dict[tuple[str, str], list[align.AlignOp]],
                            min_insertions: int = 2) -> dict[str, dict[tuple[str, str], int]]:
    """Per model: how often each word pair opens a hallucinated prefix."""
    ranking: dict[str, dict[tuple[str, str], int]] = {}
    for (_, model_id), ops in alignments.items():
        leading = []
        for op in ops:
            if op.kind == align.INSERT:
                leading.append(op.hyp_token)
            else:
                break
        if len(leading) >= min_insertions:
            pair = (leading[0], leading[1])
            bucket = ranking.setdefault(model_id, {})
            bucket[pair] = bucket.get(pair, 0) + 1
    return ranking


def vocab_coverage(training_vocab: frozenset[str] | set[str],
                   model_id: str,
                   reference_words: dict[str, tuple[str, ...]],
                   alignments: dict[str, list[align.AlignOp]]) -> VocabReport:
    """Generalization to word types unseen in training.

    A type counts as well generalized when at least half of its reference
    occurrences are aligned as a match. Counting is type-level.
    """
    if not training_vocab:
        raise EmptyVocab("training vocabulary is empty")
    occurrences: dict[str, int] = {}
    matched: dict[str, int] = {}
    for utterance_id, words in reference_words.items():
        ops = alignments.get(utterance_id)
        if ops is None:
            continue
        for op in ops:
            if op.ref_token is None:
                continue
            occurrences[op.ref_token] = occurrences.get(op.ref_token, 0) + 1
            if op.kind == align.MATCH:
                matched[op.ref_token] = matched.get(op.ref_token, 0) + 1
    unseen = {w for w in occurrences if w not in training_vocab}
    well = {w for w in unseen if 2 * matched.get(w, 0) >= occurrences[w]}
    return VocabReport(
        model_id=model_id,
        training_vocab_size=len(training_vocab),
        unseen_word_types=len(unseen),
        well_generalized_types=len(well),
    )


def _effective_category(item: classify.LabeledSpan,
                        human: dict[str, "classify.CategoryLabel"]) -> tuple[int, str]:
    override = human.get(item.span.utterance_id)
    if override is not None:
        return override.category, classify.HUMAN
    return item.label.category, item.label.provenance


def _discounted(category: int, provenance: str) -> bool:
    if category == classify.NEGLIGIBLE:
        return True
    return category == classify.FLAWED_GROUND_TRUTH and provenance == classify.HUMAN


def adjusted_wer(scores: Sequence[ScoredUtterance],
                 labeled: Sequence[classify.LabeledSpan],
                 human_labels: dict[str, "classify.CategoryLabel"] | None = None,
                 ) -> dict[str, dict[str, Fraction]]:
    """Raw vs adjusted corpus WER per model (and pooled under "all").

    Spans labeled negligible, or flawed-ground-truth once a human confirmed
    it, are treated as correct. Human utterance-level labels supersede the
    automatic span labels.
    """
    human = human_labels or {}
    spans_by_pair: dict[tuple[str, str], list[classify.LabeledSpan]] = {}
    for item in labeled:
        spans_by_pair.setdefault((item.span.utterance_id, item.span.model_id), []).append(item)

    per_model: dict[str, dict[str, int]] = {}
    for scored in scores:
        pair = (scored.utterance_id, scored.model_id)
        items = spans_by_pair.get(pair, [])
        if scored.score.edits > 0 and not items:
            raise MissingLabels(f"no labels for errored utterance {pair!r}")
        discount = sum(item.span.edits for item in items
                       if _discounted(*_effective_category(item, human)))
        bucket = per_model.setdefault(scored.model_id,
                                      {"edits": 0, "adjusted": 0, "ref_len": 0})
        bucket["edits"] += scored.score.edits
        bucket["adjusted"] += max(0, scored.score.edits - discount)
        bucket["ref_len"] += scored.score.ref_len

    result: dict[str, dict[str, Fraction]] = {}
    totals = {"edits": 0, "adjusted": 0, "ref_len": 0}
    for model_id, bucket in sorted(per_model.items()):
        for key in totals:
            totals[key] += bucket[key]
        result[model_id] = {
            "raw": Fraction(bucket["edits"], bucket["ref_len"]),
            "adjusted": Fraction(bucket["adjusted"], bucket["ref_len"]),
        }
    if totals["ref_len"]:
        result["all"] = {
            "raw": Fraction(totals["edits"], totals["ref_len"]),
            "adjusted": Fraction(totals["adjusted"], totals["ref_len"]),
        }
    return result
