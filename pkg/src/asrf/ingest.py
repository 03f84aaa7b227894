"""Load and validate dataset manifests, predictions, and the annotation store.

All files are JSON Lines, UTF-8, one record per line:

* references.jsonl  {utterance_id, dataset_id, reference, audio_path?, duration_s?}
* hypotheses.jsonl  {utterance_id, model_id, text, processing_time_s?}
* annotations.jsonl {utterance_id, category, subtags?, annotator, note?, timestamp}

References with digits are linted, never silently rewritten; the scoring
stage may opt in to rendering bare integers as number words.
"""

import os
from dataclasses import dataclass, field

from . import jsonl, textnorm
from .errors import DataError, ParseError


class DuplicateId(DataError):
    pass


class DuplicatePair(DataError):
    pass


class MissingField(DataError):
    pass


@dataclass(frozen=True)
class Utterance:
    utterance_id: str
    dataset_id: str
    reference: str
    audio_path: str | None = None
    duration_s: float | None = None


@dataclass(frozen=True)
class Hypothesis:
    utterance_id: str
    model_id: str
    text: str
    processing_time_s: float | None = None


@dataclass(frozen=True)
class AnnotationRecord:
    utterance_id: str
    category: int
    subtags: frozenset[str]
    annotator: str
    timestamp: str
    note: str | None = None


@dataclass(frozen=True)
class LintWarning:
    utterance_id: str
    kind: str
    message: str


def _require(record: dict, key: str, path: str, lineno: int) -> object:
    if key not in record or record[key] is None:
        raise MissingField(f"{path}:{lineno}: missing field {key!r}")
    return record[key]


def _optional_seconds(record: dict, key: str, path: str, lineno: int) -> float | None:
    value = record.get(key)
    if value is None:
        return None
    if not isinstance(value, (int, float)) or value < 0:
        raise ParseError(f"field {key!r} must be a non-negative number", path, lineno)
    return float(value)


def load_references(path: str) -> list[Utterance]:
    utterances: list[Utterance] = []
    seen: set[str] = set()
    for lineno, record in jsonl.read_records(path):
        utterance_id = str(_require(record, "utterance_id", path, lineno))
        dataset_id = str(_require(record, "dataset_id", path, lineno))
        reference = str(_require(record, "reference", path, lineno))
        if not reference.strip():
            raise MissingField(f"{path}:{lineno}: reference is empty")
        if utterance_id in seen:
            raise DuplicateId(f"{path}:{lineno}: duplicate utterance_id {utterance_id!r}")
        seen.add(utterance_id)
        utterances.append(Utterance(
            utterance_id=utterance_id,
            dataset_id=dataset_id,
            reference=reference,
            audio_path=record.get("audio_path"),
            duration_s=_optional_seconds(record, "duration_s", path, lineno),
        ))
    return utterances


def write_references(path: str, utterances: list[Utterance]) -> None:
    records = []
    for utt in utterances:
        record = {
            "utterance_id": utt.utterance_id,
            "dataset_id": utt.dataset_id,
            "reference": utt.reference,
        }
        if utt.audio_path is not None:
            record["audio_path"] = utt.audio_path
        if utt.duration_s is not None:
            record["duration_s"] = utt.duration_s
        records.append(record)
    jsonl.write_records(path, records)


def load_hypotheses(path: str) -> list[Hypothesis]:
    hypotheses: list[Hypothesis] = []
    seen: set[tuple[str, str]] = set()
    for lineno, record in jsonl.read_records(path):
        utterance_id = str(_require(record, "utterance_id", path, lineno))
        model_id = str(_require(record, "model_id", path, lineno))
        if "text" not in record or record["text"] is None:
            raise MissingField(f"{path}:{lineno}: missing field 'text'")
        key = (utterance_id, model_id)
        if key in seen:
            raise DuplicatePair(f"{path}:{lineno}: duplicate (utterance_id, model_id) {key!r}")
        seen.add(key)
        hypotheses.append(Hypothesis(
            utterance_id=utterance_id,
            model_id=model_id,
            text=str(record["text"]),
            processing_time_s=_optional_seconds(record, "processing_time_s", path, lineno),
        ))
    return hypotheses


_WORD_SYMBOLS = set("%€$§&+=#@~*<>|^_{}[]\\/°")


def lint_manifest(references: list[Utterance]) -> list[LintWarning]:
    """Pure consistency lint; never fails, deterministic order."""
    warnings: list[LintWarning] = []
    for utt in references:
        if any(ch.isdigit() for ch in utt.reference):
            warnings.append(LintWarning(
                utt.utterance_id, "digit-in-reference",
                "reference contains digits (written-domain form; expected spoken-domain words)"))
        symbols = sorted({ch for ch in utt.reference if ch in _WORD_SYMBOLS})
        if symbols:
            warnings.append(LintWarning(
                utt.utterance_id, "symbol-in-reference",
                f"reference contains symbol(s) {''.join(symbols)!r}"))
        if not textnorm.canonical_words(utt.reference):
            warnings.append(LintWarning(
                utt.utterance_id, "empty-after-canonicalization",
                "reference has no scoreable words after canonicalization"))
        if utt.audio_path is not None and not os.path.exists(utt.audio_path):
            warnings.append(LintWarning(
                utt.utterance_id, "missing-audio",
                f"audio_path does not exist: {utt.audio_path}"))
    warnings.sort(key=lambda w: (w.utterance_id, w.kind))
    return warnings


def load_annotations(path: str) -> dict[str, AnnotationRecord]:
    """Last record per utterance_id wins; an absent file is an empty table."""
    table: dict[str, AnnotationRecord] = {}
    if not os.path.exists(path):
        return table
    for lineno, record in jsonl.read_records(path):
        utterance_id = str(_require(record, "utterance_id", path, lineno))
        category = record.get("category")
        if not isinstance(category, int) or not 1 <= category <= 8:
            raise ParseError(f"category must be an integer in 1..8, got {category!r}", path, lineno)
        annotator = str(_require(record, "annotator", path, lineno))
        timestamp = str(_require(record, "timestamp", path, lineno))
        subtags = record.get("subtags") or []
        if not isinstance(subtags, list):
            raise ParseError("subtags must be a list of strings", path, lineno)
        note = record.get("note")
        table[utterance_id] = AnnotationRecord(
            utterance_id=utterance_id,
            category=category,
            subtags=frozenset(str(t) for t in subtags),
            annotator=annotator,
            timestamp=timestamp,
            note=None if note is None else str(note),
        )
    return table


def append_annotation(path: str, record: AnnotationRecord) -> None:
    payload = {
        "utterance_id": record.utterance_id,
        "category": record.category,
        "subtags": sorted(record.subtags),
        "annotator": record.annotator,
        "timestamp": record.timestamp,
    }
    if record.note is not None:
        payload["note"] = record.note
    jsonl.append_record(path, payload)


def hypotheses_by_utterance(hypotheses: list[Hypothesis]) -> dict[str, dict[str, Hypothesis]]:
    """Group hypotheses as utterance_id -> model_id -> Hypothesis."""
    grouped: dict[str, dict[str, Hypothesis]] = {}
    for hyp in hypotheses:
        grouped.setdefault(hyp.utterance_id, {})[hyp.model_id] = hyp
    return grouped


def timing_totals(references: list[Utterance],
                  hypotheses: list[Hypothesis]) -> dict[str, dict[str, float]]:
    """Per-model processing/audio second totals from ingested metadata.

    Utterances without a duration (or predictions without a time) are
    skipped for that model rather than failing.
    """
    durations = {u.utterance_id: u.duration_s for u in references}
    totals: dict[str, dict[str, float]] = {}
    for hyp in hypotheses:
        duration = durations.get(hyp.utterance_id)
        if duration is None or hyp.processing_time_s is None:
            continue
        bucket = totals.setdefault(hyp.model_id, {"total_processing_s": 0.0, "total_audio_s": 0.0})
        bucket["total_processing_s"] += hyp.processing_time_s
        bucket["total_audio_s"] += duration
    return totals
