"""Corpus-level scoring orchestration and the scores.jsonl interface.

scores.jsonl rows: {utterance_id, model_id, S, D, I, N, wer, cer,
spacing_only}. Rows are always sorted by (utterance_id, model_id) so a
parallel run produces the same bytes as a sequential one.
"""

from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import align, jsonl, textnorm
from .corpus import ScoredUtterance
from .errors import DataError
from .ingest import Hypothesis, Utterance


def _score_one(task: tuple[str, str, tuple[str, ...], tuple[str, ...]]) -> ScoredUtterance:
    utterance_id, model_id, ref_words, hyp_words = task
    utt_score = align.score(ref_words, hyp_words)
    return ScoredUtterance(
        utterance_id=utterance_id,
        model_id=model_id,
        score=utt_score,
        spacing_only=align.is_spacing_only(ref_words, hyp_words),
    )


def score_corpus(references: list[Utterance], hypotheses: list[Hypothesis],
                 render_digits: bool = False, jobs: int = 1) -> list[ScoredUtterance]:
    """Score every (utterance, model) pair with a known reference."""
    ref_words = {
        u.utterance_id: tuple(textnorm.canonical_words(u.reference, render_digits=render_digits))
        for u in references
    }
    tasks = []
    for hyp in hypotheses:
        words = ref_words.get(hyp.utterance_id)
        if words is None:
            raise DataError(f"hypothesis for unknown utterance_id {hyp.utterance_id!r}")
        if not words:
            raise align.EmptyReference(
                f"utterance {hyp.utterance_id!r} has no scoreable reference words")
        tasks.append((hyp.utterance_id, hyp.model_id, words,
                      tuple(textnorm.canonical_words(hyp.text))))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scored = list(pool.map(_score_one, tasks, chunksize=64))
    else:
        scored = [_score_one(task) for task in tasks]
    scored.sort(key=lambda s: (s.utterance_id, s.model_id))
    return scored


def write_scores(path: str, scored: list[ScoredUtterance],
                 header: dict | None = None) -> None:
    jsonl.write_records(path, [{
        "utterance_id": s.utterance_id,
        "model_id": s.model_id,
        "S": s.score.substitutions,
        "D": s.score.deletions,
        "I": s.score.insertions,
        "N": s.score.ref_len,
        "wer": _ratio(s.score.wer),
        "cer": _ratio(s.score.cer),
        "cer_edits": s.score.cer_edits,
        "cer_len": s.score.cer_len,
        "spacing_only": s.spacing_only,
    } for s in scored], header=header)


def _ratio(value: Fraction) -> float:
    return round(float(value), 6)


def load_scores(path: str) -> list[ScoredUtterance]:
    scored = []
    for _, rec in jsonl.read_records(path):
        scored.append(ScoredUtterance(
            utterance_id=str(rec["utterance_id"]),
            model_id=str(rec["model_id"]),
            score=align.UttScore(
                substitutions=int(rec["S"]),
                deletions=int(rec["D"]),
                insertions=int(rec["I"]),
                ref_len=int(rec["N"]),
                cer_edits=int(rec.get("cer_edits", 0)),
                cer_len=int(rec.get("cer_len", 1)),
            ),
            spacing_only=bool(rec["spacing_only"]),
        ))
    return scored


def alignments_for_model(references: list[Utterance], hypotheses: list[Hypothesis],
                         model_id: str, render_digits: bool = False,
                         ) -> dict[str, list[align.AlignOp]]:
    """utterance_id -> alignment ops for one model."""
    ref_words = {
        u.utterance_id: tuple(textnorm.canonical_words(u.reference, render_digits=render_digits))
        for u in references
    }
    out: dict[str, list[align.AlignOp]] = {}
    for hyp in hypotheses:
        if hyp.model_id != model_id:
            continue
        words = ref_words.get(hyp.utterance_id)
        if not words:
            continue
        out[hyp.utterance_id] = align.word_alignment(
            words, tuple(textnorm.canonical_words(hyp.text)))
    return out
