"""HTTP adjudication service for the human review queue.

Utterances whose automatic labels carry needs_human=True form the queue;
posting a label appends to the annotations JSONL store (append-only, last
record per utterance wins) and removes the item from the queue. Reads are
concurrent; appends are serialized through one lock.
"""

import datetime
import os
import threading
from dataclasses import dataclass

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse, Response
from pydantic import BaseModel, Field

from . import align, classify, ingest, textnorm

CATEGORY_RANGE = (1, 8)


class DiffOp(BaseModel):
    kind: str
    ref_token: str | None = None
    hyp_token: str | None = None


class ModelDiff(BaseModel):
    model_id: str
    text: str
    ops: list[DiffOp]


class ReviewItem(BaseModel):
    utterance_id: str
    reference: str
    models: list[ModelDiff]
    proposed_category: int | None = None
    proposed_subtags: list[str] = Field(default_factory=list)
    has_audio: bool = False


class QueuePage(BaseModel):
    total: int
    items: list[ReviewItem]


class LabelRequest(BaseModel):
    utterance_id: str
    category: int
    subtags: list[str] = Field(default_factory=list)
    annotator: str
    note: str | None = None


class LabelResponse(BaseModel):
    utterance_id: str
    category: int
    subtags: list[str]
    annotator: str
    note: str | None = None
    timestamp: str
    provenance: str = classify.HUMAN


class CategoryInfo(BaseModel):
    category: int
    name: str


@dataclass
class ReviewState:
    references: dict[str, ingest.Utterance]
    hypotheses: dict[str, dict[str, ingest.Hypothesis]]
    proposals: dict[str, classify.LabelRecord]
    annotations_path: str
    labeled: set[str]
    lock: threading.Lock

    def queue_ids(self) -> list[str]:
        return sorted(u for u in self.proposals if u not in self.labeled)


def _build_item(state: ReviewState, utterance_id: str) -> ReviewItem:
    utt = state.references[utterance_id]
    ref_words = tuple(textnorm.canonical_words(utt.reference))
    models = []
    for model_id, hyp in sorted(state.hypotheses.get(utterance_id, {}).items()):
        ops = align.word_alignment(ref_words, tuple(textnorm.canonical_words(hyp.text))) \
            if ref_words else []
        models.append(ModelDiff(
            model_id=model_id,
            text=hyp.text,
            ops=[DiffOp(kind=op.kind, ref_token=op.ref_token, hyp_token=op.hyp_token)
                 for op in ops],
        ))
    proposal = state.proposals.get(utterance_id)
    return ReviewItem(
        utterance_id=utterance_id,
        reference=utt.reference,
        models=models,
        proposed_category=proposal.label.category if proposal else None,
        proposed_subtags=sorted(proposal.label.subtags) if proposal else [],
        has_audio=bool(utt.audio_path and os.path.exists(utt.audio_path)),
    )


def build_app(references: list[ingest.Utterance],
              hypotheses: list[ingest.Hypothesis],
              labels: list[classify.LabelRecord],
              annotations_path: str,
              ui_dir: str | None = None) -> FastAPI:
    proposals: dict[str, classify.LabelRecord] = {}
    for rec in labels:
        if rec.label.needs_human and rec.utterance_id not in proposals:
            proposals[rec.utterance_id] = rec
    state = ReviewState(
        references={u.utterance_id: u for u in references},
        hypotheses=ingest.hypotheses_by_utterance(hypotheses),
        proposals=proposals,
        annotations_path=annotations_path,
        labeled=set(ingest.load_annotations(annotations_path)),
        lock=threading.Lock(),
    )

    app = FastAPI(title="asrf review", version="0.1.0")

    @app.get("/api/queue", response_model=QueuePage)
    def get_queue(limit: int = 20, offset: int = 0) -> QueuePage:
        ids = state.queue_ids()
        page = ids[offset:offset + limit]
        return QueuePage(total=len(ids), items=[_build_item(state, u) for u in page])

    @app.get("/api/categories", response_model=list[CategoryInfo])
    def get_categories() -> list[CategoryInfo]:
        return [CategoryInfo(category=c, name=n)
                for c, n in sorted(classify.CATEGORY_NAMES.items())]

    @app.get("/api/sample/{utterance_id}", response_model=ReviewItem)
    def get_sample(utterance_id: str) -> ReviewItem:
        if utterance_id not in state.references:
            raise HTTPException(status_code=404, detail="unknown utterance_id")
        return _build_item(state, utterance_id)

    @app.get("/api/audio/{utterance_id}")
    def get_audio(utterance_id: str) -> Response:
        utt = state.references.get(utterance_id)
        if utt is None or not utt.audio_path or not os.path.exists(utt.audio_path):
            raise HTTPException(status_code=404, detail="no audio for this utterance")
        return FileResponse(utt.audio_path, media_type="audio/wav")

    @app.post("/api/label", response_model=LabelResponse)
    def post_label(label: LabelRequest) -> LabelResponse:
        lo, hi = CATEGORY_RANGE
        if not lo <= label.category <= hi:
            raise HTTPException(status_code=400,
                                detail=f"category must be in {lo}..{hi}")
        if label.utterance_id not in state.references:
            raise HTTPException(status_code=404, detail="unknown utterance_id")
        if not label.annotator.strip():
            raise HTTPException(status_code=400, detail="annotator must not be empty")
        record = ingest.AnnotationRecord(
            utterance_id=label.utterance_id,
            category=label.category,
            subtags=frozenset(label.subtags),
            annotator=label.annotator,
            timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat(),
            note=label.note,
        )
        with state.lock:
            ingest.append_annotation(state.annotations_path, record)
            state.labeled.add(label.utterance_id)
        return LabelResponse(
            utterance_id=record.utterance_id,
            category=record.category,
            subtags=sorted(record.subtags),
            annotator=record.annotator,
            note=record.note,
            timestamp=record.timestamp,
        )

    static_dir = ui_dir or os.path.join(os.getcwd(), "frontend", "dist")
    if os.path.isdir(static_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
