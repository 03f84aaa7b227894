"""Run configuration: one serializable record echoed into output headers."""

import dataclasses
import json
import os
from dataclasses import dataclass, field

from .audioqc import QcThresholds
from .classify import ClassifyConfig


@dataclass(frozen=True)
class RunConfig:
    refs: str | None = None
    hyps: str | None = None
    annotations: str | None = None
    train_vocab: str | None = None
    lexicon_german: str | None = None
    lexicon_names: str | None = None
    lexicon_english: str | None = None
    synonyms: str | None = None
    abbreviations: str | None = None
    k_agreement: int | None = None
    min_count: int = 5
    min_utts: int = 3
    pad_s: float = 0.3
    render_digits: bool = False
    seed: int = 0
    jobs: int = 1
    qc: QcThresholds = field(default_factory=QcThresholds)

    def classify_config(self) -> ClassifyConfig:
        return ClassifyConfig(k_agreement=self.k_agreement)

    def as_dict(self) -> dict:
        payload = dataclasses.asdict(self)
        return {k: v for k, v in payload.items() if v is not None}

    def header_line(self) -> str:
        return json.dumps({"asrf_config": self.as_dict()}, sort_keys=True)


def default_jobs() -> int:
    value = os.environ.get("ASRF_JOBS", "")
    try:
        return max(1, int(value))
    except ValueError:
        return 1
