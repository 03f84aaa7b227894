"""Taxonomy classification of transcript error spans.

Every maximal run of non-match alignment ops is one ErrorSpan and receives
exactly one category:

  1 negligible variant        5 homophone of a real word
  2 minor, noncontext-breaking 6 flawed ground truth (proposal, human-gated)
  3 major, context-breaking    7 ambiguous audio (human-only)
  4 name / loan word / anglicism 8 flawed audio (proposal, human-gated)

Decision order (first hit wins): negligible equivalence; cross-model
agreement against the reference (category-6 proposal); real-word homophone;
name/loanword; out-of-lexicon misspelling within the minor edit budget;
audio-flag proposal (category 8); otherwise major. Categories 6 and 7 are
never finalized automatically: auto labels for them always carry
needs_human=True. Category 7 has no auto heuristic at all.

Subtags (naive-normalization, year-style, punctuation-word-dropped,
indirect-transcription, hallucinated-prefix, systematic-substitution) are
attached independently of the category decision.
"""

import math
from dataclasses import dataclass, field, replace
from importlib import resources

from . import align, jsonl, numwords, phon, textnorm
from .errors import DataError

NEGLIGIBLE = 1
MINOR = 2
MAJOR = 3
NAME_LOAN = 4
HOMOPHONE = 5
FLAWED_GROUND_TRUTH = 6
AMBIGUOUS_AUDIO = 7
FLAWED_AUDIO = 8

CATEGORY_NAMES = {
    NEGLIGIBLE: "Negligible",
    MINOR: "Noncontext-breaking",
    MAJOR: "Context-breaking",
    NAME_LOAN: "Name, anglicism, loan word",
    HOMOPHONE: "Homophone",
    FLAWED_GROUND_TRUTH: "Flawed ground truth transcript",
    AMBIGUOUS_AUDIO: "Ambiguous audio input",
    FLAWED_AUDIO: "Flawed audio input",
}

# Decision-order priority, reused for the utterance-level rollup.
CATEGORY_PRIORITY = (NEGLIGIBLE, FLAWED_GROUND_TRUTH, HOMOPHONE, NAME_LOAN,
                     MINOR, FLAWED_AUDIO, AMBIGUOUS_AUDIO, MAJOR)

SUBTAG_NAIVE_NORMALIZATION = "naive-normalization"
SUBTAG_PUNCTUATION_DROPPED = "punctuation-word-dropped"
SUBTAG_INDIRECT = "indirect-transcription"
SUBTAG_SYSTEMATIC = "systematic-substitution"
SUBTAG_HALLUCINATED_PREFIX = "hallucinated-prefix"
SUBTAG_YEAR_STYLE = "year-style"

AUTO = "auto"
HUMAN = "human"


class LexiconMissing(DataError):
    pass


@dataclass(frozen=True)
class LexiconSet:
    """User-suppliable word lists; the built-in set covers the test fixtures."""

    german: frozenset[str]
    names: frozenset[str]
    english: frozenset[str]
    synonyms: frozenset[frozenset[str]]
    abbreviations: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def is_german_word(self, word: str) -> bool:
        return word in self.german or numwords.parse(word) is not None

    def is_name_or_loan(self, word: str) -> bool:
        return word in self.names or word in self.english


def _read_word_list(text: str) -> frozenset[str]:
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        words.update(textnorm.canonical_words(line))
    return frozenset(words)


def _read_text(name: str, path: str | None) -> str:
    if path is None:
        return resources.files("asrf.data").joinpath(name).read_text("utf-8")
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_synonyms(path: str | None = None) -> frozenset[frozenset[str]]:
    pairs = set()
    for line in _read_text("synonyms.tsv", path).splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        words = textnorm.canonical_words(line.replace("\t", " "))
        if len(words) == 2 and words[0] != words[1]:
            pairs.add(frozenset(words))
    return frozenset(pairs)


def load_lexicons(german_path: str | None = None,
                  names_path: str | None = None,
                  english_path: str | None = None,
                  synonyms_path: str | None = None,
                  abbreviations_path: str | None = None) -> LexiconSet:
    """Load lexicons from files; None falls back to the built-in resources."""
    return LexiconSet(
        german=_read_word_list(_read_text("lexicon_de.txt", german_path)),
        names=_read_word_list(_read_text("lexicon_names.txt", names_path)),
        english=_read_word_list(_read_text("lexicon_en.txt", english_path)),
        synonyms=load_synonyms(synonyms_path),
        abbreviations=textnorm.load_abbreviations(abbreviations_path),
    )


@dataclass(frozen=True)
class ClassifyConfig:
    k_agreement: int | None = None  # None = every model must agree
    confusion_pairs: frozenset[frozenset[str]] = frozenset(
        frozenset(p) for p in ("dt", "bp", "gk", "sz"))
    punctuation_words: frozenset[str] = frozenset({"punkt", "komma"})
    prefix_min_insertions: int = 2
    minor_budget_cap: int = 3


@dataclass(frozen=True)
class ErrorSpan:
    utterance_id: str
    model_id: str
    span_index: int
    ops: tuple[align.AlignOp, ...]
    starts_alignment: bool = False

    @property
    def ref_words(self) -> tuple[str, ...]:
        return tuple(op.ref_token for op in self.ops if op.ref_token is not None)

    @property
    def hyp_words(self) -> tuple[str, ...]:
        return tuple(op.hyp_token for op in self.ops if op.hyp_token is not None)

    @property
    def edits(self) -> int:
        return len(self.ops)

    def single_substitution(self) -> tuple[str, str] | None:
        if len(self.ops) == 1 and self.ops[0].kind == align.SUBSTITUTE:
            return self.ops[0].ref_token, self.ops[0].hyp_token
        return None


@dataclass(frozen=True)
class CategoryLabel:
    category: int
    subtags: frozenset[str] = frozenset()
    provenance: str = AUTO
    needs_human: bool = False


@dataclass(frozen=True)
class SpanContext:
    """Per-utterance view handed to the span classifier."""

    lexicons: LexiconSet
    ref_words: tuple[str, ...]
    hypotheses: dict[str, tuple[str, ...]]  # model_id -> canonical words
    audio_flagged: bool = False
    config: ClassifyConfig = ClassifyConfig()


def extract_spans(utterance_id: str, model_id: str,
                  ops: list[align.AlignOp]) -> list[ErrorSpan]:
    """Maximal contiguous runs of non-match ops, in alignment order."""
    spans: list[ErrorSpan] = []
    run: list[align.AlignOp] = []
    run_start = 0
    for idx, op in enumerate(ops):
        if op.is_error:
            if not run:
                run_start = idx
            run.append(op)
        elif run:
            spans.append(ErrorSpan(utterance_id, model_id, len(spans),
                                   tuple(run), starts_alignment=run_start == 0))
            run = []
    if run:
        spans.append(ErrorSpan(utterance_id, model_id, len(spans),
                               tuple(run), starts_alignment=run_start == 0))
    return spans


def detect_suspect_ground_truth(ref_words: tuple[str, ...],
                                hypotheses: dict[str, tuple[str, ...]],
                                k: int | None = None) -> bool:
    """At least k models (default: all) agree on one hypothesis != reference."""
    if len(hypotheses) < 2:
        return False
    threshold = len(hypotheses) if k is None else k
    counts: dict[tuple[str, ...], int] = {}
    for words in hypotheses.values():
        counts[words] = counts.get(words, 0) + 1
    return any(words != tuple(ref_words) and n >= threshold
               for words, n in counts.items())


def _agreeing_hypothesis(ref_words: tuple[str, ...],
                         hypotheses: dict[str, tuple[str, ...]],
                         k: int | None) -> tuple[str, ...] | None:
    if len(hypotheses) < 2:
        return None
    threshold = len(hypotheses) if k is None else k
    counts: dict[tuple[str, ...], int] = {}
    for words in hypotheses.values():
        counts[words] = counts.get(words, 0) + 1
    candidates = [w for w, n in counts.items()
                  if w != tuple(ref_words) and n >= threshold]
    if not candidates:
        return None
    return max(candidates, key=lambda w: (counts[w], w))


def detect_hallucinated_prefix(ops: list[align.AlignOp] | tuple[align.AlignOp, ...],
                               min_insertions: int = 2) -> str | None:
    """Leading run of >= min_insertions insertions marks an invented opening."""
    leading = 0
    for op in ops:
        if op.kind == align.INSERT:
            leading += 1
        else:
            break
    return SUBTAG_HALLUCINATED_PREFIX if leading >= min_insertions else None


def detect_indirect_transcription(span: ErrorSpan,
                                  synonyms: frozenset[frozenset[str]]) -> str | None:
    """Single-word substitution between listed synonym pairs."""
    pair = span.single_substitution()
    if pair is not None and frozenset(pair) in synonyms:
        return SUBTAG_INDIRECT
    return None


def _number_style_mismatch(span: ErrorSpan) -> bool:
    pair = span.single_substitution()
    if pair is None:
        return False
    ref_num, hyp_num = numwords.parse(pair[0]), numwords.parse(pair[1])
    return (ref_num is not None and hyp_num is not None
            and ref_num.value == hyp_num.value and ref_num.style != hyp_num.style)


def _number_value_mismatch(span: ErrorSpan) -> bool:
    ref_nums = [numwords.parse(w) for w in span.ref_words]
    hyp_nums = [numwords.parse(w) for w in span.hyp_words]
    if not ref_nums or not hyp_nums:
        return False
    if any(n is None for n in ref_nums) or any(n is None for n in hyp_nums):
        return False
    return [n.value for n in ref_nums] != [n.value for n in hyp_nums]


def _within_minor_budget(ref_word: str, hyp_word: str, config: ClassifyConfig) -> bool:
    budget = min(config.minor_budget_cap, math.ceil(len(ref_word) / 4))
    ops = align.word_alignment(list(ref_word), list(hyp_word))
    edits = [op for op in ops if op.is_error]
    if not edits or len(edits) > budget:
        return False
    for op in edits:
        if op.kind == align.SUBSTITUTE and \
                frozenset((op.ref_token, op.hyp_token)) not in config.confusion_pairs:
            return False
    return True


def _subtags(span: ErrorSpan, ctx: SpanContext) -> frozenset[str]:
    tags = set()
    if _number_style_mismatch(span):
        tags.update({SUBTAG_NAIVE_NORMALIZATION, SUBTAG_YEAR_STYLE})
    elif _number_value_mismatch(span):
        tags.add(SUBTAG_NAIVE_NORMALIZATION)
    if any(op.kind == align.DELETE and op.ref_token in ctx.config.punctuation_words
           for op in span.ops):
        tags.add(SUBTAG_PUNCTUATION_DROPPED)
    indirect = detect_indirect_transcription(span, ctx.lexicons.synonyms)
    if indirect:
        tags.add(indirect)
    if span.starts_alignment and \
            detect_hallucinated_prefix(span.ops, ctx.config.prefix_min_insertions):
        tags.add(SUBTAG_HALLUCINATED_PREFIX)
    return frozenset(tags)


def classify_span(span: ErrorSpan, ctx: SpanContext) -> CategoryLabel:
    """Assign exactly one category plus subtags to one error span."""
    if ctx.lexicons is None:
        raise LexiconMissing("lexicons must be loaded before classification")
    lex = ctx.lexicons
    subtags = _subtags(span, ctx)

    if textnorm.equivalent(span.ref_words, span.hyp_words, lex.abbreviations):
        return CategoryLabel(NEGLIGIBLE, subtags)

    agreeing = _agreeing_hypothesis(ctx.ref_words, ctx.hypotheses, ctx.config.k_agreement)
    if agreeing is not None and ctx.hypotheses.get(span.model_id) == agreeing:
        return CategoryLabel(FLAWED_GROUND_TRUTH, subtags, needs_human=True)

    pair = span.single_substitution()
    if pair is not None and lex.is_german_word(pair[1]) and phon.is_homophone(*pair):
        return CategoryLabel(HOMOPHONE, subtags)

    if any(lex.is_name_or_loan(w) and w not in lex.german for w in span.ref_words):
        return CategoryLabel(NAME_LOAN, subtags)

    if pair is not None and not lex.is_german_word(pair[1]) and \
            _within_minor_budget(pair[0], pair[1], ctx.config):
        return CategoryLabel(MINOR, subtags)

    if ctx.audio_flagged:
        return CategoryLabel(FLAWED_AUDIO, subtags, needs_human=True)

    return CategoryLabel(MAJOR, subtags)


def utterance_category(labels: list[CategoryLabel]) -> int | None:
    """Roll span labels up to one utterance label by decision priority."""
    if not labels:
        return None
    rank = {cat: i for i, cat in enumerate(CATEGORY_PRIORITY)}
    return min(labels, key=lambda lbl: rank[lbl.category]).category


@dataclass(frozen=True)
class LabeledSpan:
    span: ErrorSpan
    label: CategoryLabel


def classify_corpus(references, hypotheses, lexicons: LexiconSet,
                    config: ClassifyConfig = ClassifyConfig(),
                    audio_flagged: set[str] | None = None,
                    render_digits: bool = False) -> list[LabeledSpan]:
    """Align and classify every errored utterance/model pair.

    Iterates utterances in id order and models in id order, so output is
    deterministic regardless of input ordering. After span classification,
    substitution pairs recurring across >= 3 utterances of a model gain the
    systematic-substitution subtag.
    """
    audio_flagged = audio_flagged or set()
    by_utt = {}
    for hyp in hypotheses:
        by_utt.setdefault(hyp.utterance_id, {})[hyp.model_id] = hyp

    labeled: list[LabeledSpan] = []
    for utt in sorted(references, key=lambda u: u.utterance_id):
        models = by_utt.get(utt.utterance_id)
        if not models:
            continue
        ref_words = tuple(textnorm.canonical_words(utt.reference, render_digits=render_digits))
        if not ref_words:
            continue
        hyp_words = {m: tuple(textnorm.canonical_words(h.text)) for m, h in models.items()}
        ctx_base = SpanContext(
            lexicons=lexicons, ref_words=ref_words, hypotheses=hyp_words,
            audio_flagged=utt.utterance_id in audio_flagged, config=config)
        for model_id in sorted(models):
            ops = align.word_alignment(ref_words, hyp_words[model_id])
            for span in extract_spans(utt.utterance_id, model_id, ops):
                labeled.append(LabeledSpan(span, classify_span(span, ctx_base)))

    _mark_systematic(labeled)
    return labeled


def _mark_systematic(labeled: list[LabeledSpan], min_count: int = 5,
                     min_utts: int = 3) -> None:
    counts: dict[tuple[str, str, str], set[str]] = {}
    occurrences: dict[tuple[str, str, str], int] = {}
    for item in labeled:
        pair = item.span.single_substitution()
        if pair is None:
            continue
        key = (item.span.model_id, pair[0], pair[1])
        occurrences[key] = occurrences.get(key, 0) + 1
        counts.setdefault(key, set()).add(item.span.utterance_id)
    systematic = {key for key, n in occurrences.items()
                  if n >= min_count and len(counts[key]) >= min_utts}
    for idx, item in enumerate(labeled):
        pair = item.span.single_substitution()
        if pair is None:
            continue
        key = (item.span.model_id, pair[0], pair[1])
        if key in systematic:
            labeled[idx] = LabeledSpan(item.span, replace(
                item.label, subtags=item.label.subtags | {SUBTAG_SYSTEMATIC}))


def write_labels(path: str, labeled: list[LabeledSpan], header: dict | None = None) -> None:
    jsonl.write_records(path, [{
        "utterance_id": item.span.utterance_id,
        "model_id": item.span.model_id,
        "span_index": item.span.span_index,
        "category": item.label.category,
        "subtags": sorted(item.label.subtags),
        "provenance": item.label.provenance,
        "needs_human": item.label.needs_human,
    } for item in labeled], header=header)


@dataclass(frozen=True)
class LabelRecord:
    utterance_id: str
    model_id: str
    span_index: int
    label: CategoryLabel


def effective_distributions(records: list["LabelRecord"],
                            human: dict[str, CategoryLabel] | None = None,
                            ) -> tuple[list[int], list[int]]:
    """Span- and utterance-level category sequences, human labels applied."""
    human = human or {}
    span_categories: list[int] = []
    by_utterance: dict[str, list[CategoryLabel]] = {}
    for rec in records:
        label = human.get(rec.utterance_id, rec.label)
        span_categories.append(label.category)
        by_utterance.setdefault(rec.utterance_id, []).append(label)
    utterance_categories = [utterance_category(labels)
                            for _, labels in sorted(by_utterance.items())]
    return span_categories, utterance_categories


def load_labels(path: str) -> list[LabelRecord]:
    records = []
    for _, rec in jsonl.read_records(path):
        records.append(LabelRecord(
            utterance_id=str(rec["utterance_id"]),
            model_id=str(rec["model_id"]),
            span_index=int(rec["span_index"]),
            label=CategoryLabel(
                category=int(rec["category"]),
                subtags=frozenset(rec.get("subtags") or []),
                provenance=str(rec.get("provenance", AUTO)),
                needs_human=bool(rec.get("needs_human", False)),
            ),
        ))
    return records
