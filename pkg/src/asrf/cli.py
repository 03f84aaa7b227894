"""Command-line pipeline: validate, score, classify, aggregate, review.

Exit codes: 0 success, 1 usage error, 2 data error. Every output is
written atomically and carries the run configuration in its header
(JSONL header record / JSON field / table footnote), so identical inputs
and flags yield byte-identical outputs.
"""

import json
import os
import sys

import click

from . import align, audioqc, classify, corpus, ingest, jsonl, pipeline, report, textnorm
from .config import RunConfig, default_jobs
from .errors import DataError


@click.group()
def cli():
    """Transcript evaluation and error forensics for German ASR output."""


def _load_corpus(refs: str, hyps: str):
    return ingest.load_references(refs), ingest.load_hypotheses(hyps)


def _lexicons(german, names, english, synonyms, abbreviations):
    return classify.load_lexicons(german, names, english, synonyms, abbreviations)


@cli.group("ingest")
def ingest_group():
    """Manifest loading and validation."""


@ingest_group.command("validate")
@click.option("--refs", required=True, type=click.Path(exists=True))
@click.option("--hyps", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), help="Write warnings as JSONL instead of stdout.")
def ingest_validate(refs, hyps, out):
    """Load manifests, report lint warnings (linting never fails)."""
    references = ingest.load_references(refs)
    if hyps:
        ingest.load_hypotheses(hyps)
    warnings = ingest.lint_manifest(references)
    records = [{"utterance_id": w.utterance_id, "kind": w.kind, "message": w.message}
               for w in warnings]
    if out:
        config = RunConfig(refs=refs, hyps=hyps)
        jsonl.write_records(out, records, header=config.as_dict())
    else:
        for rec in records:
            click.echo(jsonl.dumps(rec))
    click.echo(f"{len(references)} references ok, {len(records)} warning(s)", err=True)


@cli.command()
@click.option("--refs", required=True, type=click.Path(exists=True))
@click.option("--hyps", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--render-digits", is_flag=True,
              help="Render bare integers in references as number words before scoring.")
@click.option("--jobs", type=int, default=None, help="Parallel workers (env ASRF_JOBS).")
def score(refs, hyps, out, render_digits, jobs):
    """Align hypotheses against references and write scores.jsonl."""
    references, hypotheses = _load_corpus(refs, hyps)
    jobs = jobs if jobs is not None else default_jobs()
    config = RunConfig(refs=refs, hyps=hyps, render_digits=render_digits, jobs=jobs)
    scored = pipeline.score_corpus(references, hypotheses,
                                   render_digits=render_digits, jobs=jobs)
    pipeline.write_scores(out, scored, header=config.as_dict())
    click.echo(f"scored {len(scored)} pairs -> {out}", err=True)


@cli.command()
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(["per-model", "intersection", "difference"]),
              default="per-model")
@click.option("--model", help="Target model for --mode difference.")
@click.option("--out", type=click.Path())
def errorsets(scores_path, mode, model, out):
    """Build per-model error sets and their intersection/differences."""
    scored = pipeline.load_scores(scores_path)
    models = sorted({s.model_id for s in scored})
    sets = {m: corpus.error_set(m, scored) for m in models}
    if mode == "intersection":
        selected = [corpus.intersect([sets[m] for m in models])]
    elif mode == "difference":
        if not model or model not in sets:
            raise click.UsageError(f"--mode difference needs --model, one of {models}")
        selected = [corpus.difference(sets[model], [sets[m] for m in models if m != model])]
    else:
        selected = [sets[m] for m in models]
    payload = {
        "config": RunConfig().as_dict(),
        "sets": [{"model_id": s.model_id, "size": len(s), "members": sorted(s.members)}
                 for s in selected],
    }
    if out:
        jsonl.write_json(out, payload)
        click.echo(f"wrote {out}", err=True)
    else:
        click.echo(json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2))


@cli.command("classify")
@click.option("--refs", required=True, type=click.Path(exists=True))
@click.option("--hyps", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--flags", "flags_path", type=click.Path(exists=True),
              help="flags.jsonl from `audioqc flags`; flagged utterances propose category 8.")
@click.option("--patterns-out", type=click.Path(), help="Also mine systematic substitutions.")
@click.option("--k-agreement", type=int, default=None,
              help="Models that must agree for a flawed-ground-truth proposal (default: all).")
@click.option("--min-count", type=int, default=5, show_default=True)
@click.option("--min-utts", type=int, default=3, show_default=True)
@click.option("--render-digits", is_flag=True)
@click.option("--lexicon-german", type=click.Path(exists=True))
@click.option("--lexicon-names", type=click.Path(exists=True))
@click.option("--lexicon-english", type=click.Path(exists=True))
@click.option("--synonyms", type=click.Path(exists=True))
@click.option("--abbreviations", type=click.Path(exists=True))
def classify_cmd(refs, hyps, out, flags_path, patterns_out, k_agreement, min_count,
                 min_utts, render_digits, lexicon_german, lexicon_names,
                 lexicon_english, synonyms, abbreviations):
    """Label every error span with a taxonomy category and subtags."""
    references, hypotheses = _load_corpus(refs, hyps)
    lexicons = _lexicons(lexicon_german, lexicon_names, lexicon_english,
                         synonyms, abbreviations)
    flagged = set()
    if flags_path:
        for _, rec in jsonl.read_records(flags_path):
            if any(rec.get(k) for k in ("boundary_cutoff_start", "boundary_cutoff_end",
                                        "clipping", "too_short")):
                flagged.add(str(rec["utterance_id"]))
    config = RunConfig(refs=refs, hyps=hyps, k_agreement=k_agreement,
                       min_count=min_count, min_utts=min_utts,
                       render_digits=render_digits)
    labeled = classify.classify_corpus(
        references, hypotheses, lexicons,
        config=classify.ClassifyConfig(k_agreement=k_agreement),
        audio_flagged=flagged, render_digits=render_digits)
    classify.write_labels(out, labeled, header=config.as_dict())
    click.echo(f"labeled {len(labeled)} spans -> {out}", err=True)
    if patterns_out:
        patterns = corpus.systematic_substitutions(labeled, min_count, min_utts)
        jsonl.write_records(patterns_out, [{
            "model_id": p.model_id, "ref_word": p.ref_word, "hyp_word": p.hyp_word,
            "occurrence_count": p.occurrence_count,
            "distinct_utterances": p.distinct_utterances, "synonym": p.synonym,
        } for p in patterns], header=config.as_dict())
        click.echo(f"mined {len(patterns)} patterns -> {patterns_out}", err=True)


@cli.command()
@click.option("--refs", required=True, type=click.Path(exists=True))
@click.option("--hyps", required=True, type=click.Path(exists=True))
@click.option("--train-vocab", "train_vocab", required=True, multiple=True,
              help="Vocabulary file, or MODEL=FILE to scope it to one model; repeatable.")
@click.option("--out", required=True, type=click.Path())
@click.option("--render-digits", is_flag=True)
def vocab(refs, hyps, train_vocab, out, render_digits):
    """Coverage of reference word types unseen in model training vocabularies."""
    references, hypotheses = _load_corpus(refs, hyps)
    models = sorted({h.model_id for h in hypotheses})
    per_model_vocab: dict[str, str] = {}
    for entry in train_vocab:
        model, sep, path = entry.partition("=")
        if sep:
            per_model_vocab[model] = path
        else:
            for m in models:
                per_model_vocab.setdefault(m, entry)
    ref_words = {u.utterance_id: tuple(textnorm.canonical_words(
        u.reference, render_digits=render_digits)) for u in references}
    reports = {}
    for model in models:
        path = per_model_vocab.get(model)
        if path is None:
            continue
        words = classify.load_lexicons(german_path=path).german
        alignments = pipeline.alignments_for_model(references, hypotheses, model,
                                                   render_digits=render_digits)
        rep = corpus.vocab_coverage(words, model, ref_words, alignments)
        fraction = rep.well_generalized_fraction
        reports[model] = {
            "training_vocab_size": rep.training_vocab_size,
            "unseen_word_types": rep.unseen_word_types,
            "well_generalized_types": rep.well_generalized_types,
            "well_generalized_fraction": None if fraction is None else round(float(fraction), 4),
        }
    config = RunConfig(refs=refs, hyps=hyps, render_digits=render_digits)
    jsonl.write_json(out, {"config": config.as_dict(), "models": reports})
    click.echo(f"vocab coverage for {len(reports)} model(s) -> {out}", err=True)


@cli.group("audioqc")
def audioqc_group():
    """WAV padding and flaw detection."""


@audioqc_group.command("pad")
@click.option("--in-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--pad", "pad_s", type=float, default=0.3, show_default=True)
def audioqc_pad(in_dir, out_dir, pad_s):
    """Add leading/trailing silence to every WAV under --in-dir."""
    count = 0
    for root, _, files in sorted(os.walk(in_dir)):
        for name in sorted(files):
            if not name.lower().endswith(".wav"):
                continue
            src = os.path.join(root, name)
            rel = os.path.relpath(src, in_dir)
            dst = os.path.join(out_dir, rel)
            os.makedirs(os.path.dirname(dst), exist_ok=True)
            clip = audioqc.read_wav(src)
            audioqc.write_wav(dst, audioqc.pad_silence(clip, pad_s))
            count += 1
    click.echo(f"padded {count} file(s) -> {out_dir}", err=True)


@audioqc_group.command("flags")
@click.option("--refs", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--window", type=float, default=0.05, show_default=True)
@click.option("--margin-db", type=float, default=10.0, show_default=True)
@click.option("--min-duration", type=float, default=0.3, show_default=True)
def audioqc_flags(refs, out, window, margin_db, min_duration):
    """Run QC over every utterance with an audio_path and write flags.jsonl."""
    references = ingest.load_references(refs)
    thresholds = audioqc.QcThresholds(window_s=window, margin_db=margin_db,
                                      min_duration_s=min_duration)
    records = []
    for utt in sorted(references, key=lambda u: u.utterance_id):
        if utt.audio_path is None or not os.path.exists(utt.audio_path):
            continue
        flags = audioqc.qc_flags(audioqc.read_wav(utt.audio_path), thresholds)
        records.append({
            "utterance_id": utt.utterance_id,
            "boundary_cutoff_start": flags.boundary_cutoff_start,
            "boundary_cutoff_end": flags.boundary_cutoff_end,
            "clipping": flags.clipping,
            "too_short": flags.too_short,
        })
    config = RunConfig(refs=refs)
    jsonl.write_records(out, records, header=config.as_dict())
    click.echo(f"flagged {len(records)} clip(s) -> {out}", err=True)


@cli.command("report")
@click.option("--refs", required=True, type=click.Path(exists=True))
@click.option("--hyps", required=True, type=click.Path(exists=True))
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True))
@click.option("--labels", "labels_path", type=click.Path(exists=True))
@click.option("--annotations", type=click.Path())
@click.option("--timings", type=click.Path(exists=True),
              help="JSON {model: {total_processing_s, total_audio_s}}; default: from metadata.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json", "md"]), default="md",
              show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--render-digits", is_flag=True)
def report_cmd(refs, hyps, scores_path, labels_path, annotations, timings, fmt, out,
               render_digits):
    """Render WER, proportion, adjusted-WER, and speed tables."""
    references, hypotheses = _load_corpus(refs, hyps)
    scored = pipeline.load_scores(scores_path)
    os.makedirs(out, exist_ok=True)
    config = RunConfig(refs=refs, hyps=hyps, annotations=annotations,
                       render_digits=render_digits)
    note = f"run config: {json.dumps(config.as_dict(), sort_keys=True)}"

    datasets_in_order = []
    dataset_of = {}
    for utt in references:
        dataset_of[utt.utterance_id] = utt.dataset_id
        if utt.dataset_id not in datasets_in_order:
            datasets_in_order.append(utt.dataset_id)
    models = sorted({s.model_id for s in scored})
    wers = {m: {} for m in models}
    for model in models:
        for dataset in datasets_in_order:
            subset = [s.score for s in scored
                      if s.model_id == model and dataset_of.get(s.utterance_id) == dataset]
            if subset:
                wers[model][dataset] = align.corpus_wer(subset)
    covered = [d for d in datasets_in_order if all(d in wers[m] for m in models)]
    tables = [report.wer_table(wers, covered, models)]

    if labels_path:
        labeled_records = classify.load_labels(labels_path)
        human = {}
        if annotations and os.path.exists(annotations):
            human = {u: classify.CategoryLabel(rec.category, rec.subtags, classify.HUMAN)
                     for u, rec in ingest.load_annotations(annotations).items()}
        span_cats, utt_cats = classify.effective_distributions(labeled_records, human)
        tables.append(report.proportions_table(span_cats, utt_cats))
        labeled = classify.classify_corpus(
            references, hypotheses, classify.load_lexicons(),
            render_digits=render_digits)
        adjusted = corpus.adjusted_wer(scored, labeled, human)
        rows = tuple((m, v["raw"] * 100, v["adjusted"] * 100,
                      (v["raw"] - v["adjusted"]) * 100)
                     for m, v in adjusted.items())
        tables.append(report.ReportTable(
            title="Raw vs adjusted WER (%)",
            columns=("model", "raw", "adjusted", "delta"),
            rows=rows))

    timing_data = jsonl.load_json(timings) if timings else ingest.timing_totals(
        references, hypotheses)
    records = [report.TimingRecord(m, v["total_processing_s"], v["total_audio_s"])
               for m, v in sorted(timing_data.items())]
    if records:
        tables.append(report.rtf_table(records))

    names = {"Word error rates (%)": "wer", "Error classification and proportions":
             "proportions", "Raw vs adjusted WER (%)": "adjusted", "Model speed": "rtf"}
    for table in tables:
        stamped = report.ReportTable(table.title, table.columns, table.rows,
                                     table.footnotes + (note,))
        path = os.path.join(out, f"{names[table.title]}.{fmt}")
        jsonl.atomic_write_bytes(path, report.render(stamped, fmt))
        click.echo(f"wrote {path}", err=True)


@cli.group("review")
def review_group():
    """Human adjudication service."""


@review_group.command("serve")
@click.option("--refs", required=True, type=click.Path(exists=True))
@click.option("--hyps", required=True, type=click.Path(exists=True))
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True))
@click.option("--annotations", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8315, show_default=True)
@click.option("--ui-dir", type=click.Path(file_okay=False),
              help="Static assets directory (defaults to ./frontend/dist when present).")
def review_serve(refs, hyps, labels_path, annotations, host, port, ui_dir):
    """Serve the adjudication queue over HTTP."""
    import uvicorn

    from .review import build_app

    references, hypotheses = _load_corpus(refs, hyps)
    labels = classify.load_labels(labels_path)
    app = build_app(references, hypotheses, labels, annotations, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cli.main(args=argv, prog_name="asrf", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
