"""Tabular aggregates rendered to CSV, JSON, or Markdown.

Numeric cells hold exact values (Fraction or float) and are rounded only
at render time: half-up, two decimals. Percent-valued cells store the
value already scaled to percent (12.76 renders as "12.76"); columns say
so in their header. The RTF column alone keeps four decimals because
real-time factors live well below 0.01, and derived speed ratios are
always computed from unrounded values.
"""

import csv
import io
import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Sequence

from .errors import DataError


class RaggedInput(DataError):
    pass


class EmptyInput(DataError):
    pass


class ZeroAudio(DataError):
    pass


@dataclass(frozen=True)
class ReportTable:
    title: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    footnotes: tuple[str, ...] = ()

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise RaggedInput(
                    f"table {self.title!r}: row of {len(row)} cells in a "
                    f"{len(self.columns)}-column table")


@dataclass(frozen=True)
class TimingRecord:
    model_id: str
    total_processing_s: float
    total_audio_s: float

    @property
    def rtf(self) -> float:
        return self.total_processing_s / self.total_audio_s


def round_half_up(value, digits: int = 2) -> str:
    if isinstance(value, Fraction):
        dec = Decimal(value.numerator) / Decimal(value.denominator)
    else:
        dec = Decimal(str(value))
    quantum = Decimal(1).scaleb(-digits)
    return str(dec.quantize(quantum, rounding=ROUND_HALF_UP))


def format_cell(cell, digits: int = 2) -> str:
    if isinstance(cell, str):
        return cell
    return round_half_up(cell, digits)


def wer_table(wers: dict[str, dict[str, Fraction | float]],
              dataset_order: Sequence[str],
              model_order: Sequence[str] | None = None) -> ReportTable:
    """Datasets x models WER table with average and median rows.

    ``wers`` holds ratios (model -> dataset -> WER as a fraction of words);
    cells are scaled to percent.
    """
    from .align import average_and_median

    if not wers:
        raise EmptyInput("no per-dataset WERs")
    models = list(model_order) if model_order else sorted(wers)
    for model in models:
        missing = [d for d in dataset_order if d not in wers.get(model, {})]
        if missing:
            raise RaggedInput(f"model {model!r} lacks dataset(s) {missing}")
    rows = []
    for dataset in dataset_order:
        rows.append((dataset, *(_as_percent(wers[m][dataset]) for m in models)))
    averages, medians = {}, {}
    for model in models:
        averages[model], medians[model] = average_and_median(
            [_as_percent(wers[model][d]) for d in dataset_order])
    rows.append(("Average", *(averages[m] for m in models)))
    rows.append(("Median", *(medians[m] for m in models)))
    footnotes = tuple(
        f"robustness {m}: average - median = {round_half_up(averages[m] - medians[m])} pp"
        for m in models)
    return ReportTable(
        title="Word error rates (%)",
        columns=("dataset", *models),
        rows=tuple(rows),
        footnotes=footnotes,
    )


def _as_percent(value) -> Fraction:
    frac = Fraction(str(value)) if isinstance(value, float) else Fraction(value)
    return frac * 100


def proportions_table(categories: Sequence[int],
                      utterance_categories: Sequence[int] | None = None,
                      names: dict[int, str] | None = None) -> ReportTable:
    """Share of each category among labeled spans (and utterances)."""
    from .classify import CATEGORY_NAMES

    if not categories:
        raise EmptyInput("no labels to aggregate")
    names = names or CATEGORY_NAMES
    span_total = len(categories)
    utt_total = len(utterance_categories) if utterance_categories else 0
    columns = ["nr", "error category", "span share (%)"]
    if utterance_categories:
        columns.append("utterance share (%)")
    rows = []
    for category in sorted(names):
        span_share = Fraction(sum(1 for c in categories if c == category), span_total) * 100
        row = [str(category), names[category], span_share]
        if utterance_categories:
            row.append(Fraction(sum(1 for c in utterance_categories if c == category),
                                utt_total) * 100)
        rows.append(tuple(row))
    return ReportTable(
        title="Error classification and proportions",
        columns=tuple(columns),
        rows=tuple(rows),
    )


def rtf_table(timings: Sequence[TimingRecord]) -> ReportTable:
    """Real-time factor and relative speed; the fastest model is 100%.

    Speeds come from unrounded RTFs; rounding first would distort the
    ratios visibly.
    """
    if not timings:
        raise EmptyInput("no timing records")
    for t in timings:
        if t.total_audio_s <= 0:
            raise ZeroAudio(f"model {t.model_id!r} has no audio seconds")
    fastest = min(t.rtf for t in timings)
    rows = tuple(
        (t.model_id, format_cell(t.rtf, digits=4), Fraction(str(t.rtf)) / Fraction(str(fastest)) * 100)
        for t in timings)
    return ReportTable(
        title="Model speed",
        columns=("model", "rtf", "speed (%)"),
        rows=rows,
    )


def render(table: ReportTable, fmt: str) -> bytes:
    """Deterministic byte rendering; csv, json, or md."""
    if fmt == "csv":
        return _render_csv(table)
    if fmt == "json":
        return _render_json(table)
    if fmt == "md":
        return _render_md(table)
    raise DataError(f"unknown format {fmt!r} (expected csv, json, or md)")


def _render_csv(table: ReportTable) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_cell(c) for c in row])
    for note in table.footnotes:
        writer.writerow([f"# {note}"])
    return buffer.getvalue().encode("utf-8")


def _render_json(table: ReportTable) -> bytes:
    payload = {
        "title": table.title,
        "columns": list(table.columns),
        "rows": [[format_cell(c) for c in row] for row in table.rows],
        "footnotes": list(table.footnotes),
    }
    return (json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n").encode("utf-8")


def _render_md(table: ReportTable) -> bytes:
    lines = [f"### {table.title}", ""]
    lines.append("| " + " | ".join(table.columns) + " |")
    lines.append("|" + "|".join(" --- " for _ in table.columns) + "|")
    for row in table.rows:
        lines.append("| " + " | ".join(format_cell(c) for c in row) + " |")
    if table.footnotes:
        lines.append("")
        for note in table.footnotes:
            lines.append(f"*{note}*")
    return ("\n".join(lines) + "\n").encode("utf-8")
