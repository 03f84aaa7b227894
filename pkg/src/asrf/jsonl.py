"""JSON Lines helpers: one UTF-8 JSON object per line, atomic writes."""

import json
import os
import tempfile
from typing import Any, Iterable, Iterator

from .errors import ParseError


HEADER_KEY = "asrf_config"


def read_records(path: str, skip_headers: bool = True) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, record) for every non-blank line of a JSONL file.

    Header records ({"asrf_config": ...} provenance lines written by the
    CLI) are skipped unless ``skip_headers`` is False.
    """
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", path, lineno) from exc
            if not isinstance(record, dict):
                raise ParseError("record is not a JSON object", path, lineno)
            if skip_headers and HEADER_KEY in record:
                continue
            yield lineno, record


def dumps(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True)


def write_records(path: str, records: Iterable[dict], header: dict | None = None) -> None:
    """Write records to ``path`` atomically (temp file + rename)."""
    lines = [] if header is None else [dumps({HEADER_KEY: header}) + "\n"]
    lines.extend(dumps(r) + "\n" for r in records)
    atomic_write_text(path, "".join(lines))


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def append_record(path: str, record: dict) -> None:
    """Append one record as a single line (one ``write`` call, flushed)."""
    line = dumps(record) + "\n"
    with open(path, "a", encoding="utf-8", newline="") as fh:
        fh.write(line)
        fh.flush()
        os.fsync(fh.fileno())


def load_json(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", path) from exc


def write_json(path: str, payload: Any) -> None:
    atomic_write_text(path, json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n")
