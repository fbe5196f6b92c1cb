"""Parsing, validation and filtering of raw transfer exports.

Two input formats are accepted, both UTF-8:

* ``ndjson`` - one JSON object per line with the fields of
  :class:`TransactionRecord`; ``value`` is a decimal string (a JSON integer is
  tolerated), unknown keys are ignored, blank lines are skipped.
* ``csv`` - RFC-4180 with a mandatory header containing
  ``tx_id,timestamp,from_addr,to_addr,value,project_id,token_id``; an empty
  ``token_id`` cell means "no token id".

Malformed lines never abort a parse unless ``strict=True``; they are collected
in the :class:`ParseReport` attached to the returned batch.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from operator import attrgetter
from typing import IO, Iterable

from .errors import DataError, MalformedLine, UnknownFormat

FORMATS = ("ndjson", "csv")
CSV_COLUMNS = ("tx_id", "timestamp", "from_addr", "to_addr", "value", "project_id", "token_id")
_REQUIRED = CSV_COLUMNS[:-1]
_DIGITS = re.compile(r"[0-9]+\Z")

_sort_key = attrgetter("timestamp", "tx_id")


@dataclass(frozen=True, slots=True)
class TransactionRecord:
    """One on-chain transfer. ``value`` is an exact integer in base units."""

    tx_id: str
    timestamp: int
    from_addr: str
    to_addr: str
    value: int
    project_id: str
    token_id: str | None = None

    @property
    def day_index(self) -> int:
        return self.timestamp // 86400


@dataclass(frozen=True)
class ParseReport:
    format: str
    source_digest: str
    n_lines: int = 0
    n_records: int = 0
    malformed: tuple[tuple[int, str], ...] = ()
    dropped_zero_value: int = 0

    @property
    def malformed_lines(self) -> list[int]:
        return [n for n, _ in self.malformed]

    def to_dict(self) -> dict:
        return {
            "format": self.format,
            "source_digest": self.source_digest,
            "n_lines": self.n_lines,
            "n_records": self.n_records,
            "n_malformed": len(self.malformed),
            "malformed": [{"line": n, "reason": r} for n, r in self.malformed],
            "dropped_zero_value": self.dropped_zero_value,
        }


@dataclass(frozen=True)
class RecordBatch:
    """Immutable, canonically ordered collection of records."""

    records: tuple[TransactionRecord, ...]
    source_digest: str
    report: ParseReport | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def project_ids(self) -> list[str]:
        return sorted({r.project_id for r in self.records})

    @classmethod
    def from_records(cls, records: Iterable[TransactionRecord], source_digest: str = "") -> "RecordBatch":
        return cls(tuple(sorted(records, key=_sort_key)), source_digest)


@dataclass(frozen=True)
class ValidationReport:
    n_records: int
    duplicate_tx_ids: tuple[str, ...]
    zero_value_count: int
    self_transfer_count: int

    @property
    def clean(self) -> bool:
        return not self.duplicate_tx_ids and self.self_transfer_count == 0

    def to_dict(self) -> dict:
        return {
            "n_records": self.n_records,
            "duplicate_tx_ids": list(self.duplicate_tx_ids),
            "zero_value_count": self.zero_value_count,
            "self_transfer_count": self.self_transfer_count,
        }


def digest_bytes(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _text(obj: dict, key: str) -> str:
    v = obj.get(key)
    if not isinstance(v, str) or not v:
        raise ValueError(f"{key} must be a non-empty string")
    return v


def _record_from_json(obj) -> TransactionRecord:
    if not isinstance(obj, dict):
        raise ValueError("line is not a JSON object")
    ts = obj.get("timestamp")
    if not isinstance(ts, int) or isinstance(ts, bool):
        raise ValueError("timestamp must be an integer")
    if ts < 0:
        raise ValueError("timestamp must be >= 0")
    raw = obj.get("value")
    if isinstance(raw, str):
        if not _DIGITS.match(raw):
            raise ValueError("value must be a non-negative decimal string")
        value = int(raw)
    elif isinstance(raw, int) and not isinstance(raw, bool) and raw >= 0:
        value = raw
    else:
        raise ValueError("value must be a non-negative decimal string")
    token = obj.get("token_id")
    if token is not None and not isinstance(token, str):
        raise ValueError("token_id must be a string or null")
    return TransactionRecord(
        _text(obj, "tx_id"), ts, _text(obj, "from_addr"), _text(obj, "to_addr"),
        value, _text(obj, "project_id"), token,
    )


def _record_from_row(row: dict) -> TransactionRecord:
    if None in row:
        raise ValueError("too many fields")
    ts_raw, value_raw = row.get("timestamp"), row.get("value")
    if ts_raw is None or not _DIGITS.match(ts_raw):
        raise ValueError("timestamp must be a non-negative integer")
    if value_raw is None or not _DIGITS.match(value_raw):
        raise ValueError("value must be a non-negative decimal string")
    return TransactionRecord(
        _text(row, "tx_id"), int(ts_raw), _text(row, "from_addr"), _text(row, "to_addr"),
        int(value_raw), _text(row, "project_id"), row.get("token_id") or None,
    )


def _iter_ndjson(data: bytes):
    # BytesIO splits on b"\n" only (U+2028 etc. are legal inside JSON strings)
    # and streams, so no second full-size copy of the input is held
    for line_no, line in enumerate(io.BytesIO(data), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except ValueError as exc:
            yield line_no, None, f"invalid JSON: {exc.args[0] if exc.args else exc}"
            continue
        try:
            yield line_no, _record_from_json(obj), None
        except ValueError as exc:
            yield line_no, None, str(exc)


def _iter_csv(text: str):
    fetched = [0]  # physical lines handed to the reader; the last one fetched is the current line

    def lines():
        for line in io.StringIO(text, newline=""):
            fetched[0] += 1
            yield line

    reader = csv.DictReader(lines())
    try:
        fieldnames = reader.fieldnames
    except csv.Error as exc:
        raise MalformedLine(1, f"unreadable header: {exc}") from None
    if fieldnames is None:
        return
    missing = [c for c in _REQUIRED if c not in fieldnames]
    if missing:
        raise MalformedLine(1, f"header missing columns: {','.join(missing)}")
    while True:
        try:
            row = next(reader)
        except StopIteration:
            return
        except csv.Error as exc:  # e.g. NUL bytes; the reader resumes on the next line
            yield fetched[0], None, f"unreadable CSV row: {exc}"
            continue
        try:
            yield reader.line_num, _record_from_row(row), None
        except ValueError as exc:
            yield reader.line_num, None, str(exc)


def parse_records(
    stream: IO[bytes] | bytes,
    format: str = "ndjson",
    *,
    strict: bool = False,
    drop_zero_value: bool = False,
) -> RecordBatch:
    """Parse a whole export into a canonically sorted :class:`RecordBatch`.

    The batch's ``report`` lists every malformed line with its 1-based line
    number. With ``strict=True`` the first malformed line raises
    :class:`MalformedLine` instead.
    """
    if format not in FORMATS:
        raise UnknownFormat(f"unknown format {format!r}; expected one of {FORMATS}")
    data = stream if isinstance(stream, (bytes, bytearray)) else stream.read()
    data = bytes(data)
    digest = digest_bytes(data)
    if format == "ndjson":
        rows = _iter_ndjson(data)
    else:
        try:
            rows = _iter_csv(data.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise MalformedLine(0, f"input is not UTF-8: {exc}") from None

    records: list[TransactionRecord] = []
    malformed: list[tuple[int, str]] = []
    dropped = 0
    for line_no, rec, reason in rows:
        if rec is None:
            if strict:
                raise MalformedLine(line_no, reason)
            malformed.append((line_no, reason))
        elif drop_zero_value and rec.value == 0:
            dropped += 1
        else:
            records.append(rec)
    records.sort(key=_sort_key)
    report = ParseReport(
        format=format,
        source_digest=digest,
        n_lines=data.count(b"\n") + (1 if data and not data.endswith(b"\n") else 0),
        n_records=len(records),
        malformed=tuple(malformed),
        dropped_zero_value=dropped,
    )
    return RecordBatch(tuple(records), digest, report)


def merge_batches(batches: Iterable[RecordBatch]) -> RecordBatch:
    batches = list(batches)
    if len(batches) == 1:
        return batches[0]
    combined = hashlib.sha256("\n".join(b.source_digest for b in batches).encode()).hexdigest()
    return RecordBatch.from_records((r for b in batches for r in b.records), "sha256:" + combined)


def filter_project(batch: RecordBatch, project_id: str) -> RecordBatch:
    return RecordBatch(
        tuple(r for r in batch.records if r.project_id == project_id), batch.source_digest
    )


def group_by_project(batch: RecordBatch) -> dict[str, RecordBatch]:
    """Single-pass equivalent of calling :func:`filter_project` per project."""
    groups: dict[str, list[TransactionRecord]] = {}
    for r in batch.records:
        groups.setdefault(r.project_id, []).append(r)
    return {p: RecordBatch(tuple(groups[p]), batch.source_digest) for p in sorted(groups)}


def drop_zero_value(batch: RecordBatch) -> RecordBatch:
    return RecordBatch(tuple(r for r in batch.records if r.value != 0), batch.source_digest)


def validate_batch(batch: RecordBatch) -> ValidationReport:
    counts = Counter(r.tx_id for r in batch.records)
    return ValidationReport(
        n_records=len(batch.records),
        duplicate_tx_ids=tuple(sorted(t for t, c in counts.items() if c > 1)),
        zero_value_count=sum(1 for r in batch.records if r.value == 0),
        self_transfer_count=sum(1 for r in batch.records if r.from_addr == r.to_addr),
    )


def record_to_dict(r: TransactionRecord) -> dict:
    d = {
        "tx_id": r.tx_id,
        "timestamp": r.timestamp,
        "from_addr": r.from_addr,
        "to_addr": r.to_addr,
        "value": str(r.value),
        "project_id": r.project_id,
    }
    if r.token_id is not None:
        d["token_id"] = r.token_id
    return d


def to_ndjson(records: Iterable[TransactionRecord]) -> bytes:
    dumps = json.JSONEncoder(ensure_ascii=False, separators=(",", ":")).encode
    return "".join(dumps(record_to_dict(r)) + "\n" for r in records).encode("utf-8")


def to_csv(records: Iterable[TransactionRecord]) -> bytes:
    """CSV export; raises DataError for NUL characters, which CSV cannot carry here."""
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        if any("\x00" in f for f in (r.tx_id, r.from_addr, r.to_addr, r.project_id, r.token_id or "")):
            raise DataError(f"record {r.tx_id!r} contains a NUL character; export it as NDJSON")
        w.writerow((r.tx_id, r.timestamp, r.from_addr, r.to_addr, r.value, r.project_id, r.token_id or ""))
    return buf.getvalue().encode("utf-8")
