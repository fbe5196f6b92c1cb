"""Deterministic file output with content digests and stage manifests."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
from pathlib import Path

from .errors import MissingArtifact


def sha256_hex(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def iso_date(day_index: int) -> str:
    return (_dt.date(1970, 1, 1) + _dt.timedelta(days=int(day_index))).isoformat()


def json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def csv_bytes(header, rows) -> bytes:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().encode("utf-8")


class Manifest:
    """Collects ``(relative path, digest)`` entries for one output directory."""

    def __init__(self, root: Path, **meta):
        self.root = Path(root)
        self.meta = meta
        self.files: list[dict] = []

    def write(self, rel: str, data: bytes) -> str:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        digest = sha256_hex(data)
        self.files.append({"path": rel, "sha256": digest, "bytes": len(data)})
        return digest

    def write_json(self, rel: str, obj) -> str:
        return self.write(rel, json_bytes(obj))

    def write_csv(self, rel: str, header, rows) -> str:
        return self.write(rel, csv_bytes(header, rows))

    def to_dict(self) -> dict:
        return {**self.meta, "files": sorted(self.files, key=lambda f: f["path"])}

    def close(self, name: str = "manifest.json") -> dict:
        doc = self.to_dict()
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / name).write_bytes(json_bytes(doc))
        return doc


def require(path: Path, stage: str) -> Path:
    if not Path(path).exists():
        raise MissingArtifact(path, stage)
    return Path(path)


def read_json(path: Path, stage: str):
    return json.loads(require(path, stage).read_text(encoding="utf-8"))
