"""Immutable retrieved copies of source documents, persisted on disk.

Layout: one directory per source IRI hash; re-ingesting the same source
adds a new numbered snapshot directory inside it (no deduplication), each
holding the raw `content` bytes and a `meta.json` sidecar.

    <root>/<source-hash>/<seq>/content
    <root>/<source-hash>/<seq>/meta.json
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Optional

from .model import format_timestamp, normalize_iri, parse_timestamp, utcnow

TEXTUAL_TYPES = ("text/html", "application/xhtml+xml", "text/plain")


class UnsupportedMediaType(ValueError):
    pass


def is_textual(media_type: str) -> bool:
    base = media_type.split(";", 1)[0].strip().lower()
    return base in TEXTUAL_TYPES or base.startswith("text/")


@dataclass(frozen=True)
class DocumentSnapshot:
    source: str
    media_type: str
    content: bytes
    retrieved_at: datetime

    def __post_init__(self) -> None:
        if is_textual(self.media_type):
            try:
                self.content.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise UnsupportedMediaType(
                    f"textual snapshot of {self.source} is not valid UTF-8"
                ) from exc

    @property
    def text(self) -> str:
        return self.content.decode("utf-8")


def _source_key(source: str) -> str:
    return hashlib.sha256(normalize_iri(source).encode("utf-8")).hexdigest()[:16]


_SNAPSHOT_ID_RE = re.compile(r"^([0-9a-f]{16})-(\d{3,})$")


class SnapshotStore:
    """Disk-backed collection of snapshots, newest-wins lookup by source."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def add(self, snapshot: DocumentSnapshot) -> str:
        """Persist a snapshot and return its id. Never deduplicates."""
        source_dir = self.root / _source_key(snapshot.source)
        source_dir.mkdir(exist_ok=True)
        seq = 1 + max(
            (int(p.name) for p in source_dir.iterdir() if p.is_dir() and p.name.isdigit()),
            default=0,
        )
        snap_dir = source_dir / f"{seq:03d}"
        snap_dir.mkdir()
        (snap_dir / "content").write_bytes(snapshot.content)
        meta = {
            "source": snapshot.source,
            "mediaType": snapshot.media_type,
            "retrievedAt": format_timestamp(snapshot.retrieved_at),
        }
        (snap_dir / "meta.json").write_text(
            json.dumps(meta, ensure_ascii=False, indent=2), encoding="utf-8"
        )
        return f"{source_dir.name}-{seq:03d}"

    def ingest(self, source: str, media_type: str, content: bytes) -> str:
        return self.add(
            DocumentSnapshot(
                source=source, media_type=media_type, content=content, retrieved_at=utcnow()
            )
        )

    def get(self, snapshot_id: str) -> Optional[DocumentSnapshot]:
        m = _SNAPSHOT_ID_RE.match(snapshot_id)
        if not m:
            return None
        snap_dir = self.root / m.group(1) / m.group(2)
        if not (snap_dir / "meta.json").is_file():
            return None
        return self._load(snap_dir)

    def _load(self, snap_dir: Path) -> DocumentSnapshot:
        meta = json.loads((snap_dir / "meta.json").read_text(encoding="utf-8"))
        return DocumentSnapshot(
            source=meta["source"],
            media_type=meta["mediaType"],
            content=(snap_dir / "content").read_bytes(),
            retrieved_at=parse_timestamp(meta["retrievedAt"]),
        )

    def latest(self, source: str) -> Optional[DocumentSnapshot]:
        source_dir = self.root / _source_key(source)
        if not source_dir.is_dir():
            return None
        seqs = sorted(
            (p for p in source_dir.iterdir() if p.is_dir() and p.name.isdigit()),
            key=lambda p: int(p.name),
        )
        if not seqs:
            return None
        return self._load(seqs[-1])

    def list_all(self) -> list[tuple[str, DocumentSnapshot]]:
        """All (id, snapshot) pairs, ordered by id for stable listings."""
        found = []
        for source_dir in sorted(self.root.iterdir()):
            if not source_dir.is_dir():
                continue
            for snap_dir in sorted(source_dir.iterdir()):
                if snap_dir.is_dir() and (snap_dir / "meta.json").is_file():
                    found.append((f"{source_dir.name}-{snap_dir.name}", self._load(snap_dir)))
        return found
