"""Durable repository of renarrations.

Persistence is an append-only log (one JSON record per line) holding the
canonical serialized document of every create/update plus delete markers;
the in-memory indexes (by id and by normalized target source) are rebuilt
by replaying the log at startup. The version tag of an annotation is the
SHA-256 of its canonical serialization, which doubles as the log's
integrity check.

Writes to one annotation id are serialized by compare-version-and-swap
under the store lock; the store object is safe to share across request
handler threads.
"""

from __future__ import annotations

import hashlib
import json
import os
import secrets
import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from .jsonld import MalformedDocument, parse_annotation, serialize_annotation
from .model import Renarration, normalize_iri, primary_subtag, utcnow, validate

DEFAULT_CONTAINER = "renarrations"
DEFAULT_PAGE_SIZE = 20


class StoreError(Exception):
    pass


class InvalidAnnotation(StoreError):
    """Document failed to parse or validate; `detail` says why."""

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class UnknownContainer(StoreError):
    pass


class AnnotationNotFound(StoreError):
    pass


class VersionConflict(StoreError):
    pass


class PageOutOfRange(StoreError):
    pass


class StoreCorrupt(StoreError):
    """The log failed its integrity check and cannot be trusted."""


@dataclass(frozen=True)
class StoredAnnotation:
    annotation: Renarration
    version: str
    container_id: str
    doc: str  # canonical serialized form, returned byte-identically on reads


@dataclass(frozen=True)
class ContainerPage:
    items: tuple[StoredAnnotation, ...]
    page_index: int
    total_count: int
    next_page: Optional[int] = None


def _content_hash(doc: str) -> str:
    return hashlib.sha256(doc.encode("utf-8")).hexdigest()


class AnnotationStore:
    """Log-backed store with one flat container namespace."""

    def __init__(self, path: Path, base_iri: str, page_size: int = DEFAULT_PAGE_SIZE):
        self.base_iri = base_iri if base_iri.endswith("/") else base_iri + "/"
        self.page_size = page_size
        self.containers = {DEFAULT_CONTAINER}
        self._lock = threading.RLock()
        self._by_id: dict[str, StoredAnnotation] = {}
        self._by_source: dict[str, set[str]] = {}
        self._log_path = Path(path) / "annotations.log"
        self._log_path.parent.mkdir(parents=True, exist_ok=True)
        self._replay()
        self._log = open(self._log_path, "a", encoding="utf-8")

    def close(self) -> None:
        with self._lock:
            if not self._log.closed:
                self._log.flush()
                self._log.close()

    # -- log handling

    def _replay(self) -> None:
        if not self._log_path.exists():
            return
        with open(self._log_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise StoreCorrupt(f"log line {lineno} is not valid JSON: {exc}") from exc
                self._apply(record, lineno)

    def _apply(self, record: dict, lineno: int) -> None:
        op = record.get("op")
        if op in ("create", "update"):
            doc = record.get("doc")
            version = record.get("version")
            if not isinstance(doc, str) or _content_hash(doc) != version:
                raise StoreCorrupt(f"log line {lineno}: document hash mismatch")
            try:
                annotation = parse_annotation(doc)
            except MalformedDocument as exc:
                raise StoreCorrupt(f"log line {lineno}: stored document unreadable: {exc}") from exc
            stored = StoredAnnotation(
                annotation=annotation,
                version=version,
                container_id=record.get("container", DEFAULT_CONTAINER),
                doc=doc,
            )
            self._index(stored)
        elif op == "delete":
            self._unindex(record.get("id", ""))
        else:
            raise StoreCorrupt(f"log line {lineno}: unknown op {op!r}")

    def _append(self, record: dict) -> None:
        self._log.write(json.dumps(record, ensure_ascii=False) + "\n")
        self._log.flush()
        os.fsync(self._log.fileno())

    # -- indexing

    def _index(self, stored: StoredAnnotation) -> None:
        annotation_id = stored.annotation.id
        assert annotation_id is not None
        old = self._by_id.get(annotation_id)
        if old is not None:
            self._by_source[normalize_iri(old.annotation.target.source)].discard(annotation_id)
        self._by_id[annotation_id] = stored
        self._by_source.setdefault(normalize_iri(stored.annotation.target.source), set()).add(
            annotation_id
        )

    def _unindex(self, annotation_id: str) -> None:
        stored = self._by_id.pop(annotation_id, None)
        if stored is not None:
            self._by_source[normalize_iri(stored.annotation.target.source)].discard(annotation_id)

    def _sorted_ids(self, ids) -> list[str]:
        def sort_key(annotation_id: str):
            stored = self._by_id[annotation_id]
            return (stored.annotation.created, annotation_id)

        return sorted(ids, key=sort_key)

    # -- operations

    def mint_id(self, container: str) -> str:
        return f"{self.base_iri}annotations/{container}/{secrets.token_hex(16)}"

    def create(self, container: str, doc: str) -> tuple[str, str]:
        """Persist a new annotation; returns (minted id, version tag).

        The server assigns the id and fills in `created` when absent, then
        validates; an invalid document raises InvalidAnnotation.
        """
        if container not in self.containers:
            raise UnknownContainer(container)
        try:
            annotation = parse_annotation(doc)
        except MalformedDocument as exc:
            raise InvalidAnnotation(str(exc)) from exc
        annotation = replace(
            annotation,
            id=self.mint_id(container),
            created=annotation.created or utcnow(),
        )
        violations = validate(annotation)
        if violations:
            raise InvalidAnnotation("; ".join(violations))
        canonical = serialize_annotation(annotation)
        version = _content_hash(canonical)
        stored = StoredAnnotation(annotation, version, container, canonical)
        with self._lock:
            self._append(
                {"op": "create", "container": container, "id": annotation.id,
                 "version": version, "doc": canonical}
            )
            self._index(stored)
        return annotation.id, version

    def get(self, annotation_id: str) -> tuple[str, str]:
        """(canonical document, version) for an id; byte-stable across reads."""
        with self._lock:
            stored = self._by_id.get(annotation_id)
        if stored is None:
            raise AnnotationNotFound(annotation_id)
        return stored.doc, stored.version

    def get_stored(self, annotation_id: str) -> StoredAnnotation:
        with self._lock:
            stored = self._by_id.get(annotation_id)
        if stored is None:
            raise AnnotationNotFound(annotation_id)
        return stored

    def update(self, annotation_id: str, expected_version: str, doc: str) -> str:
        """Replace content iff the version matches; returns the new tag.

        The server stamps `modified`; the original `created` and the
        addressed id win over whatever the incoming document carries.
        """
        try:
            incoming = parse_annotation(doc)
        except MalformedDocument as exc:
            raise InvalidAnnotation(str(exc)) from exc
        with self._lock:
            current = self._by_id.get(annotation_id)
            if current is None:
                raise AnnotationNotFound(annotation_id)
            if current.version != expected_version:
                raise VersionConflict(
                    f"expected {expected_version}, current {current.version}"
                )
            merged = replace(
                incoming,
                id=annotation_id,
                created=incoming.created or current.annotation.created,
                modified=utcnow(),
            )
            violations = validate(merged)
            if violations:
                raise InvalidAnnotation("; ".join(violations))
            canonical = serialize_annotation(merged)
            version = _content_hash(canonical)
            stored = StoredAnnotation(merged, version, current.container_id, canonical)
            self._append(
                {"op": "update", "container": current.container_id, "id": annotation_id,
                 "version": version, "doc": canonical}
            )
            self._index(stored)
        return version

    def delete(self, annotation_id: str, expected_version: str) -> None:
        with self._lock:
            current = self._by_id.get(annotation_id)
            if current is None:
                raise AnnotationNotFound(annotation_id)
            if current.version != expected_version:
                raise VersionConflict(
                    f"expected {expected_version}, current {current.version}"
                )
            self._append({"op": "delete", "id": annotation_id})
            self._unindex(annotation_id)

    def list_container(self, container: str, page_index: int) -> ContainerPage:
        """One fixed-size page, ordered by created timestamp then id."""
        if container not in self.containers:
            raise UnknownContainer(container)
        if page_index < 0:
            raise PageOutOfRange(str(page_index))
        with self._lock:
            ids = self._sorted_ids(
                [i for i, s in self._by_id.items() if s.container_id == container]
            )
            total = len(ids)
            first = page_index * self.page_size
            if first >= total and page_index != 0:
                raise PageOutOfRange(f"page {page_index} of {total} items")
            chunk = ids[first : first + self.page_size]
            items = tuple(self._by_id[i] for i in chunk)
        next_page = page_index + 1 if first + self.page_size < total else None
        return ContainerPage(
            items=items, page_index=page_index, total_count=total, next_page=next_page
        )

    def search(
        self,
        target_source: str,
        language: Optional[str] = None,
        motivation: Optional[str] = None,
        transformation: Optional[str] = None,
    ) -> list[Renarration]:
        """All annotations on a source matching every supplied filter.

        Language matching is by primary subtag against body languages and
        audience languages. Results are ordered by created then id.
        """
        wanted = normalize_iri(target_source)
        with self._lock:
            ids = self._sorted_ids(self._by_source.get(wanted, set()))
            found = []
            for annotation_id in ids:
                stored = self._by_id[annotation_id]
                if _matches(stored.annotation, language, motivation, transformation):
                    found.append(stored.annotation)
        return found


def _matches(
    r: Renarration,
    language: Optional[str],
    motivation: Optional[str],
    transformation: Optional[str],
) -> bool:
    if motivation is not None:
        if r.motivation is None or r.motivation.value != motivation:
            return False
    if transformation is not None and r.transformation != transformation:
        return False
    if language is not None:
        wanted = primary_subtag(language)
        tags = [b.language for b in r.bodies if b.language is not None]
        if r.audience is not None:
            tags.extend(r.audience.languages)
        if not any(primary_subtag(t) == wanted for t in tags):
            return False
    return True


__all__ = [
    "AnnotationStore",
    "AnnotationNotFound",
    "ContainerPage",
    "DEFAULT_CONTAINER",
    "DEFAULT_PAGE_SIZE",
    "InvalidAnnotation",
    "PageOutOfRange",
    "StoreCorrupt",
    "StoredAnnotation",
    "UnknownContainer",
    "VersionConflict",
]
