"""HTTP front of the annotation store and the composer.

Endpoints:

    POST   /annotations/                      create (Location + ETag)
    GET    /annotations/?page=N               container page
    GET    /annotations/{container}/{key}     canonical document (ETag)
    PUT    /annotations/{container}/{key}     replace, requires If-Match
    DELETE /annotations/{container}/{key}     delete, requires If-Match
    GET    /search?target=IRI&lang=&motivation=&transformation=
    GET    /compose?target=IRI&lang=kn,en&medium=&level=&fallback=
    GET    /compose/provenance?...            report for the same query
    GET    /snapshots                         snapshot metadata listing
    GET    /snapshots/{id}                    one snapshot's metadata
    GET    /snapshots/{id}/content            raw snapshot bytes

Error bodies are JSON objects {"error": code, "detail": text}. CORS is
wide open so the browser client can be served from anywhere; the server
can also serve the client's static files under /app/.
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, quote, urlsplit

from .composer import (
    FALLBACKS,
    AudienceProfile,
    EmptyProfile,
    compose,
    provenance_report,
)
from .jsonld import ANNOTATION_CONTEXT, ANNOTATION_MEDIA_TYPE
from .snapshots import SnapshotStore, UnsupportedMediaType, is_textual
from .store import (
    AnnotationNotFound,
    AnnotationStore,
    DEFAULT_CONTAINER,
    InvalidAnnotation,
    PageOutOfRange,
    UnknownContainer,
    VersionConflict,
)
from .model import format_timestamp

STATIC_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
    ".map": "application/json",
}


class RenarrationServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(
        self,
        address: tuple[str, int],
        store: AnnotationStore,
        snapshots: SnapshotStore,
        web_root: Optional[Path] = None,
    ):
        super().__init__(address, RequestHandler)
        self.store = store
        self.snapshots = snapshots
        self.web_root = web_root


def _with_charset(media_type: str) -> str:
    """Textual snapshots are UTF-8 by invariant; say so on the wire."""
    if is_textual(media_type) and "charset" not in media_type:
        return media_type + "; charset=utf-8"
    return media_type


class RequestHandler(BaseHTTPRequestHandler):
    server: RenarrationServer
    protocol_version = "HTTP/1.1"

    # quiet by default; the CLI enables logging when verbose
    def log_message(self, format, *args):  # noqa: A002 (stdlib signature)
        pass

    # -- plumbing

    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type, If-Match")
        self.send_header(
            "Access-Control-Expose-Headers", "ETag, Location, X-Renarration-Provenance"
        )

    def _reply(
        self,
        status: int,
        body: bytes = b"",
        content_type: str = "application/json",
        headers: Optional[dict[str, str]] = None,
    ) -> None:
        self.send_response(status)
        self._cors()
        for name, value in (headers or {}).items():
            self.send_header(name, value)
        if body or status not in (204, 304):
            self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        if body:
            self.wfile.write(body)

    def _reply_json(self, status: int, obj, headers: Optional[dict[str, str]] = None) -> None:
        body = json.dumps(obj, ensure_ascii=False, indent=2).encode("utf-8")
        self._reply(status, body, "application/json", headers)

    def _error(self, status: int, code: str, detail: str) -> None:
        self._reply_json(status, {"error": code, "detail": detail})

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _if_match(self) -> Optional[str]:
        raw = self.headers.get("If-Match")
        if raw is None:
            return None
        return raw.strip().strip('"')

    # -- dispatch

    def do_OPTIONS(self) -> None:
        self._reply(204)

    def do_GET(self) -> None:
        self._route("GET")

    def do_POST(self) -> None:
        self._route("POST")

    def do_PUT(self) -> None:
        self._route("PUT")

    def do_DELETE(self) -> None:
        self._route("DELETE")

    def _route(self, method: str) -> None:
        url = urlsplit(self.path)
        path = url.path
        query = {k: v[0] for k, v in parse_qs(url.query).items()}
        try:
            if path == "/annotations/" or path == "/annotations":
                if method == "POST":
                    return self._create_annotation()
                if method == "GET":
                    return self._container_page(query)
                return self._error(405, "method-not-allowed", f"{method} {path}")
            if path.startswith("/annotations/"):
                return self._annotation_resource(method, path)
            if path == "/search" and method == "GET":
                return self._search(query)
            if path == "/compose" and method == "GET":
                return self._compose(query, report_only=False)
            if path == "/compose/provenance" and method == "GET":
                return self._compose(query, report_only=True)
            if path == "/snapshots" and method == "GET":
                return self._snapshot_list()
            if path.startswith("/snapshots/") and method == "GET":
                return self._snapshot_resource(path)
            if path == "/" and method == "GET":
                return self._index()
            if path.startswith("/app") and method == "GET":
                return self._static(path)
            return self._error(404, "not-found", f"no route for {method} {path}")
        except InvalidAnnotation as exc:
            return self._error(400, "invalid-annotation", exc.detail)
        except UnknownContainer as exc:
            return self._error(404, "unknown-container", str(exc))
        except AnnotationNotFound as exc:
            return self._error(404, "not-found", str(exc))
        except VersionConflict as exc:
            return self._error(412, "version-conflict", str(exc))
        except PageOutOfRange as exc:
            return self._error(404, "page-out-of-range", str(exc))
        except EmptyProfile as exc:
            return self._error(400, "empty-profile", str(exc))
        except UnsupportedMediaType as exc:
            return self._error(415, "unsupported-media-type", str(exc))
        except BrokenPipeError:
            raise
        except Exception as exc:  # pragma: no cover - last-resort guard
            return self._error(500, "internal-error", f"{type(exc).__name__}: {exc}")

    # -- annotations

    def _create_annotation(self) -> None:
        doc = self._body().decode("utf-8", errors="replace")
        annotation_id, version = self.server.store.create(DEFAULT_CONTAINER, doc)
        stored_doc, _ = self.server.store.get(annotation_id)
        self._reply(
            201,
            stored_doc.encode("utf-8"),
            ANNOTATION_MEDIA_TYPE,
            {"Location": annotation_id, "ETag": f'"{version}"'},
        )

    def _annotation_id_from_path(self, path: str) -> str:
        relative = path[len("/annotations/") :]
        return f"{self.server.store.base_iri}annotations/{relative}"

    def _annotation_resource(self, method: str, path: str) -> None:
        annotation_id = self._annotation_id_from_path(path)
        if method == "GET":
            doc, version = self.server.store.get(annotation_id)
            return self._reply(
                200, doc.encode("utf-8"), ANNOTATION_MEDIA_TYPE, {"ETag": f'"{version}"'}
            )
        if method == "PUT":
            expected = self._if_match()
            if expected is None:
                return self._error(400, "missing-if-match", "PUT requires an If-Match header")
            doc = self._body().decode("utf-8", errors="replace")
            version = self.server.store.update(annotation_id, expected, doc)
            stored_doc, _ = self.server.store.get(annotation_id)
            return self._reply(
                200, stored_doc.encode("utf-8"), ANNOTATION_MEDIA_TYPE,
                {"ETag": f'"{version}"'},
            )
        if method == "DELETE":
            expected = self._if_match()
            if expected is None:
                return self._error(400, "missing-if-match", "DELETE requires an If-Match header")
            self.server.store.delete(annotation_id, expected)
            return self._reply(204)
        return self._error(405, "method-not-allowed", f"{method} {path}")

    def _container_page(self, query: dict[str, str]) -> None:
        try:
            page_index = int(query.get("page", "0"))
        except ValueError:
            return self._error(400, "bad-request", "page must be an integer")
        page = self.server.store.list_container(DEFAULT_CONTAINER, page_index)
        obj = {
            "@context": ANNOTATION_CONTEXT,
            "id": f"{self.server.store.base_iri}annotations/?page={page.page_index}",
            "type": "AnnotationPage",
            "pageIndex": page.page_index,
            "totalCount": page.total_count,
        }
        if page.next_page is not None:
            obj["nextPage"] = page.next_page
        obj["items"] = [json.loads(item.doc) for item in page.items]
        self._reply_json(200, obj)

    def _search(self, query: dict[str, str]) -> None:
        target = query.get("target")
        if not target:
            return self._error(400, "bad-request", "search requires a target parameter")
        found = self.server.store.search(
            target,
            language=query.get("lang"),
            motivation=query.get("motivation"),
            transformation=query.get("transformation"),
        )
        items = []
        for r in found:
            doc, version = self.server.store.get(r.id)
            items.append(json.loads(doc))
        self._reply_json(200, {"items": items, "total": len(items)})

    # -- composition

    def _compose(self, query: dict[str, str], report_only: bool) -> None:
        target = query.get("target")
        if not target:
            return self._error(400, "bad-request", "compose requires a target parameter")
        languages = tuple(t for t in (query.get("lang") or "").split(",") if t)
        level = None
        if query.get("level"):
            try:
                level = int(query["level"])
            except ValueError:
                return self._error(400, "bad-request", "level must be an integer")
        fallback_name = query.get("fallback", "identity")
        if fallback_name not in FALLBACKS:
            return self._error(400, "bad-request", f"unknown fallback {fallback_name!r}")

        snapshot = self.server.snapshots.latest(target)
        if snapshot is None:
            return self._error(404, "no-snapshot", f"no snapshot of {target}")
        candidates = self.server.store.search(target)
        profile = AudienceProfile(
            languages=languages, medium=query.get("medium") or None, literacy_level=level
        )
        rendition = compose(snapshot, candidates, profile, FALLBACKS[fallback_name]())

        if report_only:
            return self._reply_json(200, provenance_report(rendition))

        params = [("target", target), ("lang", ",".join(languages))]
        for key in ("medium", "level", "fallback"):
            if query.get(key):
                params.append((key, query[key]))
        provenance_url = "/compose/provenance?" + "&".join(
            f"{k}={quote(v, safe='')}" for k, v in params
        )
        self._reply(
            200,
            rendition.output,
            _with_charset(snapshot.media_type),
            {"X-Renarration-Provenance": provenance_url},
        )

    # -- snapshots

    def _snapshot_meta(self, snapshot_id: str, snapshot) -> dict:
        return {
            "id": snapshot_id,
            "source": snapshot.source,
            "mediaType": snapshot.media_type,
            "retrievedAt": format_timestamp(snapshot.retrieved_at),
        }

    def _snapshot_list(self) -> None:
        items = [
            self._snapshot_meta(snapshot_id, snapshot)
            for snapshot_id, snapshot in self.server.snapshots.list_all()
        ]
        self._reply_json(200, {"items": items, "total": len(items)})

    def _snapshot_resource(self, path: str) -> None:
        rest = path[len("/snapshots/") :]
        if rest.endswith("/content"):
            snapshot_id = rest[: -len("/content")]
            snapshot = self.server.snapshots.get(snapshot_id)
            if snapshot is None:
                return self._error(404, "not-found", f"no snapshot {snapshot_id}")
            return self._reply(200, snapshot.content, _with_charset(snapshot.media_type))
        snapshot = self.server.snapshots.get(rest)
        if snapshot is None:
            return self._error(404, "not-found", f"no snapshot {rest}")
        self._reply_json(200, self._snapshot_meta(rest, snapshot))

    # -- static client

    def _index(self) -> None:
        if self.server.web_root is not None:
            return self._reply(302, b"", "text/plain", {"Location": "/app/"})
        self._reply_json(
            200,
            {
                "service": "renarrate",
                "annotations": "/annotations/",
                "search": "/search?target=",
                "compose": "/compose?target=&lang=",
                "snapshots": "/snapshots",
            },
        )

    def _static(self, path: str) -> None:
        root = self.server.web_root
        if root is None:
            return self._error(404, "not-found", "no web client configured")
        relative = path[len("/app") :].lstrip("/") or "index.html"
        target = (root / relative).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            return self._error(404, "not-found", path)
        content_type = STATIC_TYPES.get(target.suffix, "application/octet-stream")
        self._reply(200, target.read_bytes(), content_type)


def create_server(
    host: str,
    port: int,
    store: AnnotationStore,
    snapshots: SnapshotStore,
    web_root: Optional[Path] = None,
) -> RenarrationServer:
    return RenarrationServer((host, port), store, snapshots, web_root)
