"""Command-line workflows: ingest sources, submit annotations, serve the
store, and compose renditions.

Exit codes are a stable scripting contract: 0 success, 1 validation
failure, 2 I/O failure, 3 not found, 4 version conflict. Every option can
also come from a RENARRATE_-prefixed environment variable or from a
key=value config file passed with --config.
"""

from __future__ import annotations

import json
import signal
import sys
from pathlib import Path
from urllib.error import URLError
from urllib.request import urlopen

import click

from .composer import FALLBACKS, AudienceProfile, EmptyProfile, compose, provenance_report
from .jsonld import MalformedDocument, parse_annotation
from .model import is_absolute_iri, validate
from .service import create_server
from .snapshots import SnapshotStore, UnsupportedMediaType
from .store import (
    AnnotationStore,
    DEFAULT_CONTAINER,
    DEFAULT_PAGE_SIZE,
    InvalidAnnotation,
    StoreCorrupt,
)

EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_NOT_FOUND = 3
EXIT_CONFLICT = 4

SUFFIX_TYPES = {
    ".html": "text/html",
    ".htm": "text/html",
    ".xhtml": "application/xhtml+xml",
    ".txt": "text/plain",
    ".md": "text/plain",
    ".jpg": "image/jpeg",
    ".jpeg": "image/jpeg",
    ".png": "image/png",
    ".gif": "image/gif",
    ".mp3": "audio/mpeg",
    ".ogg": "audio/ogg",
    ".mp4": "video/mp4",
    ".webm": "video/webm",
}


class Config:
    def __init__(self, store_path: Path, base_iri: str, port: int, page_size: int):
        if not 1 <= port <= 65535:
            raise click.BadParameter(f"port {port} outside 1..65535")
        self.store_path = store_path
        self.base_iri = base_iri or f"http://localhost:{port}/"
        self.port = port
        self.page_size = page_size


def _load_config_file(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


@click.group()
@click.option("--store", "store_path", envvar="RENARRATE_STORE", default=None,
              type=click.Path(path_type=Path), help="Store directory (default ./renarrate-data).")
@click.option("--base-iri", envvar="RENARRATE_BASE_IRI", default=None,
              help="Base IRI used when minting annotation ids.")
@click.option("--port", envvar="RENARRATE_PORT", default=None, type=int,
              help="Port for the serve command (default 8747).")
@click.option("--page-size", envvar="RENARRATE_PAGE_SIZE", default=None, type=int,
              help="Container page size (default 20).")
@click.option("--config", "config_file", envvar="RENARRATE_CONFIG", default=None,
              type=click.Path(exists=True, path_type=Path),
              help="key=value config file (same keys as the options).")
@click.pass_context
def main(ctx, store_path, base_iri, port, page_size, config_file):
    """Store renarrations of web documents and compose audience-specific
    renditions from them."""
    file_values = _load_config_file(config_file) if config_file else {}
    if store_path is None and "store" in file_values:
        store_path = Path(file_values["store"])
    if base_iri is None:
        base_iri = file_values.get("base-iri")
    if port is None and "port" in file_values:
        port = int(file_values["port"])
    if page_size is None and "page-size" in file_values:
        page_size = int(file_values["page-size"])
    ctx.obj = Config(
        store_path=store_path or Path("./renarrate-data"),
        base_iri=base_iri,
        port=port if port is not None else 8747,
        page_size=page_size if page_size is not None else DEFAULT_PAGE_SIZE,
    )


def _open_store(config: Config) -> AnnotationStore:
    try:
        return AnnotationStore(
            config.store_path / "annotations", config.base_iri, config.page_size
        )
    except StoreCorrupt as exc:
        click.echo(f"store corrupt: {exc}", err=True)
        sys.exit(EXIT_IO)


def _open_snapshots(config: Config) -> SnapshotStore:
    return SnapshotStore(config.store_path / "snapshots")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--web-root", default=None, type=click.Path(path_type=Path),
              help="Directory with the browser client's static files.")
@click.pass_obj
def serve(config: Config, host: str, web_root: Path | None):
    """Run the annotation store and composition service."""
    store = _open_store(config)
    snapshots = _open_snapshots(config)
    if web_root is not None and not web_root.is_dir():
        click.echo(f"web root {web_root} is not a directory", err=True)
        sys.exit(EXIT_IO)
    try:
        server = create_server(host, config.port, store, snapshots, web_root)
    except OSError as exc:
        click.echo(f"cannot bind port {config.port}: {exc}", err=True)
        sys.exit(EXIT_IO)

    def shut_down(signum, frame):
        raise KeyboardInterrupt

    signal.signal(signal.SIGTERM, shut_down)
    click.echo(f"serving on http://{host}:{server.server_address[1]}/  (store: {config.store_path})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        store.close()


@main.command()
@click.argument("source")
@click.option("--source-iri", default=None,
              help="Record the snapshot under this IRI instead of the file path.")
@click.option("--media-type", default=None, help="Override media type detection.")
@click.pass_obj
def ingest(config: Config, source: str, source_iri: str | None, media_type: str | None):
    """Snapshot a URL or local file into the store."""
    snapshots = _open_snapshots(config)
    if is_absolute_iri(source) and source.split(":", 1)[0] in ("http", "https"):
        try:
            with urlopen(source) as response:  # noqa: S310 (plain GET, no execution)
                content = response.read()
                media_type = media_type or response.headers.get_content_type()
        except (URLError, OSError) as exc:
            click.echo(f"fetch failed: {exc}", err=True)
            sys.exit(EXIT_IO)
        iri = source_iri or source
    else:
        path = Path(source)
        if not path.is_file():
            click.echo(f"fetch failed: no such file {source}", err=True)
            sys.exit(EXIT_IO)
        content = path.read_bytes()
        media_type = media_type or SUFFIX_TYPES.get(path.suffix.lower())
        if media_type is None:
            click.echo(f"unsupported media type for {source}", err=True)
            sys.exit(EXIT_VALIDATION)
        iri = source_iri or path.resolve().as_uri()
    try:
        snapshot_id = snapshots.ingest(iri, media_type, content)
    except UnsupportedMediaType as exc:
        click.echo(f"unsupported media type: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    snapshot = snapshots.get(snapshot_id)
    click.echo(f"{snapshot_id} {snapshot.source} retrieved {snapshot.retrieved_at.isoformat()}")


@main.command()
@click.argument("file", type=click.Path(path_type=Path))
@click.pass_obj
def annotate(config: Config, file: Path):
    """Validate an annotation document and store it."""
    if not file.is_file():
        click.echo(f"no such file: {file}", err=True)
        sys.exit(EXIT_IO)
    doc = file.read_text(encoding="utf-8")
    # surface field-level problems before touching the store
    try:
        record = parse_annotation(doc)
    except MalformedDocument as exc:
        click.echo(f"invalid annotation: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    violations = [v for v in validate(record) if not v.startswith("created:")]
    if violations:
        for violation in violations:
            click.echo(f"invalid annotation: {violation}", err=True)
        sys.exit(EXIT_VALIDATION)
    store = _open_store(config)
    try:
        annotation_id, version = store.create(DEFAULT_CONTAINER, doc)
    except InvalidAnnotation as exc:
        click.echo(f"invalid annotation: {exc.detail}", err=True)
        sys.exit(EXIT_VALIDATION)
    finally:
        store.close()
    click.echo(annotation_id)


@main.command("compose")
@click.argument("target")
@click.option("--lang", "languages", multiple=True, required=True,
              help="Accepted language, most preferred first; repeat or comma-separate.")
@click.option("--medium", default=None, type=click.Choice(["text", "audio", "video", "image"]))
@click.option("--level", default=None, type=click.IntRange(1, 5))
@click.option("--fallback", "fallback_name", default="identity", show_default=True,
              type=click.Choice(sorted(FALLBACKS)))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.pass_obj
def compose_cmd(config: Config, target, languages, medium, level, fallback_name, out_path: Path):
    """Write the composed rendition of TARGET plus its provenance report."""
    snapshots = _open_snapshots(config)
    snapshot = snapshots.latest(target)
    if snapshot is None:
        click.echo(f"no snapshot of {target}; run ingest first", err=True)
        sys.exit(EXIT_NOT_FOUND)
    langs = tuple(t for chunk in languages for t in chunk.split(",") if t)
    store = _open_store(config)
    try:
        candidates = store.search(target)
        profile = AudienceProfile(languages=langs, medium=medium, literacy_level=level)
        try:
            rendition = compose(snapshot, candidates, profile, FALLBACKS[fallback_name]())
        except EmptyProfile as exc:
            click.echo(f"empty profile: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
    finally:
        store.close()
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_bytes(rendition.output)
    report = provenance_report(rendition)
    report_path = out_path.with_name(out_path.name + ".provenance.json")
    report_path.write_text(
        json.dumps(report, ensure_ascii=False, indent=2), encoding="utf-8"
    )
    click.echo(f"wrote {out_path} ({len(rendition.substitutions)} substitutions)")
    click.echo(f"wrote {report_path}")


if __name__ == "__main__":
    main()
