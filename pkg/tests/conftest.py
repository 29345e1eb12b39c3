from __future__ import annotations

import sys
from datetime import datetime, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles

from renarrate.model import (
    Agent,
    AudienceSpec,
    Motivation,
    Renarration,
    Target,
    TextQuoteSelector,
    TextualBody,
)
from renarrate.snapshots import DocumentSnapshot

FIXTURES = Path(__file__).parent.parent / "fixtures"

BCP_SOURCE = "http://mitan.in/bcp/raika"


@pytest.fixture
def wrestler_doc() -> str:
    return (FIXTURES / "wrestler_annotation.jsonld").read_text(encoding="utf-8")


@pytest.fixture
def bcp_snapshot() -> DocumentSnapshot:
    return DocumentSnapshot(
        source=BCP_SOURCE,
        media_type="text/html",
        content=(FIXTURES / "bcp_protocol.html").read_bytes(),
        retrieved_at=datetime(2024, 3, 1, tzinfo=timezone.utc),
    )


@pytest.fixture
def bcp_renarration_docs() -> list[str]:
    paths = sorted((FIXTURES / "bcp_renarrations").glob("*.jsonld"))
    return [p.read_text(encoding="utf-8") for p in paths]


def make_renarration(
    source: str = "http://example.test/page",
    exact: str | None = "some text",
    body_language: str | None = "kn",
    body_value: str = "ಪಠ್ಯ",
    audience_languages: tuple[str, ...] = (),
    created: datetime | None = datetime(2024, 1, 1, tzinfo=timezone.utc),
    annotation_id: str | None = None,
    transformation: str = "translation",
    motivation: str = "renarrating",
) -> Renarration:
    selector = TextQuoteSelector(exact=exact) if exact is not None else None
    return Renarration(
        target=Target(source=source, selector=selector),
        bodies=(TextualBody(value=body_value, language=body_language),),
        motivation=Motivation(motivation),
        creator=Agent(name="tester"),
        created=created,
        transformation=transformation if motivation == "renarrating" else None,
        audience=AudienceSpec(languages=audience_languages) if audience_languages else None,
        id=annotation_id,
    )
