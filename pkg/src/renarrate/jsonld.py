"""Parse and serialize annotation documents.

The wire format is JSON-LD in the Web Annotation vocabulary, with two local
extension terms (`transformation`, `audience`) declared by an inline context
emitted alongside the standard one. Only this fixed document shape is
understood; general JSON-LD expansion is out of scope.

Serialization is canonical: fixed key order, two-space indentation, UTF-8
text. Parsing the serialized form of a valid record yields an equal record,
and serializing equal records yields byte-identical text.
"""

from __future__ import annotations

import json
from typing import Any, Optional

from .mediafrag import MalformedFragment, parse_media_fragment
from .model import (
    Agent,
    AudienceSpec,
    Body,
    CssSelector,
    ExternalBody,
    MEDIA_FRAGMENTS_IRI,
    MediaFragmentSelector,
    Motivation,
    Renarration,
    Selector,
    Target,
    TextPositionSelector,
    TextQuoteSelector,
    TextualBody,
    format_timestamp,
    parse_timestamp,
    validate,
)

ANNOTATION_CONTEXT = "http://www.w3.org/ns/anno.jsonld"

# Local vocabulary extension: terms the annotation context does not define.
EXTENSION_CONTEXT = {
    "renarration": "urn:x-renarration:",
    "transformation": "renarration:transformation",
    "audience": "renarration:audience",
    "languages": "renarration:languages",
    "medium": "renarration:medium",
    "literacyLevel": "renarration:literacyLevel",
}

ANNOTATION_MEDIA_TYPE = 'application/ld+json;profile="http://www.w3.org/ns/anno.jsonld"'

_KNOWN_KEYS = frozenset(
    {
        "@context",
        "id",
        "type",
        "creator",
        "created",
        "modified",
        "motivation",
        "transformation",
        "audience",
        "body",
        "target",
    }
)


class MalformedDocument(ValueError):
    """Input is not a JSON object of the expected shape."""


class MissingContext(MalformedDocument):
    """The document does not declare the annotation vocabulary."""


class MissingTarget(MalformedDocument):
    """The document has no usable target."""


class InvalidSelector(MalformedDocument):
    """A selector is structurally broken or fails its grammar."""


class InvariantViolation(ValueError):
    """A record failed validation; `violations` lists every broken rule."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


def _require_str(value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise MalformedDocument(f"{where} must be a string, got {type(value).__name__}")
    return value


def _opt_str(obj: dict, key: str, where: str) -> Optional[str]:
    if key not in obj or obj[key] is None:
        return None
    return _require_str(obj[key], f"{where}.{key}")


def _context_has_vocabulary(ctx: Any) -> bool:
    if ctx == ANNOTATION_CONTEXT:
        return True
    if isinstance(ctx, list):
        return any(item == ANNOTATION_CONTEXT for item in ctx)
    return False


def _parse_agent(raw: Any) -> Agent:
    if isinstance(raw, str):
        return Agent(id=raw)
    if isinstance(raw, dict):
        return Agent(id=_opt_str(raw, "id", "creator"), name=_opt_str(raw, "name", "creator"))
    raise MalformedDocument("creator must be a string or object")


def _parse_selector(raw: Any) -> Selector:
    if not isinstance(raw, dict):
        raise InvalidSelector("selector must be an object")
    kind = raw.get("type")
    if kind == "TextQuoteSelector":
        if "exact" not in raw:
            raise InvalidSelector("TextQuoteSelector requires exact")
        return TextQuoteSelector(
            exact=_require_str(raw["exact"], "selector.exact"),
            prefix=_require_str(raw.get("prefix", ""), "selector.prefix"),
            suffix=_require_str(raw.get("suffix", ""), "selector.suffix"),
        )
    if kind == "TextPositionSelector":
        start, end = raw.get("start"), raw.get("end")
        for name, value in (("start", start), ("end", end)):
            if not isinstance(value, int) or isinstance(value, bool):
                raise InvalidSelector(f"TextPositionSelector.{name} must be an integer")
        return TextPositionSelector(start=start, end=end)
    if kind == "CssSelector":
        if "value" not in raw:
            raise InvalidSelector("CssSelector requires value")
        return CssSelector(value=_require_str(raw["value"], "selector.value"))
    if kind == "FragmentSelector":
        if "value" not in raw:
            raise InvalidSelector("FragmentSelector requires value")
        value = _require_str(raw["value"], "selector.value")
        conforms = raw.get("conformsTo", MEDIA_FRAGMENTS_IRI)
        try:
            parse_media_fragment(value)
        except MalformedFragment as exc:
            raise InvalidSelector(str(exc)) from exc
        return MediaFragmentSelector(value=value, conforms_to=_require_str(conforms, "conformsTo"))
    raise InvalidSelector(f"unsupported selector type {kind!r}")


def _parse_target(raw: Any) -> Target:
    if isinstance(raw, str):
        return Target(source=raw)
    if isinstance(raw, dict):
        source = raw.get("source") or raw.get("id")
        if not isinstance(source, str):
            raise MissingTarget("target has no source IRI")
        selector = None
        if raw.get("selector") is not None:
            selector = _parse_selector(raw["selector"])
        return Target(source=source, selector=selector)
    raise MissingTarget("target must be a string or object")


def _parse_body(raw: Any, index: int) -> Body:
    if isinstance(raw, str):
        return ExternalBody(id=raw)
    if not isinstance(raw, dict):
        raise MalformedDocument(f"body[{index}] must be a string or object")
    where = f"body[{index}]"
    if "value" in raw:
        return TextualBody(
            value=_require_str(raw["value"], f"{where}.value"),
            language=_opt_str(raw, "language", where),
            format=_opt_str(raw, "format", where),
        )
    if "id" in raw:
        return ExternalBody(
            id=_require_str(raw["id"], f"{where}.id"),
            format=_opt_str(raw, "format", where),
            language=_opt_str(raw, "language", where),
        )
    raise MalformedDocument(f"{where} needs either a value or an id")


def _parse_audience(raw: Any) -> AudienceSpec:
    if not isinstance(raw, dict):
        raise MalformedDocument("audience must be an object")
    languages = raw.get("languages", [])
    if not isinstance(languages, list):
        raise MalformedDocument("audience.languages must be a list")
    level = raw.get("literacyLevel")
    if level is not None and (not isinstance(level, int) or isinstance(level, bool)):
        raise MalformedDocument("audience.literacyLevel must be an integer")
    return AudienceSpec(
        languages=tuple(_require_str(t, "audience.languages[]") for t in languages),
        medium=_opt_str(raw, "medium", "audience"),
        literacy_level=level,
    )


def parse_annotation(doc: str) -> Renarration:
    """Parse a JSON-LD annotation document into a Renarration.

    Raises MalformedDocument (unparseable input or wrong field types),
    MissingContext, MissingTarget, or InvalidSelector. Value-level rules
    are *not* checked here; run :func:`renarrate.model.validate` for that.
    """
    try:
        raw = json.loads(doc)
    except (json.JSONDecodeError, TypeError) as exc:
        raise MalformedDocument(f"not parseable JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedDocument("document must be a JSON object")

    if "@context" not in raw or not _context_has_vocabulary(raw["@context"]):
        raise MissingContext("@context must equal or include the annotation context IRI")

    if "target" not in raw or raw["target"] is None:
        raise MissingTarget("document has no target")
    target = _parse_target(raw["target"])

    body_raw = raw.get("body")
    if body_raw is None:
        bodies: tuple[Body, ...] = ()
    elif isinstance(body_raw, list):
        bodies = tuple(_parse_body(item, i) for i, item in enumerate(body_raw))
    else:
        bodies = (_parse_body(body_raw, 0),)

    created = raw.get("created")
    modified = raw.get("modified")
    try:
        created_dt = parse_timestamp(created) if created is not None else None
        modified_dt = parse_timestamp(modified) if modified is not None else None
    except ValueError as exc:
        raise MalformedDocument(str(exc)) from exc

    motivation = None
    if raw.get("motivation") is not None:
        motivation = Motivation(_require_str(raw["motivation"], "motivation"))

    audience = _parse_audience(raw["audience"]) if raw.get("audience") is not None else None

    extras = {k: v for k, v in raw.items() if k not in _KNOWN_KEYS}

    return Renarration(
        target=target,
        bodies=bodies,
        motivation=motivation,
        creator=_parse_agent(raw["creator"]) if raw.get("creator") is not None else None,
        created=created_dt,
        modified=modified_dt,
        transformation=_opt_str(raw, "transformation", "document"),
        audience=audience,
        id=_opt_str(raw, "id", "document"),
        extras=extras,
    )


def _agent_obj(agent: Agent) -> dict:
    obj: dict[str, Any] = {}
    if agent.id is not None:
        obj["id"] = agent.id
    if agent.name is not None:
        obj["name"] = agent.name
    return obj


def _body_obj(body: Body) -> dict:
    obj: dict[str, Any] = {}
    if isinstance(body, TextualBody):
        obj["type"] = "TextualBody"
        obj["value"] = body.value
        if body.language is not None:
            obj["language"] = body.language
        if body.format is not None:
            obj["format"] = body.format
    else:
        obj["id"] = body.id
        if body.format is not None:
            obj["format"] = body.format
        if body.language is not None:
            obj["language"] = body.language
    return obj


def _selector_obj(sel: Selector) -> dict:
    if isinstance(sel, TextQuoteSelector):
        obj: dict[str, Any] = {"type": "TextQuoteSelector", "exact": sel.exact}
        if sel.prefix:
            obj["prefix"] = sel.prefix
        if sel.suffix:
            obj["suffix"] = sel.suffix
        return obj
    if isinstance(sel, TextPositionSelector):
        return {"type": "TextPositionSelector", "start": sel.start, "end": sel.end}
    if isinstance(sel, CssSelector):
        return {"type": "CssSelector", "value": sel.value}
    return {"type": "FragmentSelector", "conformsTo": sel.conforms_to, "value": sel.value}


def _audience_obj(audience: AudienceSpec) -> dict:
    obj: dict[str, Any] = {"languages": list(audience.languages)}
    if audience.medium is not None:
        obj["medium"] = audience.medium
    if audience.literacy_level is not None:
        obj["literacyLevel"] = audience.literacy_level
    return obj


def _canonical_value(value: Any) -> Any:
    """Recursively sort mapping keys so equal values serialize identically."""
    if isinstance(value, dict):
        return {k: _canonical_value(value[k]) for k in sorted(value)}
    if isinstance(value, (list, tuple)):
        return [_canonical_value(v) for v in value]
    return value


def annotation_to_obj(r: Renarration) -> dict:
    """Build the document object in canonical key order."""
    obj: dict[str, Any] = {}
    if r.transformation is not None or r.audience is not None:
        obj["@context"] = [ANNOTATION_CONTEXT, dict(EXTENSION_CONTEXT)]
    else:
        obj["@context"] = ANNOTATION_CONTEXT
    if r.id is not None:
        obj["id"] = r.id
    obj["type"] = "Annotation"
    if r.creator is not None:
        obj["creator"] = _agent_obj(r.creator)
    if r.created is not None:
        obj["created"] = format_timestamp(r.created)
    if r.modified is not None:
        obj["modified"] = format_timestamp(r.modified)
    if r.motivation is not None:
        obj["motivation"] = r.motivation.value
    if r.transformation is not None:
        obj["transformation"] = r.transformation
    if r.audience is not None:
        obj["audience"] = _audience_obj(r.audience)
    if len(r.bodies) == 1:
        obj["body"] = _body_obj(r.bodies[0])
    else:
        obj["body"] = [_body_obj(b) for b in r.bodies]
    target_obj: dict[str, Any] = {"source": r.target.source}
    if r.target.selector is not None:
        target_obj["selector"] = _selector_obj(r.target.selector)
    obj["target"] = target_obj
    for key in sorted(r.extras):
        obj[key] = _canonical_value(r.extras[key])
    return obj


def serialize_annotation(r: Renarration) -> str:
    """Serialize to canonical JSON-LD text.

    Raises InvariantViolation (listing every broken rule) when the record
    does not validate; otherwise output is deterministic and re-parses to
    an equal record.
    """
    violations = validate(r)
    if violations:
        raise InvariantViolation(violations)
    return json.dumps(annotation_to_obj(r), ensure_ascii=False, indent=2)
