"""Domain types for renarrations.

A renarration is an annotation whose body supplies an alternative version of
the target fragment for a different audience: a simplification, an
elaboration, a translation, or a substitution of medium (say, an audio
narration of a written paragraph).

All values here are immutable after construction. Structural problems
(missing keys, wrong JSON types) are reported when a document is parsed;
value-level rule violations are reported by :func:`validate`, which is a
total function returning a list of human-readable violations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Mapping, Optional, Union

KNOWN_MOTIVATIONS = frozenset(
    {"describing", "editing", "replying", "tagging", "bookmarking", "renarrating"}
)

TRANSFORMATION_KINDS = ("simplification", "elaboration", "translation", "media-substitution")

MEDIUMS = ("text", "audio", "video", "image")

MEDIA_FRAGMENTS_IRI = "http://www.w3.org/TR/media-frags/"

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*$")

# Well-formedness only: primary subtag plus hyphen-separated alphanumeric
# subtags. Registry validity is out of scope.
_BCP47_RE = re.compile(r"^[A-Za-z]{1,8}(-[A-Za-z0-9]{1,8})*$")

_RFC3339_RE = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})[Tt](\d{2}):(\d{2}):(\d{2})(\.\d+)?([Zz]|[+-]\d{2}:\d{2})$"
)


def is_absolute_iri(value: str) -> bool:
    """True when `value` has a syntactically plausible scheme and body."""
    if not isinstance(value, str) or ":" not in value:
        return False
    scheme, _, rest = value.partition(":")
    return bool(_SCHEME_RE.match(scheme)) and rest != ""


def normalize_iri(value: str) -> str:
    """Normalize for comparison: lowercase scheme and host, nothing else.

    Trailing slashes are deliberately preserved; two IRIs differing only in
    a trailing slash name different resources here.
    """
    m = re.match(r"^([A-Za-z][A-Za-z0-9+.-]*)://([^/?#]*)(.*)$", value)
    if m:
        return m.group(1).lower() + "://" + m.group(2).lower() + m.group(3)
    scheme, sep, rest = value.partition(":")
    if sep:
        return scheme.lower() + ":" + rest
    return value


def iri_equal(a: str, b: str) -> bool:
    return normalize_iri(a) == normalize_iri(b)


def is_bcp47(tag: str) -> bool:
    return isinstance(tag, str) and bool(_BCP47_RE.match(tag))


def primary_subtag(tag: str) -> str:
    return tag.split("-", 1)[0].lower()


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC-3339 timestamp to an aware UTC datetime.

    Raises ValueError for anything else, including naive timestamps.
    """
    if not isinstance(value, str) or not _RFC3339_RE.match(value):
        raise ValueError(f"not an RFC-3339 timestamp: {value!r}")
    text = value
    if text[-1] in "zZ":
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    """Canonical RFC-3339 UTC form, 'Z' suffix, fractional part only if set."""
    dt = dt.astimezone(timezone.utc)
    if dt.microsecond:
        return dt.strftime("%Y-%m-%dT%H:%M:%S.%f") + "Z"
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True)
class Agent:
    """Who contributed. At least one of id, name must be present."""

    id: Optional[str] = None
    name: Optional[str] = None


@dataclass(frozen=True)
class Motivation:
    """Declared intent of the annotation.

    Unknown values are kept verbatim and flagged via :attr:`is_known`;
    they are never dropped or rewritten on parse.
    """

    value: str

    @property
    def is_known(self) -> bool:
        return self.value in KNOWN_MOTIVATIONS


@dataclass(frozen=True)
class TextQuoteSelector:
    exact: str
    prefix: str = ""
    suffix: str = ""


@dataclass(frozen=True)
class TextPositionSelector:
    start: int
    end: int


@dataclass(frozen=True)
class CssSelector:
    value: str


@dataclass(frozen=True)
class MediaFragmentSelector:
    value: str
    conforms_to: str = MEDIA_FRAGMENTS_IRI


Selector = Union[TextQuoteSelector, TextPositionSelector, CssSelector, MediaFragmentSelector]


@dataclass(frozen=True)
class Target:
    """The resource being renarrated; no selector means the whole resource."""

    source: str
    selector: Optional[Selector] = None


@dataclass(frozen=True)
class TextualBody:
    value: str
    language: Optional[str] = None
    format: Optional[str] = None


@dataclass(frozen=True)
class ExternalBody:
    id: str
    format: Optional[str] = None
    language: Optional[str] = None


Body = Union[TextualBody, ExternalBody]


@dataclass(frozen=True)
class AudienceSpec:
    """Audience a contribution is aimed at. Languages are ordered, most
    specific intent first."""

    languages: tuple[str, ...] = ()
    medium: Optional[str] = None
    literacy_level: Optional[int] = None


@dataclass(frozen=True)
class Renarration:
    """One annotation record.

    `id` is assigned by the store and is absent on drafts. `extras` holds
    unknown top-level document fields verbatim so foreign annotations
    survive a parse/serialize cycle.
    """

    target: Target
    bodies: tuple[Body, ...]
    motivation: Optional[Motivation] = None
    creator: Optional[Agent] = None
    created: Optional[datetime] = None
    modified: Optional[datetime] = None
    transformation: Optional[str] = None
    audience: Optional[AudienceSpec] = None
    id: Optional[str] = None
    extras: Mapping[str, Any] = field(default_factory=dict)


def _validate_selector(sel: Selector, out: list[str]) -> None:
    # Local import; the grammar lives with the anchoring code.
    from .mediafrag import MalformedFragment, parse_media_fragment

    if isinstance(sel, TextQuoteSelector):
        if not sel.exact:
            out.append("selector: TextQuote.exact must be non-empty")
    elif isinstance(sel, TextPositionSelector):
        if sel.start < 0:
            out.append("selector: TextPosition.start must be >= 0")
        if not sel.start < sel.end:
            out.append("selector: TextPosition.start < end")
    elif isinstance(sel, CssSelector):
        if not sel.value.strip():
            out.append("selector: Css.value must be non-empty")
    elif isinstance(sel, MediaFragmentSelector):
        try:
            parse_media_fragment(sel.value)
        except MalformedFragment as exc:
            out.append(f"selector: media fragment {sel.value!r} invalid ({exc})")


def validate(r: Renarration) -> list[str]:
    """Check every type invariant; return one message per violation.

    Total function: never raises, an empty list means the record is valid.
    """
    out: list[str] = []

    if r.creator is None:
        out.append("creator: required")
    elif r.creator.id is None and r.creator.name is None:
        out.append("creator: at least one of id, name required")
    elif r.creator.id is not None and not is_absolute_iri(r.creator.id):
        out.append(f"creator.id: not an absolute IRI: {r.creator.id!r}")

    if r.created is None:
        out.append("created: required")
    elif r.modified is not None and r.created > r.modified:
        out.append("created: must be <= modified")

    if r.motivation is None:
        out.append("motivation: required")

    if r.motivation is not None and r.motivation.value == "renarrating":
        if r.transformation is None:
            out.append("transformation: required when motivation is renarrating")
    elif r.transformation is not None:
        out.append("transformation: only allowed when motivation is renarrating")
    if r.transformation is not None and r.transformation not in TRANSFORMATION_KINDS:
        out.append(f"transformation: unknown kind {r.transformation!r}")

    if r.audience is not None:
        for tag in r.audience.languages:
            if not is_bcp47(tag):
                out.append(f"audience.languages: malformed BCP-47 tag {tag!r}")
        if r.audience.medium is not None and r.audience.medium not in MEDIUMS:
            out.append(f"audience.medium: unknown medium {r.audience.medium!r}")
        if r.audience.literacy_level is not None and not 1 <= r.audience.literacy_level <= 5:
            out.append("audience.literacyLevel: must be within 1..5")

    if not r.bodies:
        out.append("body: at least one body required")
    for i, body in enumerate(r.bodies):
        if isinstance(body, TextualBody):
            if not body.value:
                out.append(f"body[{i}]: Textual.value must be non-empty")
            if body.language is not None and not is_bcp47(body.language):
                out.append(f"body[{i}].language: malformed BCP-47 tag {body.language!r}")
        else:
            if not is_absolute_iri(body.id):
                out.append(f"body[{i}].id: not an absolute IRI: {body.id!r}")
            if body.language is not None and not is_bcp47(body.language):
                out.append(f"body[{i}].language: malformed BCP-47 tag {body.language!r}")

    if not is_absolute_iri(r.target.source):
        out.append(f"target.source: not an absolute IRI: {r.target.source!r}")
    if r.target.selector is not None:
        _validate_selector(r.target.selector, out)

    if r.id is not None and not is_absolute_iri(r.id):
        out.append(f"id: not an absolute IRI: {r.id!r}")

    return out
