"""Renarration platform: annotation storage, anchoring, and composition."""

from .anchoring import AnchorResult, TextSpan, anchor, anchor_text_quote
from .composer import (
    AudienceProfile,
    IdentityFallback,
    Rendition,
    Substitution,
    TaggingFallback,
    compose,
    provenance_report,
    score_candidate,
    select_best,
)
from .jsonld import parse_annotation, serialize_annotation
from .mediafrag import Region, TimeInterval, parse_media_fragment
from .model import (
    Agent,
    AudienceSpec,
    CssSelector,
    ExternalBody,
    MediaFragmentSelector,
    Motivation,
    Renarration,
    Target,
    TextPositionSelector,
    TextQuoteSelector,
    TextualBody,
    validate,
)
from .snapshots import DocumentSnapshot, SnapshotStore
from .store import AnnotationStore

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "AnchorResult",
    "AnnotationStore",
    "AudienceProfile",
    "AudienceSpec",
    "CssSelector",
    "DocumentSnapshot",
    "ExternalBody",
    "IdentityFallback",
    "MediaFragmentSelector",
    "Motivation",
    "Region",
    "Renarration",
    "Rendition",
    "SnapshotStore",
    "Substitution",
    "TaggingFallback",
    "Target",
    "TextPositionSelector",
    "TextQuoteSelector",
    "TextSpan",
    "TextualBody",
    "TimeInterval",
    "anchor",
    "anchor_text_quote",
    "compose",
    "parse_annotation",
    "parse_media_fragment",
    "provenance_report",
    "score_candidate",
    "select_best",
    "serialize_annotation",
    "validate",
]
