"""Compose an audience-specific rendition of a document.

Candidates are scored against the reader's profile with a lexicographic
integer formula (language beats medium beats literacy level), the best
candidate per fragment is substituted into the source bytes, and fragments
nobody covered are offered to a pluggable fallback transformer. Everything
is pure given its inputs: equal snapshot, annotations, and profile yield
byte-identical output.
"""

from __future__ import annotations

import html as _htmllib
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional, Protocol, Union

from .anchoring import AnchorResult, Orphaned, TextSpan, anchor
from .extraction import extract_text
from .model import (
    Body,
    ExternalBody,
    Renarration,
    TextualBody,
    iri_equal,
    primary_subtag,
    utcnow,
)
from .snapshots import DocumentSnapshot

DEFAULT_WEIGHTS = (1000, 100, 10)

FALLBACK_MARKER = "fallback"


class ComposeError(Exception):
    pass


class WrongMotivation(ComposeError):
    """Scoring is defined only for records motivated by renarration."""


class EmptyProfile(ComposeError):
    """Composition needs at least one acceptable language."""


class SourceMismatch(ComposeError):
    pass


@dataclass(frozen=True)
class AudienceProfile:
    """Reader preferences: languages most-preferred first."""

    languages: tuple[str, ...]
    medium: Optional[str] = None
    literacy_level: Optional[int] = None


class FallbackTransformer(Protocol):
    """Hook for fragments without contributions (e.g. machine translation)."""

    name: str

    def transform(self, text: str) -> str: ...


class IdentityFallback:
    """Leaves uncovered fragments untouched."""

    name = "identity"

    def transform(self, text: str) -> str:
        return text


class TaggingFallback:
    """Deterministic stand-in for a real translation service: wraps each
    uncovered fragment in a needs-translation marker."""

    name = "tagging"

    def transform(self, text: str) -> str:
        return f"[needs-translation] {text}"


FALLBACKS = {"identity": IdentityFallback, "tagging": TaggingFallback}


@dataclass(frozen=True)
class Substitution:
    fragment: AnchorResult
    chosen: str  # annotation IRI, or the fallback marker
    score: int
    body_used: Union[Body, str]
    byte_start: int
    byte_end: int


@dataclass(frozen=True)
class Rendition:
    source: str
    profile: AudienceProfile
    output: bytes
    substitutions: tuple[Substitution, ...]
    composed_at: datetime
    orphaned: tuple[tuple[str, str], ...] = ()  # (annotation id, reason)
    dropped_overlap: int = 0


def _body_languages(r: Renarration) -> list[str]:
    tags = [b.language for b in r.bodies if b.language is not None]
    if r.audience is not None:
        tags.extend(r.audience.languages)
    return tags


def language_rank(r: Renarration, profile: AudienceProfile) -> int:
    """(L - i) for the first profile language index i matching any of the
    record's languages at primary-subtag granularity; 0 when none match."""
    tags = {primary_subtag(t) for t in _body_languages(r)}
    for i, wanted in enumerate(profile.languages):
        if primary_subtag(wanted) in tags:
            return len(profile.languages) - i
    return 0


def _primary_body_medium(r: Renarration) -> Optional[str]:
    body = r.bodies[0] if r.bodies else None
    if body is None:
        return None
    if isinstance(body, TextualBody):
        return "text"
    if body.format is not None:
        top = body.format.split("/", 1)[0].strip().lower()
        if top in ("audio", "video", "image", "text"):
            return top
    return None


def score_candidate(
    r: Renarration,
    profile: AudienceProfile,
    weights: tuple[int, int, int] = DEFAULT_WEIGHTS,
) -> int:
    """Lexicographic preference score: language, then medium, then level."""
    if r.motivation is None or r.motivation.value != "renarrating":
        raise WrongMotivation(f"cannot score motivation {r.motivation!r}")
    w_lang, w_medium, w_level = weights

    lang_score = language_rank(r, profile)

    if profile.medium is None or _primary_body_medium(r) == profile.medium:
        medium_score = 1
    else:
        medium_score = 0

    candidate_level = r.audience.literacy_level if r.audience is not None else None
    if (
        candidate_level is None
        or profile.literacy_level is None
        or abs(candidate_level - profile.literacy_level) <= 1
    ):
        level_score = 1
    else:
        level_score = 0

    return w_lang * lang_score + w_medium * medium_score + w_level * level_score


_EPOCH = datetime.min.replace(tzinfo=timezone.utc)


def select_best(
    candidates: list[Renarration],
    profile: AudienceProfile,
    weights: tuple[int, int, int] = DEFAULT_WEIGHTS,
) -> Optional[Renarration]:
    """Argmax of score_candidate; ties go to the latest created timestamp,
    then the lexicographically smallest id. Returns None for an empty list
    or when even the best candidate matches no acceptable language."""
    best: Optional[Renarration] = None
    best_key: Optional[tuple[int, datetime, str]] = None
    for r in candidates:
        score = score_candidate(r, profile, weights)
        created = r.created or _EPOCH
        rid = r.id or ""
        if best_key is None:
            better = True
        elif score != best_key[0]:
            better = score > best_key[0]
        elif created != best_key[1]:
            better = created > best_key[1]
        else:
            better = rid < best_key[2]
        if better:
            best, best_key = r, (score, created, rid)
    if best is None or language_rank(best, profile) == 0:
        return None
    return best


def _pick_body(r: Renarration, profile: AudienceProfile) -> Body:
    for wanted in profile.languages:
        for body in r.bodies:
            if body.language is not None and primary_subtag(body.language) == primary_subtag(
                wanted
            ):
                return body
    return r.bodies[0]


def _escape(value: str) -> str:
    return _htmllib.escape(value, quote=True)


def _render_replacement(sub_chosen: str, body: Union[Body, str], is_html: bool) -> str:
    if isinstance(body, str):  # fallback output
        return _escape(body) if is_html else body
    if isinstance(body, ExternalBody):
        if is_html:
            return (
                f'<a href="{_escape(body.id)}" data-renarration="{_escape(sub_chosen)}">'
                f"{_escape(body.id)}</a>"
            )
        return body.id
    if is_html:
        lang_attr = f' lang="{_escape(body.language)}"' if body.language else ""
        return (
            f'<span{lang_attr} data-renarration="{_escape(sub_chosen)}">'
            f"{_escape(body.value)}</span>"
        )
    return body.value


def _subtract_intervals(
    span: tuple[int, int], covered: list[tuple[int, int]]
) -> list[tuple[int, int]]:
    pieces = []
    cursor = span[0]
    for cs, ce in covered:
        if ce <= span[0] or cs >= span[1]:
            continue
        if cs > cursor:
            pieces.append((cursor, min(cs, span[1])))
        cursor = max(cursor, ce)
    if cursor < span[1]:
        pieces.append((cursor, span[1]))
    return pieces


def compose(
    snapshot: DocumentSnapshot,
    renarrations: list[Renarration],
    profile: AudienceProfile,
    fallback: FallbackTransformer,
) -> Rendition:
    """Build the rendition of a snapshot for one audience profile.

    Anchors every candidate (orphans are recorded and skipped), picks the
    best per identical span, resolves overlaps greedily by descending
    score, splices winning bodies into the source bytes, and runs every
    uncovered paragraph piece through the fallback transformer. Records
    whose motivation is not renarrating are ignored.
    """
    if not profile.languages:
        raise EmptyProfile("profile needs at least one language")
    base_type = snapshot.media_type.split(";", 1)[0].strip().lower()
    is_html = base_type in ("text/html", "application/xhtml+xml")
    ext = extract_text(snapshot)  # raises UnsupportedMediaType for non-text

    orphaned: list[tuple[str, str]] = []
    groups: dict[tuple[int, int], list[tuple[Renarration, AnchorResult]]] = {}
    for r in renarrations:
        if r.motivation is None or r.motivation.value != "renarrating":
            continue
        if not iri_equal(r.target.source, snapshot.source):
            raise SourceMismatch(f"{r.target.source} does not target {snapshot.source}")
        try:
            result = anchor(r.target, snapshot, extracted=ext)
        except Orphaned as exc:
            orphaned.append((r.id or "", str(exc)))
            continue
        frag = result.fragment
        if not isinstance(frag, TextSpan) or frag.start >= frag.end:
            orphaned.append((r.id or "", "selector does not yield a text fragment"))
            continue
        groups.setdefault((frag.start, frag.end), []).append((r, result))

    winners = []  # (score, span, renarration, anchor result)
    for span, members in groups.items():
        best = select_best([r for r, _ in members], profile)
        if best is None:
            continue
        result = next(res for r, res in members if r is best)
        winners.append((score_candidate(best, profile), span, best, result))

    winners.sort(key=lambda w: (-w[0], w[1][0], w[1][1]))
    accepted: list[tuple[int, tuple[int, int], Renarration, AnchorResult]] = []
    dropped = 0
    for score, span, r, result in winners:
        if any(span[0] < e and s < span[1] for _, (s, e), _, _ in accepted):
            dropped += 1
            continue
        accepted.append((score, span, r, result))

    substitutions: list[Substitution] = []
    for score, span, r, result in accepted:
        body = _pick_body(r, profile)
        b0, b1 = ext.to_bytes(span[0], span[1])
        substitutions.append(
            Substitution(
                fragment=result,
                chosen=r.id or "",
                score=score,
                body_used=body,
                byte_start=b0,
                byte_end=b1,
            )
        )

    covered = sorted(span for _, span, _, _ in accepted)
    for para in ext.paragraphs:
        for ps, pe in _subtract_intervals(para, covered):
            while ps < pe and ext.text[ps] == " ":
                ps += 1
            while pe > ps and ext.text[pe - 1] == " ":
                pe -= 1
            if ps >= pe:
                continue
            piece = ext.text[ps:pe]
            transformed = fallback.transform(piece)
            if transformed == piece:
                continue
            b0, b1 = ext.to_bytes(ps, pe)
            substitutions.append(
                Substitution(
                    fragment=AnchorResult(TextSpan(ps, pe), "position", 1.0),
                    chosen=FALLBACK_MARKER,
                    score=0,
                    body_used=transformed,
                    byte_start=b0,
                    byte_end=b1,
                )
            )

    substitutions.sort(key=lambda s: s.byte_start)
    content = snapshot.content
    parts: list[bytes] = []
    cursor = 0
    for sub in substitutions:
        b0 = max(sub.byte_start, cursor)
        parts.append(content[cursor:b0])
        parts.append(_render_replacement(sub.chosen, sub.body_used, is_html).encode("utf-8"))
        cursor = max(cursor, sub.byte_end)
    parts.append(content[cursor:])

    return Rendition(
        source=snapshot.source,
        profile=profile,
        output=b"".join(parts),
        substitutions=tuple(substitutions),
        composed_at=utcnow(),
        orphaned=tuple(orphaned),
        dropped_overlap=dropped,
    )


def provenance_report(rendition: Rendition) -> dict:
    """Structured account of what was substituted where and why.

    Key order is fixed, so dumping the report with json.dumps yields
    byte-identical text for equal renditions.
    """
    entries = []
    for sub in rendition.substitutions:
        frag = sub.fragment.fragment
        location: dict = {}
        if isinstance(frag, TextSpan):
            location = {
                "start": frag.start,
                "end": frag.end,
                "byteStart": sub.byte_start,
                "byteEnd": sub.byte_end,
            }
        entries.append(
            {
                "fragment": location,
                "chosen": sub.chosen,
                "score": sub.score,
                "method": sub.fragment.method,
                "confidence": sub.fragment.confidence,
            }
        )
    profile_obj: dict = {"languages": list(rendition.profile.languages)}
    if rendition.profile.medium is not None:
        profile_obj["medium"] = rendition.profile.medium
    if rendition.profile.literacy_level is not None:
        profile_obj["literacyLevel"] = rendition.profile.literacy_level
    return {
        "source": rendition.source,
        "profile": profile_obj,
        "substitutions": entries,
        "orphaned": [{"annotation": a, "reason": why} for a, why in rendition.orphaned],
        "orphanedCount": len(rendition.orphaned),
        "droppedOverlapCount": rendition.dropped_overlap,
    }
