"""Resolve selectors against document snapshots.

Text quotes anchor in two stages. Stage one looks for exact occurrences,
disambiguating several hits with the selector's prefix/suffix context.
Stage two (the tolerant path for drifted documents) slides windows of
roughly the quote's length across the text and picks the window with the
smallest normalized Levenshtein distance.

The fuzzy stage is defined precisely so an exhaustive reference search
reproduces it: window lengths range from floor(0.8*m) to ceil(1.2*m)
where m is the quote length, the distance is Levenshtein over code points
normalized by max(m, window length), and ties fall to the smallest start
offset, then the shortest window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .extraction import BadCssSelector, ExtractedText, extract_text, select
from .mediafrag import MalformedFragment, Region, TimeInterval, parse_media_fragment
from .model import (
    CssSelector,
    MediaFragmentSelector,
    Target,
    TextPositionSelector,
    TextQuoteSelector,
    iri_equal,
)
from .snapshots import DocumentSnapshot, UnsupportedMediaType, is_textual

DEFAULT_MAX_DISTANCE_RATIO = 0.2

METHOD_CSS = "css"
METHOD_QUOTE_EXACT = "quote-exact"
METHOD_POSITION = "position"
METHOD_QUOTE_FUZZY = "quote-fuzzy"
METHOD_WHOLE_RESOURCE = "whole-resource"


class AnchoringError(Exception):
    pass


class Ambiguous(AnchoringError):
    """Several exact matches remain after prefix/suffix disambiguation."""


class NotFound(AnchoringError):
    """No exact match and no window within the distance threshold."""


class SourceMismatch(AnchoringError):
    """The target names a different resource than the snapshot."""


class Orphaned(AnchoringError):
    """The selector cannot be resolved against this snapshot."""

    def __init__(self, message: str, cause: Optional[Exception] = None):
        super().__init__(message)
        self.cause = cause


@dataclass(frozen=True)
class TextSpan:
    start: int
    end: int


Fragment = Union[TextSpan, Region, TimeInterval]


@dataclass(frozen=True)
class AnchorResult:
    """A resolved fragment. `fragment` is None only for a whole-resource
    anchor on a non-textual document, where no meaningful extent exists."""

    fragment: Optional[Fragment]
    method: str
    confidence: float


def _exact_occurrences(text: str, exact: str) -> list[int]:
    found = []
    start = 0
    while True:
        i = text.find(exact, start)
        if i < 0:
            return found
        found.append(i)
        start = i + 1


def _context_matches(text: str, at: int, sel: TextQuoteSelector) -> bool:
    if sel.prefix and not text[:at].endswith(sel.prefix):
        return False
    after = at + len(sel.exact)
    if sel.suffix and not text.startswith(sel.suffix, after):
        return False
    return True


def _fuzzy_window_search(
    text: str, exact: str, max_distance_ratio: float
) -> Optional[tuple[int, int, float]]:
    """Best window by (normalized distance, start, length); None if every
    window exceeds the threshold."""
    m = len(exact)
    n = len(text)
    lmin = max(1, 8 * m // 10)
    lmax_global = -(-12 * m // 10)  # ceil(1.2 * m)
    if lmin > n:
        return None

    # Any window whose distance already exceeds this can never win.
    abandon_at = int(max_distance_ratio * max(m, min(lmax_global, n)))

    best: Optional[tuple[float, int, int, int]] = None  # (nd, start, length, distance)
    for s in range(n - lmin + 1):
        lmax = min(lmax_global, n - s)
        row = _prefix_distances(exact, text, s, lmax, abandon_at)
        if row is None:
            continue
        for length in range(lmin, lmax + 1):
            d = row[length]
            nd = d / (m if m >= length else length)
            if nd <= max_distance_ratio:
                key = (nd, s, length, d)
                if best is None or key < best:
                    best = key
    if best is None:
        return None
    nd, s, length, _ = best
    return s, s + length, nd


def _prefix_distances(
    exact: str, text: str, start: int, lmax: int, abandon_at: int
) -> Optional[list[int]]:
    """Final DP row: row[j] = Levenshtein(exact, text[start:start+j]).

    Returns None as soon as every window at this start must exceed
    `abandon_at` (row minima never decrease as the pattern grows).
    """
    prev = list(range(lmax + 1))
    for i, pc in enumerate(exact, 1):
        cur = [i]
        append = cur.append
        left = i
        row_min = i
        prev_diag = prev[0]
        for j in range(1, lmax + 1):
            v = prev_diag if pc == text[start + j - 1] else prev_diag + 1
            prev_diag = prev[j]
            if prev_diag + 1 < v:
                v = prev_diag + 1
            if left + 1 < v:
                v = left + 1
            append(v)
            left = v
            if v < row_min:
                row_min = v
        if row_min > abandon_at:
            return None
        prev = cur
    return prev


def anchor_text_quote(
    text: str,
    sel: TextQuoteSelector,
    max_distance_ratio: float = DEFAULT_MAX_DISTANCE_RATIO,
) -> AnchorResult:
    """Anchor a quote selector in extracted text.

    Raises Ambiguous when several exact matches survive disambiguation and
    NotFound when neither stage produces a candidate within threshold.
    """
    if not sel.exact:
        raise ValueError("quote selector with empty exact text")
    if not 0 <= max_distance_ratio < 1:
        raise ValueError("max_distance_ratio must be in [0, 1)")

    occurrences = _exact_occurrences(text, sel.exact)
    if occurrences:
        if len(occurrences) > 1:
            occurrences = [i for i in occurrences if _context_matches(text, i, sel)]
        if len(occurrences) == 1:
            at = occurrences[0]
            return AnchorResult(
                fragment=TextSpan(at, at + len(sel.exact)),
                method=METHOD_QUOTE_EXACT,
                confidence=1.0,
            )
        raise Ambiguous(
            f"{len(occurrences) or 'several'} exact matches for {sel.exact!r} "
            "cannot be disambiguated by prefix/suffix"
        )

    found = _fuzzy_window_search(text, sel.exact, max_distance_ratio)
    if found is None:
        raise NotFound(f"no window within distance {max_distance_ratio} of {sel.exact!r}")
    start, end, nd = found
    return AnchorResult(
        fragment=TextSpan(start, end),
        method=METHOD_QUOTE_FUZZY,
        confidence=1.0 - nd,
    )


def anchor(
    target: Target,
    snapshot: DocumentSnapshot,
    extracted: Optional[ExtractedText] = None,
    max_distance_ratio: float = DEFAULT_MAX_DISTANCE_RATIO,
) -> AnchorResult:
    """Resolve a target's selector against a snapshot.

    Pass `extracted` to reuse a prior extraction of the same snapshot.
    Raises SourceMismatch when the IRIs differ and Orphaned when the
    selector cannot be resolved; for CSS selectors matching several
    elements the first in document order wins.
    """
    if not iri_equal(target.source, snapshot.source):
        raise SourceMismatch(f"target {target.source} != snapshot {snapshot.source}")

    sel = target.selector

    if sel is None:
        if is_textual(snapshot.media_type):
            ext = extracted or extract_text(snapshot)
            return AnchorResult(TextSpan(0, len(ext.text)), METHOD_WHOLE_RESOURCE, 1.0)
        return AnchorResult(None, METHOD_WHOLE_RESOURCE, 1.0)

    if isinstance(sel, MediaFragmentSelector):
        try:
            fragment = parse_media_fragment(sel.value)
        except MalformedFragment as exc:
            raise Orphaned(f"media fragment {sel.value!r} does not parse", exc) from exc
        return AnchorResult(fragment, METHOD_POSITION, 1.0)

    try:
        ext = extracted or extract_text(snapshot)
    except UnsupportedMediaType as exc:
        raise Orphaned(f"selector needs text but snapshot is {snapshot.media_type}", exc) from exc

    if isinstance(sel, TextQuoteSelector):
        try:
            return anchor_text_quote(ext.text, sel, max_distance_ratio)
        except (Ambiguous, NotFound) as exc:
            raise Orphaned(str(exc), exc) from exc

    if isinstance(sel, TextPositionSelector):
        if 0 <= sel.start < sel.end <= len(ext.text):
            return AnchorResult(TextSpan(sel.start, sel.end), METHOD_POSITION, 1.0)
        raise Orphaned(
            f"position ({sel.start}, {sel.end}) out of bounds for {len(ext.text)} chars"
        )

    if isinstance(sel, CssSelector):
        if ext.root is None:
            raise Orphaned(f"css selector against non-HTML {snapshot.media_type}")
        try:
            matches = select(ext.root, sel.value)
        except BadCssSelector as exc:
            raise Orphaned(str(exc), exc) from exc
        for el in matches:
            s, e = ext.element_span(el)
            if s < e:
                return AnchorResult(TextSpan(s, e), METHOD_CSS, 1.0)
        raise Orphaned(f"no element with visible text matches {sel.value!r}")

    raise Orphaned(f"unsupported selector {type(sel).__name__}")
