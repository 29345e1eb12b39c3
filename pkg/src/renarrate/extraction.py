"""Visible-text extraction with byte-accurate offset mapping.

Produces the rendered text of an HTML or plain-text document: markup
stripped, entities decoded, whitespace runs and element boundaries
collapsed to single spaces, no leading or trailing space. Every extracted
character remembers the byte range it came from, so a span of extracted
text can be mapped back onto the raw document for splicing.

Also builds a small element tree during the same scan, enough to evaluate
the supported CSS subset (tag, #id, .class, descendant, :nth-of-type).
"""

from __future__ import annotations

import html as _htmllib
import re
from dataclasses import dataclass, field
from typing import Optional

from .snapshots import DocumentSnapshot, UnsupportedMediaType, is_textual

SKIP_CONTENT_TAGS = frozenset({"script", "style", "head", "title", "noscript", "template"})

BLOCK_TAGS = frozenset(
    {
        "address", "article", "aside", "blockquote", "dd", "div", "dl", "dt",
        "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3",
        "h4", "h5", "h6", "header", "hr", "li", "main", "nav", "ol", "p", "pre",
        "section", "table", "tbody", "td", "tfoot", "th", "thead", "tr", "ul",
    }
)

VOID_TAGS = frozenset(
    {"area", "base", "br", "col", "embed", "hr", "img", "input", "link",
     "meta", "param", "source", "track", "wbr"}
)

_WS = " \t\n\r\f\v"

_ENTITY_RE = re.compile(r"&(?:#[0-9]{1,7}|#[xX][0-9a-fA-F]{1,6}|[a-zA-Z][a-zA-Z0-9]{1,31});")

_ATTR_RE = re.compile(
    r"""([a-zA-Z_:][-a-zA-Z0-9_:.]*)\s*(?:=\s*(?:"([^"]*)"|'([^']*)'|([^\s"'>]+)))?"""
)


@dataclass
class HtmlElement:
    tag: str
    attrs: dict[str, str]
    parent: Optional["HtmlElement"] = None
    children: list["HtmlElement"] = field(default_factory=list)
    text_start: int = 0
    text_end: int = 0

    @property
    def element_id(self) -> Optional[str]:
        return self.attrs.get("id")

    @property
    def classes(self) -> frozenset[str]:
        return frozenset(self.attrs.get("class", "").split())

    def nth_of_type(self) -> int:
        if self.parent is None:
            return 1
        n = 0
        for sibling in self.parent.children:
            if sibling.tag == self.tag:
                n += 1
            if sibling is self:
                return n
        return n


class BadCssSelector(ValueError):
    pass


@dataclass
class ExtractedText:
    """Extracted text plus the machinery to map spans back to bytes."""

    text: str
    char_spans: list[tuple[int, int]]
    paragraphs: list[tuple[int, int]]
    root: Optional[HtmlElement] = None

    def to_bytes(self, start: int, end: int) -> tuple[int, int]:
        """Byte range in the original content covering text[start:end]."""
        if not 0 <= start < end <= len(self.text):
            raise IndexError(f"span ({start}, {end}) out of range for {len(self.text)} chars")
        return self.char_spans[start][0], self.char_spans[end - 1][1]

    def element_span(self, el: HtmlElement) -> tuple[int, int]:
        """The element's visible text span, boundary spaces trimmed."""
        s, e = el.text_start, el.text_end
        while s < e and self.text[s] == " ":
            s += 1
        while e > s and self.text[e - 1] == " ":
            e -= 1
        return s, e


def extract_text(snapshot: DocumentSnapshot) -> ExtractedText:
    """Extract visible text from an HTML or plain-text snapshot.

    Deterministic; raises UnsupportedMediaType for anything else.
    """
    base = snapshot.media_type.split(";", 1)[0].strip().lower()
    if base in ("text/html", "application/xhtml+xml"):
        return _extract_html(snapshot.text)
    if is_textual(snapshot.media_type):
        return _extract_plain(snapshot.text)
    raise UnsupportedMediaType(f"cannot extract text from {snapshot.media_type}")


def _byte_offsets(source: str) -> list[int]:
    offs = [0]
    total = 0
    for ch in source:
        total += len(ch.encode("utf-8"))
        offs.append(total)
    return offs


class _Emitter:
    """Accumulates extracted characters, collapsing gaps to single spaces."""

    def __init__(self, byte_of: list[int]):
        self.byte_of = byte_of
        self.chars: list[str] = []
        self.spans: list[tuple[int, int]] = []
        self.gap_start: Optional[int] = None  # char offset where the current gap began
        self.gap_paragraph = False
        self.para_breaks: set[int] = set()

    def gap(self, at: int, paragraph: bool = False) -> None:
        if self.gap_start is None:
            self.gap_start = at
        if paragraph:
            self.gap_paragraph = True

    def emit(self, ch: str, char_start: int, char_end: int) -> None:
        if self.gap_start is not None:
            if self.chars:
                if self.gap_paragraph:
                    self.para_breaks.add(len(self.chars))
                self.chars.append(" ")
                self.spans.append((self.byte_of[self.gap_start], self.byte_of[char_start]))
            self.gap_start = None
            self.gap_paragraph = False
        self.chars.append(ch)
        self.spans.append((self.byte_of[char_start], self.byte_of[char_end]))

    def emit_decoded(self, decoded: str, char_start: int, char_end: int) -> None:
        for ch in decoded:
            if ch in _WS:
                self.gap(char_start)
            else:
                self.emit(ch, char_start, char_end)

    def paragraphs(self) -> list[tuple[int, int]]:
        breaks = sorted(self.para_breaks)
        spans = []
        start = 0
        for b in breaks + [len(self.chars)]:
            if b > start:
                spans.append((start, b))
            start = b + 1
        return spans

    def finish(self, root: Optional[HtmlElement] = None) -> ExtractedText:
        return ExtractedText(
            text="".join(self.chars),
            char_spans=self.spans,
            paragraphs=self.paragraphs(),
            root=root,
        )


def _extract_plain(source: str) -> ExtractedText:
    out = _Emitter(_byte_offsets(source))
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch in _WS:
            j = i
            newlines = 0
            while j < n and source[j] in _WS:
                if source[j] == "\n":
                    newlines += 1
                j += 1
            out.gap(i, paragraph=newlines >= 2)
            i = j
        else:
            out.emit(ch, i, i + 1)
            i += 1
    return out.finish()


def _parse_attrs(raw: str) -> dict[str, str]:
    attrs: dict[str, str] = {}
    for m in _ATTR_RE.finditer(raw):
        name = m.group(1).lower()
        value = m.group(2) or m.group(3) or m.group(4) or ""
        if name not in attrs:
            attrs[name] = value
    return attrs


def _scan_tag(source: str, pos: int) -> tuple[Optional[str], Optional[str], bool, int]:
    """Scan a tag starting at '<'. Returns (name, attr_text, closing, end_pos).

    name is None when this is not a parseable tag (treat '<' as text).
    Quoted attribute values may contain '>'.
    """
    n = len(source)
    i = pos + 1
    closing = False
    if i < n and source[i] == "/":
        closing = True
        i += 1
    start_name = i
    while i < n and (source[i].isalnum() or source[i] in "-_:"):
        i += 1
    if i == start_name:
        return None, None, False, pos + 1
    name = source[start_name:i].lower()
    attr_start = i
    quote = None
    while i < n:
        ch = source[i]
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == ">":
            return name, source[attr_start:i], closing, i + 1
        i += 1
    return name, source[attr_start:n], closing, n


def _extract_html(source: str) -> ExtractedText:
    out = _Emitter(_byte_offsets(source))
    root = HtmlElement(tag="#root", attrs={})
    stack = [root]
    skip_until: Optional[str] = None

    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "<":
            if source.startswith("<!--", i):
                end = source.find("-->", i + 4)
                i = n if end < 0 else end + 3
                continue
            if source.startswith("<!", i) or source.startswith("<?", i):
                end = source.find(">", i + 2)
                i = n if end < 0 else end + 1
                continue
            name, attr_text, closing, nxt = _scan_tag(source, i)
            if name is None:
                if skip_until is None:
                    out.emit("<", i, i + 1)
                i = nxt
                continue
            if skip_until is not None:
                if closing and name == skip_until:
                    skip_until = None
                i = nxt
                continue
            block = name in BLOCK_TAGS or name == "br"
            if closing:
                if block:
                    out.gap(i, paragraph=name in BLOCK_TAGS)
                for depth in range(len(stack) - 1, 0, -1):
                    if stack[depth].tag == name:
                        while len(stack) > depth:
                            popped = stack.pop()
                            popped.text_end = len(out.chars)
                        break
            else:
                if name in SKIP_CONTENT_TAGS:
                    if name not in VOID_TAGS:
                        skip_until = name
                    i = nxt
                    continue
                if block:
                    out.gap(i, paragraph=name in BLOCK_TAGS)
                if name not in VOID_TAGS:
                    el = HtmlElement(
                        tag=name,
                        attrs=_parse_attrs(attr_text or ""),
                        parent=stack[-1],
                        text_start=len(out.chars),
                    )
                    stack[-1].children.append(el)
                    stack.append(el)
                elif name != "br":
                    el = HtmlElement(
                        tag=name,
                        attrs=_parse_attrs(attr_text or ""),
                        parent=stack[-1],
                        text_start=len(out.chars),
                    )
                    el.text_end = el.text_start
                    stack[-1].children.append(el)
            i = nxt
            continue
        if skip_until is not None:
            i += 1
            continue
        if ch == "&":
            m = _ENTITY_RE.match(source, i)
            if m:
                decoded = _htmllib.unescape(m.group(0))
                if decoded != m.group(0):
                    out.emit_decoded(decoded, i, m.end())
                    i = m.end()
                    continue
            out.emit("&", i, i + 1)
            i += 1
            continue
        if ch in _WS:
            out.gap(i)
            i += 1
            continue
        out.emit(ch, i, i + 1)
        i += 1

    while stack:
        popped = stack.pop()
        popped.text_end = len(out.chars)
    return out.finish(root)


@dataclass(frozen=True)
class _Compound:
    tag: Optional[str]
    element_id: Optional[str]
    classes: tuple[str, ...]
    nth_of_type: Optional[int]


_COMPOUND_TOKEN_RE = re.compile(
    r"#(?P<id>[-\w]+)|\.(?P<cls>[-\w]+)|:nth-of-type\((?P<nth>\d+)\)"
)


def _parse_compound(token: str) -> _Compound:
    m = re.match(r"^(\*|[a-zA-Z][a-zA-Z0-9-]*)?", token)
    tag = m.group(1)
    rest = token[m.end():]
    element_id = None
    classes: list[str] = []
    nth = None
    pos = 0
    while pos < len(rest):
        tm = _COMPOUND_TOKEN_RE.match(rest, pos)
        if not tm:
            raise BadCssSelector(f"cannot parse selector part {token!r}")
        if tm.group("id"):
            element_id = tm.group("id")
        elif tm.group("cls"):
            classes.append(tm.group("cls"))
        else:
            nth = int(tm.group("nth"))
        pos = tm.end()
    if tag is None and element_id is None and not classes and nth is None:
        raise BadCssSelector(f"empty selector part {token!r}")
    return _Compound(
        tag=None if tag in (None, "*") else tag.lower(),
        element_id=element_id,
        classes=tuple(classes),
        nth_of_type=nth,
    )


def _matches_compound(el: HtmlElement, c: _Compound) -> bool:
    if c.tag is not None and el.tag != c.tag:
        return False
    if c.element_id is not None and el.element_id != c.element_id:
        return False
    if c.classes and not set(c.classes) <= el.classes:
        return False
    if c.nth_of_type is not None and el.nth_of_type() != c.nth_of_type:
        return False
    return True


def select(root: HtmlElement, selector: str) -> list[HtmlElement]:
    """Evaluate the supported CSS subset, returning matches in document order.

    Supported: tag names, `#id`, `.class`, `:nth-of-type(n)`, and the
    descendant combinator (whitespace). Anything else raises BadCssSelector.
    """
    tokens = selector.split()
    if not tokens:
        raise BadCssSelector("empty selector")
    compounds = [_parse_compound(t) for t in tokens]

    matches: list[HtmlElement] = []

    def ancestors_match(el: HtmlElement) -> bool:
        idx = len(compounds) - 2
        node = el.parent
        while idx >= 0 and node is not None and node.tag != "#root":
            if _matches_compound(node, compounds[idx]):
                idx -= 1
            node = node.parent
        return idx < 0

    def walk(el: HtmlElement) -> None:
        for child in el.children:
            if _matches_compound(child, compounds[-1]) and ancestors_match(child):
                matches.append(child)
            walk(child)

    walk(root)
    return matches
