from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renarrate.extraction import BadCssSelector, extract_text, select
from renarrate.snapshots import DocumentSnapshot, UnsupportedMediaType

NOW = datetime(2024, 1, 1, tzinfo=timezone.utc)


def snap(content: str, media_type: str = "text/html", source: str = "http://x.test/doc"):
    return DocumentSnapshot(source, media_type, content.encode("utf-8"), NOW)


def test_plain_text_identity():
    ext = extract_text(snap("abc", "text/plain"))
    assert ext.text == "abc"
    assert ext.char_spans == [(0, 1), (1, 2), (2, 3)]
    assert ext.to_bytes(0, 3) == (0, 3)


def test_whitespace_collapse_in_html():
    ext = extract_text(snap("<p>the  lion</p>"))
    assert ext.text == "the lion"
    b0, b1 = ext.to_bytes(0, len(ext.text))
    assert b"<p>the  lion</p>"[b0:b1] == b"the  lion"


def test_unsupported_media_type():
    with pytest.raises(UnsupportedMediaType):
        extract_text(DocumentSnapshot("http://x.test/i.jpg", "image/jpeg", b"\xff\xd8", NOW))


def test_block_boundaries_become_single_spaces():
    ext = extract_text(snap("<p>one</p>\n\n<p>two</p><div>three</div>"))
    assert ext.text == "one two three"
    assert ext.paragraphs == [(0, 3), (4, 7), (8, 13)]


def test_inline_tags_do_not_split_words():
    ext = extract_text(snap("<p>the <b>li</b>on roars</p>"))
    assert ext.text == "the lion roars"


def test_script_style_head_are_skipped():
    html = (
        "<html><head><title>skip me</title><style>p{color:red}</style></head>"
        "<body><script>var x = '<p>no</p>';</script><p>kept</p></body></html>"
    )
    ext = extract_text(snap(html))
    assert ext.text == "kept"


def test_entities_are_decoded_and_mapped():
    html = "<p>fish &amp; chips</p>"
    ext = extract_text(snap(html))
    assert ext.text == "fish & chips"
    amp = ext.text.index("&")
    b0, b1 = ext.to_bytes(amp, amp + 1)
    assert html.encode("utf-8")[b0:b1] == b"&amp;"


def test_numeric_entities():
    ext = extract_text(snap("<p>caf&#233; &#x263a;</p>"))
    assert ext.text == "café ☺"


def test_multibyte_offsets_map_to_bytes():
    html = "<p>ಒಂಟೆ ಮತ್ತು ಇಲಿ</p>"
    raw = html.encode("utf-8")
    ext = extract_text(snap(html))
    b0, b1 = ext.to_bytes(0, 4)
    assert raw[b0:b1].decode("utf-8") == "ಒಂಟೆ"


def test_trailing_and_leading_whitespace_trimmed():
    ext = extract_text(snap("  <p>  padded  </p>  "))
    assert ext.text == "padded"


def test_plain_text_paragraphs_split_on_blank_lines():
    ext = extract_text(snap("first para\nsame para\n\nsecond para", "text/plain"))
    assert ext.text == "first para same para second para"
    assert ext.paragraphs == [(0, 20), (21, 32)]


def test_span_to_bytes_round_trip_through_reextraction():
    html = "<p>alpha beta</p><p>gamma &amp; delta</p>"
    ext = extract_text(snap(html))
    start = ext.text.index("beta")
    end = ext.text.index("delta") + len("delta")
    b0, b1 = ext.to_bytes(start, end)
    fragment = html.encode("utf-8")[b0:b1].decode("utf-8")
    again = extract_text(snap(fragment))
    assert again.text == ext.text[start:end]


def test_attribute_values_with_angle_brackets():
    ext = extract_text(snap('<p title="a>b">text</p>'))
    assert ext.text == "text"


def test_comments_and_doctype_skipped():
    ext = extract_text(snap("<!DOCTYPE html><!-- a <p>comment</p> --><p>real</p>"))
    assert ext.text == "real"


def test_unclosed_tags_are_tolerated():
    ext = extract_text(snap("<div><p>one<p>two"))
    assert ext.text == "one two"


# -- css subset ---------------------------------------------------------


@pytest.fixture
def story():
    html = (
        '<html><body><div id="main" class="story wide">'
        "<p>first</p><p>second</p><aside><p>aside note</p></aside><p>third</p>"
        '</div><div class="footer"><p>footer text</p></div></body></html>'
    )
    return extract_text(snap(html))


def test_select_by_tag(story):
    assert len(select(story.root, "p")) == 5


def test_select_by_id_and_descendant(story):
    matches = select(story.root, "#main p")
    assert len(matches) == 4


def test_select_by_class(story):
    assert len(select(story.root, "div.footer p")) == 1
    assert len(select(story.root, ".story.wide")) == 1


def test_select_nth_of_type(story):
    matches = select(story.root, "div#main p:nth-of-type(2)")
    # one directly in #main, one inside the aside
    assert len(matches) == 1
    s, e = story.element_span(matches[0])
    assert story.text[s:e] == "second"


def test_select_document_order(story):
    texts = [story.text[slice(*story.element_span(m))] for m in select(story.root, "p")]
    assert texts == ["first", "second", "aside note", "third", "footer text"]


def test_bad_selector_raises(story):
    for bad in ("", "p >", "p[attr=x]", "::before", "p:first-child"):
        with pytest.raises(BadCssSelector):
            select(story.root, bad)


# -- properties ---------------------------------------------------------

_words = st.lists(
    st.text(alphabet="abcdefghijklmnopqrstuvwxyzಕನಡ", min_size=1, max_size=8),
    min_size=1,
    max_size=30,
)


@given(_words)
@settings(max_examples=100)
def test_extraction_is_deterministic_and_maps_every_char(words):
    html = "<p>" + " ".join(words) + "</p>"
    ext1 = extract_text(snap(html))
    ext2 = extract_text(snap(html))
    assert ext1.text == ext2.text
    assert ext1.char_spans == ext2.char_spans
    assert len(ext1.char_spans) == len(ext1.text)
    raw = html.encode("utf-8")
    for i, ch in enumerate(ext1.text):
        b0, b1 = ext1.char_spans[i]
        assert 0 <= b0 < b1 <= len(raw)
        if ch != " ":
            assert raw[b0:b1].decode("utf-8") == ch


@given(st.text(alphabet="abc \n\t", min_size=0, max_size=80))
@settings(max_examples=100)
def test_plain_extraction_never_has_double_spaces(text):
    ext = extract_text(snap(text, "text/plain"))
    assert "  " not in ext.text
    assert not ext.text.startswith(" ")
    assert not ext.text.endswith(" ")
