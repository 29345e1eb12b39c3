import json
import random
import threading
from datetime import datetime, timedelta, timezone

import pytest

from renarrate.jsonld import parse_annotation, serialize_annotation
from renarrate.store import (
    AnnotationNotFound,
    AnnotationStore,
    DEFAULT_CONTAINER,
    InvalidAnnotation,
    PageOutOfRange,
    StoreCorrupt,
    UnknownContainer,
    VersionConflict,
)

from conftest import make_renarration
from oracles import search_oracle

BASE = "http://store.test/"


@pytest.fixture
def store(tmp_path):
    s = AnnotationStore(tmp_path, BASE)
    yield s
    s.close()


def make_doc(**kwargs) -> str:
    r = make_renarration(**kwargs)
    return serialize_annotation(r)


def test_create_and_get_round_trip(store, wrestler_doc):
    annotation_id, version = store.create(DEFAULT_CONTAINER, wrestler_doc)
    assert annotation_id.startswith(f"{BASE}annotations/{DEFAULT_CONTAINER}/")
    doc, got_version = store.get(annotation_id)
    assert got_version == version
    assert "xywh=366,186,248,199" in doc
    # read-your-write: stored form is canonical and byte-stable
    assert doc == store.get(annotation_id)[0]


def test_create_twice_mints_distinct_ids(store, wrestler_doc):
    id1, _ = store.create(DEFAULT_CONTAINER, wrestler_doc)
    id2, _ = store.create(DEFAULT_CONTAINER, wrestler_doc)
    assert id1 != id2


def test_create_rejects_missing_target(store):
    doc = json.dumps(
        {"@context": "http://www.w3.org/ns/anno.jsonld", "body": {"value": "x"}}
    )
    with pytest.raises(InvalidAnnotation):
        store.create(DEFAULT_CONTAINER, doc)


def test_create_rejects_unknown_container(store, wrestler_doc):
    with pytest.raises(UnknownContainer):
        store.create("elsewhere", wrestler_doc)


def test_create_fills_created_timestamp(store):
    doc = json.dumps(
        {
            "@context": "http://www.w3.org/ns/anno.jsonld",
            "creator": {"name": "t"},
            "motivation": "describing",
            "target": "http://example.test/page",
            "body": {"value": "x"},
        }
    )
    annotation_id, _ = store.create(DEFAULT_CONTAINER, doc)
    stored_doc, _ = store.get(annotation_id)
    assert parse_annotation(stored_doc).created is not None


def test_get_unknown_id(store):
    with pytest.raises(AnnotationNotFound):
        store.get("http://store.test/annotations/renarrations/nope")


def test_update_changes_version_and_content(store, wrestler_doc):
    annotation_id, v1 = store.create(DEFAULT_CONTAINER, wrestler_doc)
    changed = wrestler_doc.replace("Wrestlers displaying", "Athletes displaying")
    v2 = store.update(annotation_id, v1, changed)
    assert v2 != v1
    doc, version = store.get(annotation_id)
    assert version == v2
    assert "Athletes displaying" in doc
    assert parse_annotation(doc).modified is not None


def test_update_with_stale_version_conflicts(store, wrestler_doc):
    annotation_id, v1 = store.create(DEFAULT_CONTAINER, wrestler_doc)
    v2 = store.update(annotation_id, v1, wrestler_doc)
    before, _ = store.get(annotation_id)
    with pytest.raises(VersionConflict):
        store.update(annotation_id, v1, wrestler_doc.replace("Bhan", "Evil"))
    after, version = store.get(annotation_id)
    assert after == before and version == v2


def test_update_unknown_id(store, wrestler_doc):
    with pytest.raises(AnnotationNotFound):
        store.update("http://store.test/annotations/renarrations/nope", "v", wrestler_doc)


def test_delete_lifecycle(store, wrestler_doc):
    annotation_id, v1 = store.create(DEFAULT_CONTAINER, wrestler_doc)
    store.delete(annotation_id, v1)
    with pytest.raises(AnnotationNotFound):
        store.get(annotation_id)
    with pytest.raises(AnnotationNotFound):
        store.delete(annotation_id, v1)


def test_delete_with_stale_version(store, wrestler_doc):
    annotation_id, v1 = store.create(DEFAULT_CONTAINER, wrestler_doc)
    v2 = store.update(annotation_id, v1, wrestler_doc)
    with pytest.raises(VersionConflict):
        store.delete(annotation_id, v1)
    store.delete(annotation_id, v2)


def test_paging_over_45_items(store):
    created = datetime(2024, 1, 1, tzinfo=timezone.utc)
    ids = []
    for i in range(45):
        doc = make_doc(created=created + timedelta(minutes=i))
        ids.append(store.create(DEFAULT_CONTAINER, doc)[0])
    page0 = store.list_container(DEFAULT_CONTAINER, 0)
    page1 = store.list_container(DEFAULT_CONTAINER, 1)
    page2 = store.list_container(DEFAULT_CONTAINER, 2)
    assert [len(p.items) for p in (page0, page1, page2)] == [20, 20, 5]
    assert (page0.next_page, page1.next_page, page2.next_page) == (1, 2, None)
    assert page0.total_count == page2.total_count == 45
    seen = [s.annotation.id for p in (page0, page1, page2) for s in p.items]
    assert sorted(seen) == sorted(ids)
    assert len(set(seen)) == 45
    with pytest.raises(PageOutOfRange):
        store.list_container(DEFAULT_CONTAINER, 3)


def test_paging_ordered_by_created_then_id(store):
    same_created = datetime(2024, 6, 1, tzinfo=timezone.utc)
    for _ in range(5):
        store.create(DEFAULT_CONTAINER, make_doc(created=same_created))
    page = store.list_container(DEFAULT_CONTAINER, 0)
    ids = [s.annotation.id for s in page.items]
    assert ids == sorted(ids)


def test_empty_container_page_zero(store):
    page = store.list_container(DEFAULT_CONTAINER, 0)
    assert page.items == () and page.total_count == 0 and page.next_page is None
    with pytest.raises(PageOutOfRange):
        store.list_container(DEFAULT_CONTAINER, 1)


def test_search_language_filter(store):
    page = "http://example.test/page"
    store.create(DEFAULT_CONTAINER, make_doc(source=page, body_language="kn"))
    store.create(DEFAULT_CONTAINER, make_doc(source=page, body_language="kn-IN"))
    store.create(DEFAULT_CONTAINER, make_doc(source=page, body_language="hi"))
    got = store.search(page, language="kn")
    assert len(got) == 2
    assert all("kn" in (b.language or "") for r in got for b in r.bodies)
    assert len(store.search(page)) == 3
    assert store.search("http://example.test/unrelated") == []


def test_search_matches_audience_languages(store):
    page = "http://example.test/page"
    store.create(
        DEFAULT_CONTAINER,
        make_doc(source=page, body_language=None, audience_languages=("kn-IN",)),
    )
    assert len(store.search(page, language="kn")) == 1
    assert store.search(page, language="ta") == []


def test_search_normalizes_iris(store):
    store.create(DEFAULT_CONTAINER, make_doc(source="http://Example.test/Page"))
    assert len(store.search("http://example.test/Page")) == 1
    assert store.search("http://example.test/page") == []  # path case matters


def test_search_agrees_with_oracle_on_random_store(store):
    rng = random.Random(20240301)
    sources = [f"http://example.test/page{i}" for i in range(4)]
    langs = ["kn", "kn-IN", "en", "hi", "ta", None]
    motivations = ["renarrating", "describing", "tagging"]
    transformations = ["translation", "simplification", "elaboration", "media-substitution"]
    created0 = datetime(2024, 1, 1, tzinfo=timezone.utc)
    for i in range(120):
        motivation = rng.choice(motivations)
        doc = make_doc(
            source=rng.choice(sources),
            body_language=rng.choice(langs),
            audience_languages=tuple(rng.sample(["kn", "en", "rj"], rng.randint(0, 2))),
            created=created0 + timedelta(minutes=rng.randint(0, 500)),
            motivation=motivation,
            transformation=rng.choice(transformations),
        )
        store.create(DEFAULT_CONTAINER, doc)

    everything = [
        s.annotation
        for page_index in range(0, 6)
        for s in store.list_container(DEFAULT_CONTAINER, page_index).items
    ]
    assert len(everything) == 120

    for source in sources:
        for language in [None, "kn", "en", "ta"]:
            for motivation in [None, "renarrating", "describing"]:
                for transformation in [None, "translation"]:
                    got = store.search(source, language, motivation, transformation)
                    want = search_oracle(everything, source, language, motivation, transformation)
                    assert [r.id for r in got] == [r.id for r in want]


def test_durability_across_reopen(tmp_path, wrestler_doc):
    store = AnnotationStore(tmp_path, BASE)
    annotation_id, version = store.create(DEFAULT_CONTAINER, wrestler_doc)
    doc_before, _ = store.get(annotation_id)
    store.close()

    reopened = AnnotationStore(tmp_path, BASE)
    doc_after, version_after = reopened.get(annotation_id)
    assert doc_after == doc_before
    assert version_after == version
    reopened.close()


def test_replay_applies_updates_and_deletes(tmp_path, wrestler_doc):
    store = AnnotationStore(tmp_path, BASE)
    keep_id, keep_v = store.create(DEFAULT_CONTAINER, wrestler_doc)
    gone_id, gone_v = store.create(DEFAULT_CONTAINER, wrestler_doc)
    keep_v2 = store.update(keep_id, keep_v, wrestler_doc.replace("Bhan", "Chalu"))
    store.delete(gone_id, gone_v)
    store.close()

    reopened = AnnotationStore(tmp_path, BASE)
    doc, version = reopened.get(keep_id)
    assert version == keep_v2 and "Chalu" in doc
    with pytest.raises(AnnotationNotFound):
        reopened.get(gone_id)
    reopened.close()


def test_corrupt_log_detected(tmp_path, wrestler_doc):
    store = AnnotationStore(tmp_path, BASE)
    store.create(DEFAULT_CONTAINER, wrestler_doc)
    store.close()
    log = tmp_path / "annotations.log"
    text = log.read_text(encoding="utf-8").replace("Wrestlers", "Tampered!!")
    log.write_text(text, encoding="utf-8")
    with pytest.raises(StoreCorrupt):
        AnnotationStore(tmp_path, BASE)


def test_concurrent_updates_same_version_exactly_one_wins(store, wrestler_doc):
    annotation_id, version = store.create(DEFAULT_CONTAINER, wrestler_doc)
    outcomes = []
    barrier = threading.Barrier(8)

    def contend(n):
        barrier.wait()
        try:
            store.update(annotation_id, version, wrestler_doc.replace("Bhan", f"w{n}"))
            outcomes.append("won")
        except VersionConflict:
            outcomes.append("lost")

    threads = [threading.Thread(target=contend, args=(n,)) for n in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert outcomes.count("won") == 1
    assert outcomes.count("lost") == 7
