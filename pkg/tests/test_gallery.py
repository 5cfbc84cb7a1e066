import threading

import pytest

from paletteforge.errors import InputError
from paletteforge.gallery import GalleryEntry, GalleryStore, new_entry_id, utc_now_iso


def entry(i=0, text="dusk"):
    return GalleryEntry(
        id=f"id{i:04d}",
        timestamp=f"2026-08-17T12:{i:02d}:00+00:00",
        text=text,
        palette=[[50.0, 0.0, 0.0]] * 5,
        image_path=None,
        checkpoint_hash="abc",
    )


def test_empty_store_lists_nothing(tmp_path):
    store = GalleryStore(tmp_path / "gallery.jsonl")
    assert store.entries() == []


def test_append_and_newest_first(tmp_path):
    store = GalleryStore(tmp_path / "gallery.jsonl")
    for i in range(3):
        store.append(entry(i))
    listed = store.entries()
    assert [e.id for e in listed] == ["id0002", "id0001", "id0000"]


def test_get_by_id(tmp_path):
    store = GalleryStore(tmp_path / "gallery.jsonl")
    store.append(entry(5, text="ember"))
    found = store.get("id0005")
    assert found.text == "ember"
    with pytest.raises(KeyError):
        store.get("missing")


def test_entries_persist_across_instances(tmp_path):
    path = tmp_path / "gallery.jsonl"
    GalleryStore(path).append(entry(1))
    reopened = GalleryStore(path)
    assert [e.id for e in reopened.entries()] == ["id0001"]


def test_malformed_palette_rejected(tmp_path):
    store = GalleryStore(tmp_path / "gallery.jsonl")
    bad = GalleryEntry(
        id="x", timestamp=utc_now_iso(), text=None,
        palette=[[50.0, 0.0, 0.0]] * 4, image_path=None, checkpoint_hash=None,
    )
    with pytest.raises(ValueError):
        store.append(bad)
    assert store.entries() == []


def test_save_image(tmp_path):
    store = GalleryStore(tmp_path / "gallery.jsonl")
    name = store.save_image("abc123", b"\x89PNG fake")
    assert name == "abc123.png"
    assert (store.image_dir / name).read_bytes() == b"\x89PNG fake"
    with pytest.raises(InputError):
        store.save_image("empty", b"")


def test_concurrent_appends_all_recorded(tmp_path):
    store = GalleryStore(tmp_path / "gallery.jsonl")

    def work(k):
        for i in range(10):
            store.append(entry(k * 10 + i))

    threads = [threading.Thread(target=work, args=(k,)) for k in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    listed = store.entries()
    assert len(listed) == 40
    assert len({e.id for e in listed}) == 40
    # Every line must still be intact JSON (no interleaved writes).
    lines = (tmp_path / "gallery.jsonl").read_text().splitlines()
    assert len(lines) == 40


def test_ids_unique():
    ids = {new_entry_id() for _ in range(100)}
    assert len(ids) == 100


def test_round_trip_dict():
    e = entry(9)
    assert GalleryEntry.from_dict(e.to_dict()) == e
