"""Append-only gallery of colorization results.

Persistence is a JSON-lines file: one entry per line, appends flushed to
disk immediately, writes serialized through a lock.  Result images live in
a sibling directory named after the store file.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

from .colorspace import Palette
from .errors import InputError


@dataclass(frozen=True)
class GalleryEntry:
    id: str
    timestamp: str  # ISO 8601, UTC
    text: str | None
    palette: list  # 5 x [L, a, b]
    image_path: str | None  # file name inside the store's image directory
    checkpoint_hash: str | None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GalleryEntry":
        return cls(
            id=data["id"],
            timestamp=data["timestamp"],
            text=data.get("text"),
            palette=data["palette"],
            image_path=data.get("image_path"),
            checkpoint_hash=data.get("checkpoint_hash"),
        )


def new_entry_id() -> str:
    return uuid.uuid4().hex


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class GalleryStore:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    @property
    def image_dir(self) -> Path:
        return self.path.parent / f"{self.path.stem}-images"

    def append(self, entry: GalleryEntry) -> None:
        Palette.from_lab_rows(entry.palette)  # reject malformed palettes early
        line = json.dumps(entry.to_dict(), sort_keys=True)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(line + "\n")
                handle.flush()
                os.fsync(handle.fileno())

    def entries(self) -> list[GalleryEntry]:
        """All entries, newest first."""
        if not self.path.exists():
            return []
        with self._lock:
            lines = self.path.read_text(encoding="utf-8").splitlines()
        parsed = [GalleryEntry.from_dict(json.loads(line)) for line in lines if line.strip()]
        return list(reversed(parsed))

    def get(self, entry_id: str) -> GalleryEntry:
        for entry in self.entries():
            if entry.id == entry_id:
                return entry
        raise KeyError(entry_id)

    def save_image(self, entry_id: str, png_bytes: bytes) -> str:
        """Store a result image; returns the file name recorded in the entry."""
        if not png_bytes:
            raise InputError("refusing to store an empty image")
        self.image_dir.mkdir(parents=True, exist_ok=True)
        name = f"{entry_id}.png"
        (self.image_dir / name).write_bytes(png_bytes)
        return name
