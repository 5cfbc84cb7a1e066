"""Text/palette dataset handling.

Datasets are newline-delimited JSON, one record per line:

    {"text": "autumn breeze", "palette": [[L, a, b], ... 5 entries]}

Loading validates every record and reports failures with 1-based line
numbers.  Tokenization lowercases, strips punctuation (keeping hyphens that
join two word characters), and splits on whitespace.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .colorspace import LabColor, Palette
from .errors import EmbeddingFormatError, EmptyTextError, InputError, PatFormatError

PAD_TOKEN = "<pad>"
PAD_ID = 0
EMBED_DIM = 300
OOV_STD = 0.05

_PUNCT = re.compile(r"[^a-z0-9\s-]+")
_LOOSE_HYPHEN = re.compile(r"(?<![a-z0-9])-|-(?![a-z0-9])")


def tokenize(text: str) -> list[str]:
    """Split raw text into lowercase tokens.

    Punctuation is removed; hyphens survive only between word characters
    ("sun-bleached" stays one token).  Raises :class:`EmptyTextError` when
    nothing is left.
    """
    lowered = text.lower()
    stripped = _PUNCT.sub(" ", lowered)
    stripped = _LOOSE_HYPHEN.sub(" ", stripped)
    tokens = stripped.split()
    if not tokens:
        raise EmptyTextError(f"no tokens left after cleaning {text!r}")
    return tokens


@dataclass(frozen=True)
class PatRecord:
    text: str
    palette: Palette

    def to_json_line(self) -> str:
        return json.dumps({"text": self.text, "palette": self.palette.to_json()})


def _parse_record(obj, line_no: int) -> PatRecord:
    if not isinstance(obj, dict):
        raise PatFormatError(line_no, "record is not a JSON object")
    text = obj.get("text")
    if not isinstance(text, str) or not text.strip():
        raise PatFormatError(line_no, "missing or empty 'text' field")
    try:
        tokenize(text)
    except EmptyTextError as exc:
        raise PatFormatError(line_no, str(exc)) from exc
    palette = obj.get("palette")
    if not isinstance(palette, list) or len(palette) != Palette.SIZE:
        size = len(palette) if isinstance(palette, list) else "missing"
        raise PatFormatError(line_no, f"palette must be a list of {Palette.SIZE} colors, got {size}")
    colors = []
    for i, entry in enumerate(palette):
        if not isinstance(entry, list) or len(entry) != 3:
            raise PatFormatError(line_no, f"palette color {i} is not an [L, a, b] triple")
        try:
            colors.append(LabColor(*entry))
        except (TypeError, ValueError) as exc:
            raise PatFormatError(line_no, f"palette color {i}: {exc}") from exc
    return PatRecord(text=text, palette=Palette(tuple(colors)))


def load_pat(path: str | Path) -> list[PatRecord]:
    """Load and validate a text/palette dataset file."""
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise PatFormatError(line_no, f"invalid JSON: {exc.msg}") from exc
            records.append(_parse_record(obj, line_no))
    return records


def save_pat(records: Sequence[PatRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record.to_json_line() + "\n")


@dataclass(frozen=True)
class Vocabulary:
    """Token-to-id mapping with a reserved padding slot at id 0."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        if not self.tokens or self.tokens[PAD_ID] != PAD_TOKEN:
            raise ValueError(f"tokens[{PAD_ID}] must be the padding token {PAD_TOKEN!r}")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("vocabulary tokens must be unique")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def id_of(self, token: str) -> int:
        """Id of a known token; unknown tokens fall back to padding."""
        return self._index.get(token, PAD_ID)

    def ids(self, tokens: Sequence[str]) -> list[int]:
        return [self.id_of(t) for t in tokens]

    @classmethod
    def from_records(cls, records: Sequence[PatRecord]) -> "Vocabulary":
        seen = set()
        for record in records:
            seen.update(tokenize(record.text))
        return cls((PAD_TOKEN, *sorted(seen)))

    def to_json(self) -> list[str]:
        return list(self.tokens)

    @classmethod
    def from_json(cls, tokens: Sequence[str]) -> "Vocabulary":
        return cls(tuple(tokens))


def load_embeddings(
    vocab: Vocabulary,
    path: str | Path | None = None,
    dim: int = EMBED_DIM,
    oov_seed: int = 0,
) -> np.ndarray:
    """Build the (len(vocab), dim) float32 embedding matrix.

    Vectors come from a text file of ``token v1 ... v_dim`` lines when one is
    given; tokens absent from the file (or all tokens, when no file is given)
    are drawn from N(0, 0.05^2) with a deterministic per-vocabulary layout.
    The padding row is always zero.
    """
    file_vectors: dict[str, np.ndarray] = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                parts = line.rstrip("\n").split(" ")
                if line_no == 1 and len(parts) == 2:
                    continue  # word2vec-style "count dim" header
                if not line.strip():
                    continue
                if len(parts) != dim + 1:
                    raise EmbeddingFormatError(
                        line_no, f"expected a token and {dim} floats, got {len(parts)} fields"
                    )
                try:
                    vector = np.array([float(v) for v in parts[1:]], dtype=np.float32)
                except ValueError as exc:
                    raise EmbeddingFormatError(line_no, f"non-numeric component: {exc}") from exc
                file_vectors[parts[0]] = vector

    rng = np.random.default_rng(oov_seed)
    matrix = np.zeros((len(vocab), dim), dtype=np.float32)
    for i, token in enumerate(vocab.tokens):
        if i == PAD_ID:
            continue
        if token in file_vectors:
            matrix[i] = file_vectors[token]
        else:
            matrix[i] = rng.normal(0.0, OOV_STD, size=dim).astype(np.float32)
    return matrix


def split_records(
    records: Sequence[PatRecord], seed: int = 0
) -> tuple[list[PatRecord], list[PatRecord]]:
    """Deterministic train/test split.

    Uses a fixed 992-record test set for full-scale datasets (>= 9921
    records) and a ceil(10%) holdout otherwise.
    """
    n = len(records)
    if n < 2:
        raise InputError(f"need at least 2 records to split, got {n}")
    test_size = 992 if n >= 9921 else math.ceil(0.1 * n)
    order = list(range(n))
    random.Random(seed).shuffle(order)
    test_idx = set(order[:test_size])
    train = [records[i] for i in order[test_size:]]
    test = [records[i] for i in order[:test_size]]
    assert len(train) >= 1
    return train, test


@dataclass(frozen=True)
class EmbeddedText:
    """One tokenized text, ready for the encoder."""

    tokens: tuple[str, ...]
    ids: np.ndarray  # (T,) int64
    vectors: np.ndarray  # (T, dim) float32
    mask: np.ndarray  # (T,) bool, True at real tokens


def embed_text(text: str, vocab: Vocabulary, matrix: np.ndarray) -> EmbeddedText:
    tokens = tokenize(text)
    ids = np.array(vocab.ids(tokens), dtype=np.int64)
    return EmbeddedText(
        tokens=tuple(tokens),
        ids=ids,
        vectors=matrix[ids],
        mask=np.ones(len(tokens), dtype=bool),
    )


@dataclass(frozen=True)
class TextBatch:
    """A padded batch of embedded texts with their target palettes."""

    ids: np.ndarray  # (B, T) int64, PAD_ID on padding
    vectors: np.ndarray  # (B, T, dim) float32, zero on padding
    mask: np.ndarray  # (B, T) bool
    palettes: np.ndarray  # (B, 15) float64 Lab values


def make_batch(records: Sequence[PatRecord], vocab: Vocabulary, matrix: np.ndarray) -> TextBatch:
    embedded = [embed_text(r.text, vocab, matrix) for r in records]
    width = max(e.ids.shape[0] for e in embedded)
    batch = len(embedded)
    ids = np.full((batch, width), PAD_ID, dtype=np.int64)
    vectors = np.zeros((batch, width, matrix.shape[1]), dtype=np.float32)
    mask = np.zeros((batch, width), dtype=bool)
    palettes = np.zeros((batch, 15), dtype=np.float64)
    for row, (e, record) in enumerate(zip(embedded, records)):
        t = e.ids.shape[0]
        ids[row, :t] = e.ids
        vectors[row, :t] = e.vectors
        mask[row, :t] = True
        palettes[row] = record.palette.to_vector()
    return TextBatch(ids=ids, vectors=vectors, mask=mask, palettes=palettes)


def batches(
    records: Sequence[PatRecord],
    batch_size: int,
    vocab: Vocabulary,
    matrix: np.ndarray,
    seed: int | None = None,
) -> Iterator[TextBatch]:
    """Yield padded batches; a seed shuffles record order deterministically."""
    if batch_size < 1:
        raise ValueError("batch_size must be positive")
    ordered = list(records)
    if seed is not None:
        random.Random(seed).shuffle(ordered)
    for start in range(0, len(ordered), batch_size):
        yield make_batch(ordered[start : start + batch_size], vocab, matrix)


# --- synthetic fixtures -----------------------------------------------------

_FIXTURE_WORDS = [
    "autumn", "breeze", "cherry", "dusk", "ember", "frost", "garden", "harbor",
    "ivory", "jade", "lagoon", "meadow", "night", "ochre", "plum", "quartz",
    "rust", "sand", "tidal", "umber", "velvet", "willow", "zest", "coral",
    "slate", "mint", "blush", "storm", "honey", "moss", "denim", "flame",
    "glacier", "orchid", "pepper", "raisin", "saffron", "tulip", "wheat", "yarrow",
]


def synthetic_records(count: int, seed: int = 0) -> list[PatRecord]:
    """Deterministic toy dataset for tests and smoke training runs."""
    rng = random.Random(seed)
    records = []
    for _ in range(count):
        words = rng.sample(_FIXTURE_WORDS, rng.randint(1, 4))
        colors = tuple(
            LabColor(
                round(rng.uniform(5.0, 95.0), 3),
                round(rng.uniform(-80.0, 80.0), 3),
                round(rng.uniform(-80.0, 80.0), 3),
            )
            for _ in range(Palette.SIZE)
        )
        records.append(PatRecord(text=" ".join(words), palette=Palette(colors)))
    return records


def write_fixture_embeddings(
    records: Sequence[PatRecord], path: str | Path, dim: int = EMBED_DIM, seed: int = 0
) -> None:
    """Write a word-vector text file covering a record set's vocabulary."""
    vocab = Vocabulary.from_records(records)
    rng = np.random.default_rng(seed)
    with open(path, "w", encoding="utf-8") as handle:
        for token in vocab.tokens[1:]:
            vector = rng.normal(0.0, OOV_STD, size=dim)
            handle.write(token + " " + " ".join(f"{v:.6f}" for v in vector) + "\n")
