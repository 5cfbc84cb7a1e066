"""Dominant palette extraction via median-cut in RGB.

The box population median drives every split, so the five recovered colors
track where the pixel mass actually sits.  All per-box statistics are
computed with exact integer sums, which makes the result independent of
pixel ordering.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .colorspace import LabColor, Palette, rgb_array_to_lab
from .errors import InputError


def _split_box(box: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """Split a (n, 3) pixel box at the population median of its widest channel.

    Returns None when every pixel in the box is identical.
    """
    lo = box.min(axis=0)
    hi = box.max(axis=0)
    ranges = hi - lo
    if not ranges.any():
        return None
    axis = int(np.argmax(ranges))  # first axis wins ties
    values = box[:, axis]
    uniq, counts = np.unique(values, return_counts=True)
    cumulative = np.cumsum(counts)
    total = cumulative[-1]
    # Candidate boundaries sit between consecutive distinct values; pick the
    # one whose left-side population is nearest half, earliest on ties.
    left_counts = cumulative[:-1]
    boundary = int(np.argmin(np.abs(left_counts - total / 2.0)))
    threshold = uniq[boundary]
    mask = values <= threshold
    return box[mask], box[~mask]


def extract_dominant_palette(image: "Image.Image | np.ndarray") -> Palette:
    """Extract the five dominant colors of an RGB image, ordered by population.

    Accepts a PIL image (converted to RGB) or a (H, W, 3) uint8 array.  When
    the image has fewer than five distinct colors, the most populous boxes
    are duplicated so the palette always has exactly five entries.
    """
    if isinstance(image, Image.Image):
        pixels = np.asarray(image.convert("RGB"), dtype=np.uint8)
    else:
        pixels = np.asarray(image)
        if pixels.dtype != np.uint8 or pixels.ndim != 3 or pixels.shape[-1] != 3:
            raise InputError(f"expected an (H, W, 3) uint8 array, got {pixels.dtype} {pixels.shape}")
    pixels = pixels.reshape(-1, 3).astype(np.int64)
    if pixels.shape[0] == 0:
        raise InputError("cannot extract a palette from an empty image")

    boxes: list[np.ndarray] = [pixels]
    while len(boxes) < Palette.SIZE:
        splittable = [i for i, b in enumerate(boxes) if (b.max(axis=0) - b.min(axis=0)).any()]
        if not splittable:
            break
        target = max(splittable, key=lambda i: (len(boxes[i]), -i))
        box = boxes.pop(target)
        parts = _split_box(box)
        assert parts is not None
        boxes.extend(parts)

    entries = []
    for box in boxes:
        count = box.shape[0]
        mean_rgb = box.sum(axis=0, dtype=np.int64) / count  # exact sums: order-free
        lab = rgb_array_to_lab(mean_rgb[None, :])[0]
        entries.append((count, (float(lab[0]), float(lab[1]), float(lab[2]))))
    # Most populous first; identical populations break ties on the color value.
    entries.sort(key=lambda e: (-e[0], e[1]))

    # Degenerate image with < 5 distinct colors: cycle the populous boxes.
    distinct = len(entries)
    while len(entries) < Palette.SIZE:
        entries.append(entries[len(entries) % distinct])

    colors = tuple(LabColor(*entries[i][1]) for i in range(Palette.SIZE))
    return Palette(colors)
