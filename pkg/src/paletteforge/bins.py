"""Quantization of the ab chroma plane into a fixed bin table.

The table covers a regular integer grid over a, b in [-110, 110] with step
10 and keeps only bins whose center is reachable from sRGB: a center (a, b)
survives if some integer lightness L in 0..100 puts (L, a, b) inside the
sRGB gamut before any clipping.  The resulting table is frozen into the
package resources so every install quantizes identically; rebuilds are only
used to cross-check the shipped file.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .colorspace import LabColor, lab_to_linear_rgb

GRID_STEP = 10
GRID_EXTENT = 110
# Slack for float round-off at the gamut boundary.
_GAMUT_EPS = 1e-6

_RESOURCE_NAME = "ab_bins.json"


class AbBinTable:
    """Ordered list of kept (a, b) bin centers with nearest-center lookup.

    Centers are sorted ascending by (a, b), and ordinals are their positions
    in that order.  Quantization is total: every finite ab pair maps to the
    nearest kept center (squared Euclidean distance in the ab plane, lowest
    ordinal winning ties).
    """

    def __init__(self, centers: Sequence[tuple[int, int]]):
        ordered = [(int(a), int(b)) for a, b in centers]
        if ordered != sorted(ordered):
            raise ValueError("bin centers must be sorted ascending by (a, b)")
        if len(set(ordered)) != len(ordered):
            raise ValueError("bin centers must be unique")
        if not ordered:
            raise ValueError("bin table may not be empty")
        self.centers: tuple[tuple[int, int], ...] = tuple(ordered)
        self._grid = np.array(ordered, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.centers)

    def __eq__(self, other) -> bool:
        return isinstance(other, AbBinTable) and self.centers == other.centers

    def bin_index(self, a: float, b: float) -> int:
        """Ordinal of the nearest bin center to (a, b)."""
        d = (self._grid[:, 0] - float(a)) ** 2 + (self._grid[:, 1] - float(b)) ** 2
        return int(np.argmin(d))

    def bin_indices(self, ab: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`bin_index` for an (N, 2) array of ab pairs."""
        ab = np.asarray(ab, dtype=np.float64)
        if ab.ndim != 2 or ab.shape[1] != 2:
            raise ValueError(f"expected shape (N, 2), got {ab.shape}")
        d = ((ab[:, None, :] - self._grid[None, :, :]) ** 2).sum(axis=2)
        return d.argmin(axis=1)

    @classmethod
    def build(cls) -> "AbBinTable":
        """Reconstruct the table from the gamut-reachability rule."""
        axis = np.arange(-GRID_EXTENT, GRID_EXTENT + 1, GRID_STEP)
        lightness = np.arange(0, 101, dtype=np.float64)
        kept = []
        for a in axis:
            for b in axis:
                lab = np.stack(
                    [lightness, np.full_like(lightness, a), np.full_like(lightness, b)],
                    axis=-1,
                )
                linear = lab_to_linear_rgb(lab)
                in_gamut = np.all(
                    (linear >= -_GAMUT_EPS) & (linear <= 1.0 + _GAMUT_EPS), axis=-1
                )
                if bool(in_gamut.any()):
                    kept.append((int(a), int(b)))
        return cls(kept)

    def save(self, path: str | Path) -> None:
        payload = {
            "grid_step": GRID_STEP,
            "grid_extent": GRID_EXTENT,
            "count": len(self.centers),
            "centers": [list(c) for c in self.centers],
        }
        Path(path).write_text(json.dumps(payload, indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "AbBinTable":
        payload = json.loads(Path(path).read_text())
        table = cls([tuple(c) for c in payload["centers"]])
        if payload.get("count") != len(table):
            raise ValueError("bin table count field disagrees with its centers list")
        return table


@lru_cache(maxsize=1)
def default_table() -> AbBinTable:
    """The bin table shipped with the package."""
    ref = resources.files("paletteforge.resources").joinpath(_RESOURCE_NAME)
    with resources.as_file(ref) as path:
        return AbBinTable.load(path)


def quantize_ab(color: "LabColor | Sequence[float]", table: AbBinTable | None = None) -> int:
    """Map a color's (a, b) chroma to its bin ordinal.

    Accepts a :class:`LabColor` or a bare (a, b) pair.
    """
    if table is None:
        table = default_table()
    if isinstance(color, LabColor):
        a, b = color.a, color.b
    else:
        pair = tuple(float(v) for v in color)
        if len(pair) != 2:
            raise ValueError(f"expected an (a, b) pair, got {len(pair)} components")
        a, b = pair
    return table.bin_index(a, b)
