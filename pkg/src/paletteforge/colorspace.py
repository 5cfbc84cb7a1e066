"""CIE Lab color representation and sRGB conversions.

All conversions go through linear RGB and CIE XYZ with the D65/2-degree
white point.  Arrays are converted in float64; 8-bit round trips of in-gamut
colors are exact to within one quantization step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# D65 reference white, 2-degree observer.
WHITE_X = 0.95047
WHITE_Y = 1.0
WHITE_Z = 1.08883

# Linear sRGB -> XYZ (IEC 61966-2-1, 7 decimal places).
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)

_XYZ_TO_RGB = np.array(
    [
        [3.2404542, -1.5371385, -0.4985314],
        [-0.9692660, 1.8760108, 0.0415560],
        [0.0556434, -0.2040259, 1.0572252],
    ]
)

_DELTA = 6.0 / 29.0


@dataclass(frozen=True)
class LabColor:
    """A single CIE Lab color.

    L is lightness in [0, 100]; a and b are the opponent axes and must be
    finite.  Instances are immutable and hashable so they can key caches.
    """

    L: float
    a: float
    b: float

    def __post_init__(self):
        for name in ("L", "a", "b"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not np.isfinite(value):
                raise ValueError(f"{name} must be a finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not 0.0 <= self.L <= 100.0:
            raise ValueError(f"L must lie in [0, 100], got {self.L}")

    def to_tuple(self) -> tuple[float, float, float]:
        return (self.L, self.a, self.b)

    def to_json(self) -> list[float]:
        return [self.L, self.a, self.b]

    @classmethod
    def from_sequence(cls, seq: Sequence[float]) -> "LabColor":
        if len(seq) != 3:
            raise ValueError(f"expected 3 components, got {len(seq)}")
        return cls(float(seq[0]), float(seq[1]), float(seq[2]))


@dataclass(frozen=True)
class Palette:
    """An ordered set of exactly five Lab colors."""

    colors: tuple[LabColor, ...]

    SIZE = 5

    def __post_init__(self):
        if len(self.colors) != self.SIZE:
            raise ValueError(f"a palette holds exactly {self.SIZE} colors, got {len(self.colors)}")
        object.__setattr__(self, "colors", tuple(self.colors))

    def to_vector(self) -> np.ndarray:
        """Flatten to shape (15,): [L1, a1, b1, L2, ...]."""
        return np.array([c for color in self.colors for c in color.to_tuple()], dtype=np.float64)

    @classmethod
    def from_vector(cls, vec: Iterable[float]) -> "Palette":
        values = np.asarray(list(vec), dtype=np.float64)
        if values.shape != (cls.SIZE * 3,):
            raise ValueError(f"expected {cls.SIZE * 3} values, got shape {values.shape}")
        return cls(tuple(LabColor(*values[i : i + 3]) for i in range(0, cls.SIZE * 3, 3)))

    @classmethod
    def from_lab_rows(cls, rows: Sequence[Sequence[float]]) -> "Palette":
        if len(rows) != cls.SIZE:
            raise ValueError(f"expected {cls.SIZE} colors, got {len(rows)}")
        return cls(tuple(LabColor.from_sequence(r) for r in rows))

    def to_json(self) -> list[list[float]]:
        return [c.to_json() for c in self.colors]

    def hex_codes(self) -> list[str]:
        return [lab_to_hex(c) for c in self.colors]

    @classmethod
    def from_json_payload(cls, payload) -> "Palette":
        """Parse either ``[[L,a,b] x 5]`` or ``{"colors": [[L,a,b] x 5]}``."""
        rows = payload.get("colors") if isinstance(payload, dict) else payload
        if not isinstance(rows, list):
            raise ValueError('palette must be a list of [L, a, b] colors or {"colors": [...]}')
        return cls.from_lab_rows(rows)


def srgb_to_linear(channel: np.ndarray) -> np.ndarray:
    """Decode gamma-compressed sRGB values in [0, 1] to linear light."""
    channel = np.asarray(channel, dtype=np.float64)
    return np.where(channel <= 0.04045, channel / 12.92, ((channel + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(channel: np.ndarray) -> np.ndarray:
    """Encode linear light in [0, 1] to gamma-compressed sRGB."""
    channel = np.asarray(channel, dtype=np.float64)
    return np.where(
        channel <= 0.0031308,
        channel * 12.92,
        1.055 * np.clip(channel, 0.0, None) ** (1.0 / 2.4) - 0.055,
    )


def _f(t: np.ndarray) -> np.ndarray:
    return np.where(t > _DELTA**3, np.cbrt(t), t / (3.0 * _DELTA**2) + 4.0 / 29.0)


def _f_inv(t: np.ndarray) -> np.ndarray:
    return np.where(t > _DELTA, t**3, 3.0 * _DELTA**2 * (t - 4.0 / 29.0))


def rgb_array_to_lab(rgb: np.ndarray) -> np.ndarray:
    """Convert an array of 8-bit sRGB triples (..., 3) to Lab float64.

    L lands in [0, 100] (clamped against sub-1e-5 numerical overshoot at
    the gamut corners), a and b keep their natural range.
    """
    rgb = np.asarray(rgb)
    if rgb.shape[-1] != 3:
        raise ValueError(f"last axis must have size 3, got shape {rgb.shape}")
    scaled = rgb.astype(np.float64) / 255.0
    linear = srgb_to_linear(scaled)
    xyz = linear @ _RGB_TO_XYZ.T
    fx = _f(xyz[..., 0] / WHITE_X)
    fy = _f(xyz[..., 1] / WHITE_Y)
    fz = _f(xyz[..., 2] / WHITE_Z)
    lab = np.empty_like(xyz)
    lab[..., 0] = np.clip(116.0 * fy - 16.0, 0.0, 100.0)
    lab[..., 1] = 500.0 * (fx - fy)
    lab[..., 2] = 200.0 * (fy - fz)
    return lab


def lab_array_to_rgb(lab: np.ndarray) -> np.ndarray:
    """Convert Lab float triples (..., 3) to 8-bit sRGB.

    Out-of-gamut colors are clipped in linear RGB, so every finite Lab input
    produces a valid pixel.
    """
    lab = np.asarray(lab, dtype=np.float64)
    if lab.shape[-1] != 3:
        raise ValueError(f"last axis must have size 3, got shape {lab.shape}")
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = np.stack([_f_inv(fx) * WHITE_X, _f_inv(fy) * WHITE_Y, _f_inv(fz) * WHITE_Z], axis=-1)
    linear = xyz @ _XYZ_TO_RGB.T
    linear = np.clip(linear, 0.0, 1.0)
    srgb = np.clip(linear_to_srgb(linear), 0.0, 1.0)
    return np.round(srgb * 255.0).astype(np.uint8)


def lab_to_linear_rgb(lab: np.ndarray) -> np.ndarray:
    """Convert Lab triples to *unclipped* linear RGB.

    Values outside [0, 1] signal an out-of-gamut color; callers that need a
    displayable pixel should use :func:`lab_array_to_rgb` instead.
    """
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = np.stack([_f_inv(fx) * WHITE_X, _f_inv(fy) * WHITE_Y, _f_inv(fz) * WHITE_Z], axis=-1)
    return xyz @ _XYZ_TO_RGB.T


def rgb_to_lab(rgb: Sequence[int]) -> LabColor:
    """Convert one 8-bit RGB triple to a :class:`LabColor`."""
    r, g, b = rgb
    for v in (r, g, b):
        if not 0 <= int(v) <= 255:
            raise ValueError(f"RGB components must lie in [0, 255], got {rgb!r}")
    lab = rgb_array_to_lab(np.array([[int(r), int(g), int(b)]], dtype=np.uint8))[0]
    return LabColor(float(lab[0]), float(lab[1]), float(lab[2]))


def lab_to_rgb(color: LabColor | Sequence[float]) -> tuple[int, int, int]:
    """Convert a Lab color to the nearest representable 8-bit RGB triple."""
    if isinstance(color, LabColor):
        triple = color.to_tuple()
    else:
        triple = tuple(float(v) for v in color)
        if len(triple) != 3:
            raise ValueError(f"expected 3 components, got {len(triple)}")
    rgb = lab_array_to_rgb(np.array([triple], dtype=np.float64))[0]
    return (int(rgb[0]), int(rgb[1]), int(rgb[2]))


def lab_to_hex(color: LabColor | Sequence[float]) -> str:
    r, g, b = lab_to_rgb(color)
    return f"#{r:02x}{g:02x}{b:02x}"


# Networks operate on Lab scaled to [-1, 1]: L/50 - 1, a/110, b/110.
_AB_SCALE = 110.0


def normalize_lab(lab: np.ndarray) -> np.ndarray:
    """Scale Lab values into the tanh range [-1, 1] component-wise."""
    lab = np.asarray(lab, dtype=np.float64)
    out = np.empty_like(lab)
    out[..., 0] = lab[..., 0] / 50.0 - 1.0
    out[..., 1] = lab[..., 1] / _AB_SCALE
    out[..., 2] = lab[..., 2] / _AB_SCALE
    return out


def denormalize_lab(scaled: np.ndarray) -> np.ndarray:
    """Inverse of :func:`normalize_lab`."""
    scaled = np.asarray(scaled, dtype=np.float64)
    out = np.empty_like(scaled)
    out[..., 0] = (scaled[..., 0] + 1.0) * 50.0
    out[..., 1] = scaled[..., 1] * _AB_SCALE
    out[..., 2] = scaled[..., 2] * _AB_SCALE
    return out
