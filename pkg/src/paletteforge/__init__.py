"""paletteforge: text-conditioned palette generation and palette-guided colorization."""

__version__ = "0.1.0"

from .colorspace import LabColor, Palette, lab_to_hex, lab_to_rgb, rgb_to_lab
from .difference import ciede2000

__all__ = [
    "LabColor",
    "Palette",
    "ciede2000",
    "lab_to_hex",
    "lab_to_rgb",
    "rgb_to_lab",
    "__version__",
]
