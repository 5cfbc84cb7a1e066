"""CIEDE2000 color difference.

Scalar double-precision implementation with the usual weighting factors
kL = kC = kH = 1.  Handles the hue-angle wraparound and the degenerate
zero-chroma cases explicitly.
"""

from __future__ import annotations

import math
from typing import Sequence

from .colorspace import LabColor


def _as_triple(color: "LabColor | Sequence[float]") -> tuple[float, float, float]:
    if isinstance(color, LabColor):
        return color.to_tuple()
    t = tuple(float(v) for v in color)
    if len(t) != 3:
        raise ValueError(f"expected a Lab triple, got {len(t)} components")
    return t


def ciede2000(color1: "LabColor | Sequence[float]", color2: "LabColor | Sequence[float]") -> float:
    """Return the CIEDE2000 difference between two Lab colors.

    Zero iff the inputs are identical; symmetric in its arguments.
    """
    L1, a1, b1 = _as_triple(color1)
    L2, a2, b2 = _as_triple(color2)

    C1 = math.hypot(a1, b1)
    C2 = math.hypot(a2, b2)
    C_mean = (C1 + C2) / 2.0

    G = 0.5 * (1.0 - math.sqrt(C_mean**7 / (C_mean**7 + 25.0**7)))
    a1p = (1.0 + G) * a1
    a2p = (1.0 + G) * a2
    C1p = math.hypot(a1p, b1)
    C2p = math.hypot(a2p, b2)

    def hue_angle(ap: float, b: float) -> float:
        if ap == 0.0 and b == 0.0:
            return 0.0
        h = math.degrees(math.atan2(b, ap))
        return h + 360.0 if h < 0.0 else h

    h1p = hue_angle(a1p, b1)
    h2p = hue_angle(a2p, b2)

    dLp = L2 - L1
    dCp = C2p - C1p

    if C1p * C2p == 0.0:
        dhp = 0.0
    else:
        diff = h2p - h1p
        if abs(diff) <= 180.0:
            dhp = diff
        elif diff > 180.0:
            dhp = diff - 360.0
        else:
            dhp = diff + 360.0
    dHp = 2.0 * math.sqrt(C1p * C2p) * math.sin(math.radians(dhp) / 2.0)

    Lp_mean = (L1 + L2) / 2.0
    Cp_mean = (C1p + C2p) / 2.0

    if C1p * C2p == 0.0:
        hp_mean = h1p + h2p
    else:
        s = h1p + h2p
        diff = abs(h1p - h2p)
        if diff <= 180.0:
            hp_mean = s / 2.0
        elif s < 360.0:
            hp_mean = (s + 360.0) / 2.0
        else:
            hp_mean = (s - 360.0) / 2.0

    T = (
        1.0
        - 0.17 * math.cos(math.radians(hp_mean - 30.0))
        + 0.24 * math.cos(math.radians(2.0 * hp_mean))
        + 0.32 * math.cos(math.radians(3.0 * hp_mean + 6.0))
        - 0.20 * math.cos(math.radians(4.0 * hp_mean - 63.0))
    )

    d_theta = 30.0 * math.exp(-(((hp_mean - 275.0) / 25.0) ** 2))
    R_C = 2.0 * math.sqrt(Cp_mean**7 / (Cp_mean**7 + 25.0**7))
    S_L = 1.0 + (0.015 * (Lp_mean - 50.0) ** 2) / math.sqrt(20.0 + (Lp_mean - 50.0) ** 2)
    S_C = 1.0 + 0.045 * Cp_mean
    S_H = 1.0 + 0.015 * Cp_mean * T
    R_T = -math.sin(math.radians(2.0 * d_theta)) * R_C

    term_L = dLp / S_L
    term_C = dCp / S_C
    term_H = dHp / S_H
    return math.sqrt(term_L**2 + term_C**2 + term_H**2 + R_T * term_C * term_H)


def palette_pair_distances(colors1: Sequence, colors2: Sequence) -> list[list[float]]:
    """All-pairs CIEDE2000 matrix between two color lists."""
    return [[ciede2000(c1, c2) for c2 in colors2] for c1 in colors1]
