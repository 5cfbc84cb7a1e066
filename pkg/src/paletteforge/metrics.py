"""Palette quality metrics and the evaluation report.

All color distances here are CIEDE2000 on real (denormalized) Lab values.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np

from .bins import AbBinTable, default_table
from .colorspace import Palette
from .data import PatRecord
from .difference import ciede2000
from .errors import InputError
from .tpn import sample_palettes
from .training import TpnBundle

SMOOTHING_EPS = 1e-8


def palette_diversity(palette: Palette) -> float:
    """Mean CIEDE2000 over the ten unordered color pairs of one palette."""
    pairs = list(combinations(palette.colors, 2))
    return sum(ciede2000(a, b) for a, b in pairs) / len(pairs)


def multimodality(palettes: Sequence[Palette]) -> float:
    """How far apart a set of palettes for one prompt sits.

    For every ordered pair (P, Q) of distinct palettes, each color of P is
    matched to its closest color in Q; the score averages those nearest
    distances over colors and over all ordered pairs.  Identical palettes
    give exactly zero.
    """
    if len(palettes) < 2:
        raise InputError("multimodality needs at least two palettes")
    totals = []
    for i, p in enumerate(palettes):
        for j, q in enumerate(palettes):
            if i == j:
                continue
            per_color = [
                min(ciede2000(color, other) for other in q.colors) for color in p.colors
            ]
            totals.append(sum(per_color) / len(per_color))
    return sum(totals) / len(totals)


def ab_distribution(
    palettes: Sequence[Palette], table: AbBinTable | None = None
) -> np.ndarray:
    """Distribution of palette colors over the chroma bin table.

    Counts get an additive 1e-8 before normalization, so every bin carries
    nonzero probability and KL against another smoothed distribution stays
    finite.
    """
    if table is None:
        table = default_table()
    if not palettes:
        raise InputError("ab_distribution needs at least one palette")
    ab = np.array(
        [[color.a, color.b] for palette in palettes for color in palette.colors],
        dtype=np.float64,
    )
    counts = np.bincount(table.bin_indices(ab), minlength=len(table)).astype(np.float64)
    counts += SMOOTHING_EPS
    return counts / counts.sum()


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """Kullback-Leibler divergence sum(p * ln(p / q)), natural log."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise InputError(f"distributions differ in shape: {p.shape} vs {q.shape}")
    if np.any(q <= 0.0):
        raise InputError("q must be strictly positive (apply smoothing first)")
    mask = p > 0.0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


@dataclass
class EvalReport:
    texts: int
    samples_per_text: int
    diversity_mean: float
    diversity_std: float
    multimodality_mean: float
    multimodality_std: float
    bin_kl: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")


def evaluate(
    bundle: TpnBundle,
    records: Sequence[PatRecord],
    samples_per_text: int = 10,
    seed: int = 0,
    deterministic: bool = False,
) -> EvalReport:
    """Sample the model over a record set and score the draws.

    Diversity scores the first sampled palette per prompt; multimodality
    scores the spread across all draws for the same prompt.  The bin KL
    compares the ground-truth chroma distribution against the generated one.
    """
    if not records:
        raise InputError("evaluation needs at least one record")
    if samples_per_text < 2:
        raise InputError("need at least two samples per text for multimodality")
    diversities = []
    modal_scores = []
    generated: list[Palette] = []
    for index, record in enumerate(records):
        result = sample_palettes(
            bundle.model,
            bundle.vocab,
            record.text,
            count=samples_per_text,
            seed=(seed * 1_000_003 + index) & 0x7FFFFFFF,
            deterministic=deterministic,
        )
        diversities.append(palette_diversity(result.palettes[0]))
        modal_scores.append(multimodality(result.palettes))
        generated.extend(result.palettes)

    truth = [record.palette for record in records]
    bin_kl = kl_divergence(ab_distribution(truth), ab_distribution(generated))
    return EvalReport(
        texts=len(records),
        samples_per_text=samples_per_text,
        diversity_mean=float(np.mean(diversities)),
        diversity_std=float(np.std(diversities)),
        multimodality_mean=float(np.mean(modal_scores)),
        multimodality_std=float(np.std(modal_scores)),
        bin_kl=bin_kl,
    )
