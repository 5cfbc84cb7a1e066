"""Loss functions shared by both adversarial models.

Discriminator scores are clamped away from {0, 1} before any logarithm, so
losses stay finite even for a saturated discriminator.  Reconstruction
losses operate on network-scale values (Lab normalized to [-1, 1]).
"""

from __future__ import annotations

import torch

SCORE_EPS = 1e-7


def _clamp_scores(scores: torch.Tensor) -> torch.Tensor:
    return scores.clamp(SCORE_EPS, 1.0 - SCORE_EPS)


def huber(pred: torch.Tensor, target: torch.Tensor, delta: float = 1.0) -> torch.Tensor:
    """Mean Huber loss: quadratic within +-delta, linear outside."""
    diff = (pred - target).abs()
    quadratic = 0.5 * diff**2
    linear = delta * diff - 0.5 * delta**2
    return torch.where(diff <= delta, quadratic, linear).mean()


def kl_gaussian(
    mu: torch.Tensor, sigma: torch.Tensor, mask: torch.Tensor | None = None
) -> torch.Tensor:
    """KL divergence of N(mu, diag sigma^2) from the standard normal.

    Summed over the trailing feature axis; averaged over the leading axes,
    restricted to mask-selected positions when a mask is given.
    """
    per_position = 0.5 * (mu**2 + sigma**2 - 1.0 - torch.log(sigma**2)).sum(dim=-1)
    if mask is None:
        return per_position.mean()
    mask = mask.to(per_position.dtype)
    total = (per_position * mask).sum()
    return total / mask.sum().clamp(min=1.0)


def generator_adversarial_loss(fake_scores: torch.Tensor) -> torch.Tensor:
    """Saturating generator objective: minimize log(1 - D(fake))."""
    return torch.log(1.0 - _clamp_scores(fake_scores)).mean()


def discriminator_adversarial_loss(
    real_scores: torch.Tensor, fake_scores: torch.Tensor
) -> torch.Tensor:
    """Binary cross-entropy for real-vs-generated scores."""
    real = torch.log(_clamp_scores(real_scores))
    fake = torch.log(1.0 - _clamp_scores(fake_scores))
    return -(real.mean() + fake.mean())
