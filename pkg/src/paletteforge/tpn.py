"""Text-to-palette network: a conditional GAN over five-color palettes.

The generator encodes the text with a GRU, reparameterizes each hidden state
into a latent conditioning vector, and decodes five Lab colors one at a time
with an attention-equipped GRU cell.  The discriminator is an MLP that sees
the mean conditioning vector next to a flattened palette.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .colorspace import LabColor, Palette, denormalize_lab
from .data import Vocabulary, tokenize
from .errors import InputError
from .losses import (
    discriminator_adversarial_loss,
    generator_adversarial_loss,
    huber,
    kl_gaussian,
)

PALETTE_STEPS = 5


@dataclass
class TpnOutput:
    """Generator forward results, all still in network scale."""

    palettes: torch.Tensor  # (B, 5, 3) in [-1, 1]
    attention: torch.Tensor  # (B, 5, T), rows sum to 1 over valid tokens
    mu: torch.Tensor  # (B, T, D)
    sigma: torch.Tensor  # (B, T, D)
    c_hat: torch.Tensor  # (B, T, D), sampled conditioning sequence
    c_bar: torch.Tensor  # (B, D), masked mean of c_hat


class ConditionAugmenter(nn.Module):
    """Per-token reparameterized Gaussian over the conditioning space."""

    def __init__(self, in_dim: int, cond_dim: int):
        super().__init__()
        self.fc = nn.Linear(in_dim, 2 * cond_dim)
        self.cond_dim = cond_dim

    def forward(
        self, states: torch.Tensor, eps: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        stats = self.fc(states)
        mu, logvar = stats.split(self.cond_dim, dim=-1)
        sigma = torch.exp(0.5 * logvar)
        return mu + sigma * eps, mu, sigma


class AdditiveAttention(nn.Module):
    """Scores each conditioning vector against the decoder state.

    Energies pass through a sigmoid before the softmax; padded positions are
    masked to -inf so their weights come out exactly zero.
    """

    def __init__(self, state_dim: int, cond_dim: int, att_dim: int):
        super().__init__()
        self.state_proj = nn.Linear(state_dim, att_dim, bias=False)
        self.cond_proj = nn.Linear(cond_dim, att_dim, bias=False)
        self.score = nn.Linear(att_dim, 1, bias=False)

    def forward(
        self, state: torch.Tensor, cond: torch.Tensor, mask: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        mixed = torch.sigmoid(self.state_proj(state).unsqueeze(1) + self.cond_proj(cond))
        energy = self.score(mixed).squeeze(-1)  # (B, T)
        energy = energy.masked_fill(~mask, float("-inf"))
        weights = torch.softmax(energy, dim=-1)
        context = torch.bmm(weights.unsqueeze(1), cond).squeeze(1)  # (B, D)
        return context, weights


class PaletteGenerator(nn.Module):
    def __init__(
        self,
        vocab_size: int,
        embed_dim: int = 300,
        enc_hidden: int = 150,
        cond_dim: int = 150,
        dec_hidden: int = 150,
    ):
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, embed_dim, padding_idx=0)
        self.encoder = nn.GRU(embed_dim, enc_hidden, batch_first=True)
        self.augment = ConditionAugmenter(enc_hidden, cond_dim)
        self.attention = AdditiveAttention(dec_hidden, cond_dim, dec_hidden)
        self.cell = nn.GRUCell(3 + cond_dim, dec_hidden)
        self.head = nn.Linear(dec_hidden, 3)
        self.cond_dim = cond_dim
        self.dec_hidden = dec_hidden

    def encode(self, ids: torch.Tensor) -> torch.Tensor:
        """GRU hidden state at every token position, shape (B, T, H)."""
        states, _ = self.encoder(self.embedding(ids))
        return states

    def condition(
        self,
        states: torch.Tensor,
        mask: torch.Tensor,
        eps: torch.Tensor | None = None,
        generator: torch.Generator | None = None,
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor]:
        """Sample the conditioning sequence and its masked mean."""
        if eps is None:
            eps = torch.randn(
                states.shape[0],
                states.shape[1],
                self.cond_dim,
                generator=generator,
                dtype=states.dtype,
            )
        c_hat, mu, sigma = self.augment(states, eps)
        weights = mask.to(c_hat.dtype).unsqueeze(-1)
        c_bar = (c_hat * weights).sum(dim=1) / weights.sum(dim=1).clamp(min=1.0)
        return c_hat, c_bar, mu, sigma

    def decode(
        self, c_hat: torch.Tensor, mask: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Emit five colors sequentially, attending over the conditioning."""
        batch = c_hat.shape[0]
        state = c_hat.new_zeros(batch, self.dec_hidden)
        prev = c_hat.new_zeros(batch, 3)
        colors = []
        attentions = []
        for _ in range(PALETTE_STEPS):
            context, weights = self.attention(state, c_hat, mask)
            state = self.cell(torch.cat([prev, context], dim=-1), state)
            prev = torch.tanh(self.head(state))
            colors.append(prev)
            attentions.append(weights)
        return torch.stack(colors, dim=1), torch.stack(attentions, dim=1)

    def forward(
        self,
        ids: torch.Tensor,
        mask: torch.Tensor,
        eps: torch.Tensor | None = None,
        generator: torch.Generator | None = None,
    ) -> TpnOutput:
        states = self.encode(ids)
        c_hat, c_bar, mu, sigma = self.condition(states, mask, eps, generator)
        palettes, attention = self.decode(c_hat, mask)
        return TpnOutput(
            palettes=palettes,
            attention=attention,
            mu=mu,
            sigma=sigma,
            c_hat=c_hat,
            c_bar=c_bar,
        )


class PaletteDiscriminator(nn.Module):
    """MLP scoring (conditioning mean, flattened palette) pairs."""

    def __init__(self, cond_dim: int = 150, hidden: int = 150):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(cond_dim + 3 * PALETTE_STEPS, hidden),
            nn.LeakyReLU(0.2),
            nn.Linear(hidden, hidden),
            nn.LeakyReLU(0.2),
            nn.Linear(hidden, 1),
            nn.Sigmoid(),
        )

    def forward(self, c_bar: torch.Tensor, palettes: torch.Tensor) -> torch.Tensor:
        return self.net(torch.cat([c_bar, palettes], dim=-1)).squeeze(-1)


def tpn_generator_loss(
    fake_scores: torch.Tensor,
    fake_palettes: torch.Tensor,
    real_palettes: torch.Tensor,
    mu: torch.Tensor,
    sigma: torch.Tensor,
    mask: torch.Tensor,
    lambda_huber: float = 100.0,
    lambda_kl: float = 0.5,
    delta: float = 1.0,
) -> torch.Tensor:
    return (
        generator_adversarial_loss(fake_scores)
        + lambda_huber * huber(fake_palettes, real_palettes, delta)
        + lambda_kl * kl_gaussian(mu, sigma, mask)
    )


def tpn_discriminator_loss(
    real_scores: torch.Tensor, fake_scores: torch.Tensor
) -> torch.Tensor:
    return discriminator_adversarial_loss(real_scores, fake_scores)


# --- inference ---------------------------------------------------------------


@dataclass(frozen=True)
class SampleResult:
    tokens: tuple[str, ...]
    unknown_tokens: tuple[str, ...]
    all_tokens_unknown: bool
    palettes: tuple[Palette, ...]
    attention: np.ndarray  # (count, 5, T)


def sample_palettes(
    model: PaletteGenerator,
    vocab: Vocabulary,
    text: str,
    count: int = 1,
    seed: int | None = None,
    deterministic: bool = False,
) -> SampleResult:
    """Draw palettes for a text prompt.

    Unknown tokens fall back to the zero-vector padding embedding but still
    attend; when every token is unknown the result flags it so callers can
    warn.  A seed makes the draw reproducible; ``deterministic`` pins the
    latent noise to zero instead of sampling.
    """
    if count < 1:
        raise InputError(f"count must be >= 1, got {count}")
    tokens = tokenize(text)
    unknown = tuple(t for t in tokens if t not in vocab)
    ids = torch.tensor([vocab.ids(tokens)] * count, dtype=torch.int64)
    mask = torch.ones(count, len(tokens), dtype=torch.bool)

    generator = None
    eps = None
    if deterministic:
        eps = torch.zeros(count, len(tokens), model.cond_dim)
    elif seed is not None:
        generator = torch.Generator()
        generator.manual_seed(seed)

    model.eval()
    with torch.no_grad():
        out = model(ids, mask, eps=eps, generator=generator)
    lab = denormalize_lab(out.palettes.numpy().astype(np.float64))
    palettes = tuple(
        Palette(tuple(LabColor(*lab[i, j]) for j in range(PALETTE_STEPS)))
        for i in range(count)
    )
    return SampleResult(
        tokens=tuple(tokens),
        unknown_tokens=unknown,
        all_tokens_unknown=len(unknown) == len(tokens),
        palettes=palettes,
        attention=out.attention.numpy().astype(np.float64),
    )
