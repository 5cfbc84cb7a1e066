"""Training loops for both adversarial models.

Both trainers alternate one discriminator and one generator update per
batch, check every loss for divergence, and record per-epoch loss averages.
Everything is seeded: weight init, latent noise, and batch shuffling all
derive from the config seed, so a rerun reproduces the same checkpoint
bit for bit on the same platform.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import torch
from PIL import Image
from torch import nn

from .checkpoint import load_checkpoint, save_checkpoint
from .colorspace import normalize_lab, rgb_array_to_lab
from .data import PatRecord, Vocabulary, batches, load_embeddings
from .errors import InputError, TrainingDiverged
from .extract import extract_dominant_palette
from .losses import generator_adversarial_loss, huber, kl_gaussian
from .pcn import ColorizationUNet, ImageDiscriminator, pcn_discriminator_loss
from .tpn import PaletteDiscriminator, PaletteGenerator, tpn_discriminator_loss

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp"}


@dataclass
class TrainConfig:
    """Hyperparameters shared by both trainers.

    ``lambda_kl`` only affects the palette model; ``base_width`` and
    ``image_size`` only affect the colorization model.
    """

    epochs: int = 500
    batch_size: int = 32
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    delta: float = 1.0
    lambda_huber: float = 100.0
    lambda_kl: float = 0.5
    init_std: float = 0.05
    seed: int = 0
    checkpoint_interval: int = 0  # epochs between intermediate saves, 0 = final only
    embed_dim: int = 300
    enc_hidden: int = 150
    cond_dim: int = 150
    dec_hidden: int = 150
    base_width: int = 64
    image_size: int = 64

    @classmethod
    def tpn_default(cls) -> "TrainConfig":
        return cls(epochs=500, batch_size=32, lambda_huber=100.0)

    @classmethod
    def pcn_default(cls) -> "TrainConfig":
        return cls(epochs=100, batch_size=8, lambda_huber=10.0)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


_NORM_TYPES = (
    nn.BatchNorm1d,
    nn.BatchNorm2d,
    nn.BatchNorm3d,
    nn.GroupNorm,
    nn.LayerNorm,
    nn.InstanceNorm1d,
    nn.InstanceNorm2d,
)


def init_weights(module: nn.Module, std: float = 0.05, seed: int = 0) -> None:
    """Gaussian-initialize a network deterministically.

    Weights draw from N(0, std^2) in a fixed parameter order; biases start
    at zero.  Normalization scale parameters start at one (a zero-centered
    scale would erase the signal), and padding embedding rows stay zero.
    """
    generator = torch.Generator().manual_seed(seed)
    norm_params = set()
    with torch.no_grad():
        for m in module.modules():
            if isinstance(m, _NORM_TYPES):
                if m.weight is not None:
                    m.weight.fill_(1.0)
                    norm_params.add(id(m.weight))
                if m.bias is not None:
                    m.bias.zero_()
                    norm_params.add(id(m.bias))
        for name, param in module.named_parameters():
            if id(param) in norm_params:
                continue
            if "bias" in name.rsplit(".", 1)[-1]:
                param.zero_()
            else:
                sample = torch.randn(param.shape, generator=generator, dtype=torch.float32)
                param.copy_(sample.to(param.dtype) * std)
        for m in module.modules():
            if isinstance(m, nn.Embedding) and m.padding_idx is not None:
                m.weight[m.padding_idx].zero_()


@dataclass
class EpochStats:
    epoch: int
    d_loss: float
    g_loss: float
    huber: float
    kl: float


def write_history_csv(path: str | Path, history: Sequence[EpochStats]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["epoch", "d_loss", "g_loss", "huber", "kl"])
        for row in history:
            writer.writerow([row.epoch, row.d_loss, row.g_loss, row.huber, row.kl])


def _guard_finite(epoch: int, step: int, **losses: torch.Tensor) -> None:
    for name, value in losses.items():
        scalar = float(value.detach())
        if not math.isfinite(scalar):
            raise TrainingDiverged(
                f"{name} became {scalar} at epoch {epoch}, step {step}; "
                "lower the learning rate or loss weights"
            )


class _Meter:
    """Running means for one epoch's losses."""

    def __init__(self):
        self.sums = {"d_loss": 0.0, "g_loss": 0.0, "huber": 0.0, "kl": 0.0}
        self.count = 0

    def add(self, **values: float) -> None:
        for key, value in values.items():
            self.sums[key] += value
        self.count += 1

    def stats(self, epoch: int) -> EpochStats:
        n = max(self.count, 1)
        return EpochStats(epoch, *(self.sums[k] / n for k in ("d_loss", "g_loss", "huber", "kl")))


# --- palette model -------------------------------------------------------------


@dataclass
class TpnBundle:
    model: PaletteGenerator
    discriminator: PaletteDiscriminator
    vocab: Vocabulary
    config: TrainConfig


def save_tpn(bundle: TpnBundle, path: str | Path) -> None:
    save_checkpoint(
        path,
        "tpn",
        bundle.config.to_dict(),
        {
            "generator": bundle.model.state_dict(),
            "discriminator": bundle.discriminator.state_dict(),
        },
        vocab=bundle.vocab.to_json(),
    )


def load_tpn(path: str | Path) -> TpnBundle:
    ck = load_checkpoint(path, expected_kind="tpn")
    config = TrainConfig.from_dict(ck.config)
    vocab = Vocabulary.from_json(ck.vocab)
    model = PaletteGenerator(
        len(vocab),
        embed_dim=config.embed_dim,
        enc_hidden=config.enc_hidden,
        cond_dim=config.cond_dim,
        dec_hidden=config.dec_hidden,
    )
    model.load_state_dict(ck.state["generator"])
    disc = PaletteDiscriminator(cond_dim=config.cond_dim, hidden=config.dec_hidden)
    disc.load_state_dict(ck.state["discriminator"])
    model.eval()
    return TpnBundle(model=model, discriminator=disc, vocab=vocab, config=config)


def train_tpn(
    records: Sequence[PatRecord],
    config: TrainConfig,
    embeddings_path: str | Path | None = None,
    out_dir: str | Path | None = None,
    on_epoch: Callable[[EpochStats], None] | None = None,
) -> tuple[TpnBundle, list[EpochStats]]:
    """Train the text-to-palette model; returns the bundle and loss history."""
    if not records:
        raise InputError("no training records")
    vocab = Vocabulary.from_records(records)
    matrix = load_embeddings(vocab, embeddings_path, dim=config.embed_dim, oov_seed=config.seed)

    model = PaletteGenerator(
        len(vocab),
        embed_dim=config.embed_dim,
        enc_hidden=config.enc_hidden,
        cond_dim=config.cond_dim,
        dec_hidden=config.dec_hidden,
    )
    disc = PaletteDiscriminator(cond_dim=config.cond_dim, hidden=config.dec_hidden)
    init_weights(model, config.init_std, config.seed)
    init_weights(disc, config.init_std, config.seed + 1)
    with torch.no_grad():
        model.embedding.weight.copy_(torch.from_numpy(matrix))

    opt_g = torch.optim.Adam(model.parameters(), lr=config.lr, betas=(config.beta1, config.beta2))
    opt_d = torch.optim.Adam(disc.parameters(), lr=config.lr, betas=(config.beta1, config.beta2))
    noise = torch.Generator().manual_seed(config.seed)

    history: list[EpochStats] = []
    bundle = TpnBundle(model=model, discriminator=disc, vocab=vocab, config=config)
    out_dir = Path(out_dir) if out_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    step = 0
    for epoch in range(config.epochs):
        meter = _Meter()
        model.train()
        disc.train()
        for batch in batches(records, config.batch_size, vocab, matrix, seed=config.seed + epoch):
            ids = torch.from_numpy(batch.ids)
            mask = torch.from_numpy(batch.mask)
            real = torch.from_numpy(
                normalize_lab(batch.palettes.reshape(-1, 5, 3)).reshape(-1, 15)
            ).float()
            eps = torch.randn(ids.shape[0], ids.shape[1], config.cond_dim, generator=noise)

            out = model(ids, mask, eps=eps)
            fake = out.palettes.reshape(-1, 15)

            d_loss = tpn_discriminator_loss(
                disc(out.c_bar.detach(), real), disc(out.c_bar.detach(), fake.detach())
            )
            opt_d.zero_grad()
            d_loss.backward(retain_graph=False)
            opt_d.step()

            adv = generator_adversarial_loss(disc(out.c_bar, fake))
            rec = huber(fake, real, config.delta)
            kl = kl_gaussian(out.mu, out.sigma, mask)
            g_loss = adv + config.lambda_huber * rec + config.lambda_kl * kl
            opt_g.zero_grad()
            g_loss.backward()
            opt_g.step()

            _guard_finite(epoch, step, d_loss=d_loss, g_loss=g_loss)
            meter.add(
                d_loss=float(d_loss.detach()),
                g_loss=float(g_loss.detach()),
                huber=float(rec.detach()),
                kl=float(kl.detach()),
            )
            step += 1
        stats = meter.stats(epoch)
        history.append(stats)
        if on_epoch is not None:
            on_epoch(stats)
        if (
            out_dir is not None
            and config.checkpoint_interval > 0
            and (epoch + 1) % config.checkpoint_interval == 0
        ):
            save_tpn(bundle, out_dir / f"tpn-epoch{epoch + 1:05d}.pt")

    model.eval()
    if out_dir is not None:
        save_tpn(bundle, out_dir / "tpn.pt")
        write_history_csv(out_dir / "tpn-history.csv", history)
    return bundle, history


# --- colorization model ----------------------------------------------------------


@dataclass
class PcnDataset:
    """Preprocessed image folder: tensors plus cached palettes.

    Palette extraction runs exactly once per image at load time;
    ``extraction_count`` records how many extractions actually happened.
    """

    lightness: torch.Tensor  # (N, 1, S, S) in [-1, 1]
    chroma: torch.Tensor  # (N, 2, S, S) in [-1, 1]
    palettes: torch.Tensor  # (N, 15) in [-1, 1]
    paths: list[Path] = field(default_factory=list)
    extraction_count: int = 0

    def __len__(self) -> int:
        return self.lightness.shape[0]

    @classmethod
    def from_folder(cls, folder: str | Path, image_size: int) -> "PcnDataset":
        folder = Path(folder)
        if not folder.is_dir():
            raise InputError(f"{folder} is not a directory")
        paths = sorted(p for p in folder.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
        if not paths:
            raise InputError(f"no images found under {folder}")
        lightness, chroma, palettes = [], [], []
        extractions = 0
        for path in paths:
            with Image.open(path) as img:
                rgb = np.asarray(
                    img.convert("RGB").resize((image_size, image_size), Image.BILINEAR),
                    dtype=np.uint8,
                )
            lab = rgb_array_to_lab(rgb)
            palette = extract_dominant_palette(rgb)
            extractions += 1
            scaled = normalize_lab(lab)
            lightness.append(torch.from_numpy(scaled[..., 0]).float()[None])
            chroma.append(torch.from_numpy(scaled[..., 1:]).float().permute(2, 0, 1))
            palettes.append(
                torch.from_numpy(
                    normalize_lab(palette.to_vector().reshape(5, 3)).reshape(15)
                ).float()
            )
        return cls(
            lightness=torch.stack(lightness),
            chroma=torch.stack(chroma),
            palettes=torch.stack(palettes),
            paths=list(paths),
            extraction_count=extractions,
        )


@dataclass
class PcnBundle:
    model: ColorizationUNet
    discriminator: ImageDiscriminator
    config: TrainConfig


def save_pcn(bundle: PcnBundle, path: str | Path) -> None:
    save_checkpoint(
        path,
        "pcn",
        bundle.config.to_dict(),
        {
            "generator": bundle.model.state_dict(),
            "discriminator": bundle.discriminator.state_dict(),
        },
    )


def load_pcn(path: str | Path) -> PcnBundle:
    ck = load_checkpoint(path, expected_kind="pcn")
    config = TrainConfig.from_dict(ck.config)
    model = ColorizationUNet(base=config.base_width)
    model.load_state_dict(ck.state["generator"])
    disc = ImageDiscriminator(base=config.base_width, image_size=config.image_size)
    disc.load_state_dict(ck.state["discriminator"])
    model.eval()
    return PcnBundle(model=model, discriminator=disc, config=config)


def train_pcn(
    images: str | Path | PcnDataset,
    config: TrainConfig,
    out_dir: str | Path | None = None,
    on_epoch: Callable[[EpochStats], None] | None = None,
) -> tuple[PcnBundle, list[EpochStats]]:
    """Train the colorization model on an image folder (or preloaded dataset)."""
    dataset = (
        images
        if isinstance(images, PcnDataset)
        else PcnDataset.from_folder(images, config.image_size)
    )

    model = ColorizationUNet(base=config.base_width)
    disc = ImageDiscriminator(base=config.base_width, image_size=config.image_size)
    init_weights(model, config.init_std, config.seed)
    init_weights(disc, config.init_std, config.seed + 1)

    opt_g = torch.optim.Adam(model.parameters(), lr=config.lr, betas=(config.beta1, config.beta2))
    opt_d = torch.optim.Adam(disc.parameters(), lr=config.lr, betas=(config.beta1, config.beta2))

    history: list[EpochStats] = []
    bundle = PcnBundle(model=model, discriminator=disc, config=config)
    out_dir = Path(out_dir) if out_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    order_rng = np.random.default_rng(config.seed)
    step = 0
    for epoch in range(config.epochs):
        meter = _Meter()
        model.train()
        disc.train()
        order = order_rng.permutation(len(dataset))
        for start in range(0, len(dataset), config.batch_size):
            idx = torch.from_numpy(order[start : start + config.batch_size].copy())
            light = dataset.lightness[idx]
            real_ab = dataset.chroma[idx]
            palettes = dataset.palettes[idx]

            fake_ab = model(light, palettes)
            real_img = torch.cat([light, real_ab], dim=1)
            fake_img = torch.cat([light, fake_ab], dim=1)

            d_loss = pcn_discriminator_loss(
                disc(palettes, real_img), disc(palettes, fake_img.detach())
            )
            opt_d.zero_grad()
            d_loss.backward()
            opt_d.step()

            adv = generator_adversarial_loss(disc(palettes, fake_img))
            rec = huber(fake_ab, real_ab, config.delta)
            g_loss = adv + config.lambda_huber * rec
            opt_g.zero_grad()
            g_loss.backward()
            opt_g.step()

            _guard_finite(epoch, step, d_loss=d_loss, g_loss=g_loss)
            meter.add(
                d_loss=float(d_loss.detach()),
                g_loss=float(g_loss.detach()),
                huber=float(rec.detach()),
                kl=0.0,
            )
            step += 1
        stats = meter.stats(epoch)
        history.append(stats)
        if on_epoch is not None:
            on_epoch(stats)
        if (
            out_dir is not None
            and config.checkpoint_interval > 0
            and (epoch + 1) % config.checkpoint_interval == 0
        ):
            save_pcn(bundle, out_dir / f"pcn-epoch{epoch + 1:05d}.pt")

    model.eval()
    if out_dir is not None:
        save_pcn(bundle, out_dir / "pcn.pt")
        write_history_csv(out_dir / "pcn-history.csv", history)
    return bundle, history
