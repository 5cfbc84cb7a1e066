"""Palette-conditioned colorization network.

A U-Net predicts the two chroma channels of a Lab image from its lightness
channel, steered by a five-color palette that enters through a small stack
of 1x1 convolutions whose features are broadcast-added at three depths.
The paired discriminator sees the palette tiled across every pixel.
"""

from __future__ import annotations

import math

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image
from torch import nn

from .colorspace import (
    Palette,
    denormalize_lab,
    lab_array_to_rgb,
    normalize_lab,
    rgb_array_to_lab,
)
from .errors import InputError
from .losses import discriminator_adversarial_loss, generator_adversarial_loss, huber

PALETTE_DIM = 15


class ConditionBranch(nn.Module):
    """Four 1x1 conv-relu stages expanding the palette vector.

    Stage outputs 1, 2 and 4 are consumed by the U-Net at its conv9, conv8
    and conv4 blocks respectively.
    """

    def __init__(self, base: int = 64):
        super().__init__()
        self.stage1 = nn.Conv2d(PALETTE_DIM, base, kernel_size=1)
        self.stage2 = nn.Conv2d(base, base, kernel_size=1)
        self.stage3 = nn.Conv2d(base, 2 * base, kernel_size=1)
        self.stage4 = nn.Conv2d(2 * base, 8 * base, kernel_size=1)

    def forward(self, palettes: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        x = palettes.reshape(palettes.shape[0], PALETTE_DIM, 1, 1)
        f1 = torch.relu(self.stage1(x))
        f2 = torch.relu(self.stage2(f1))
        f3 = torch.relu(self.stage3(f2))
        f4 = torch.relu(self.stage4(f3))
        return f1, f2, f4  # feed conv9, conv8, conv4


def _down(in_ch: int, out_ch: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, kernel_size=4, stride=2, padding=1),
        nn.BatchNorm2d(out_ch),
        nn.LeakyReLU(0.2),
    )


class _UpBlock(nn.Module):
    """Transposed-conv upsample, skip concatenation, then a fusing conv."""

    def __init__(self, in_ch: int, skip_ch: int, out_ch: int):
        super().__init__()
        self.up = nn.ConvTranspose2d(in_ch, out_ch, kernel_size=4, stride=2, padding=1)
        self.fuse = nn.Sequential(
            nn.Conv2d(out_ch + skip_ch, out_ch, kernel_size=3, padding=1),
            nn.BatchNorm2d(out_ch),
            nn.ReLU(),
        )

    def forward(self, x: torch.Tensor, skip: torch.Tensor) -> torch.Tensor:
        return self.fuse(torch.cat([self.up(x), skip], dim=1))


class ColorizationUNet(nn.Module):
    """Ten conv blocks: four encoding, one bottleneck, three decoding, two heads.

    Input lightness is (B, 1, H, W) with H and W multiples of 8; output is
    (B, 2, H, W) chroma in [-1, 1].  The lightness channel itself is never
    modified — callers recombine it with the predicted chroma.
    """

    def __init__(self, base: int = 64):
        super().__init__()
        self.condition = ConditionBranch(base)
        self.conv1 = nn.Sequential(nn.Conv2d(1, base, kernel_size=3, padding=1), nn.LeakyReLU(0.2))
        self.conv2 = _down(base, 2 * base)
        self.conv3 = _down(2 * base, 4 * base)
        self.conv4 = _down(4 * base, 8 * base)
        self.conv5 = nn.Sequential(
            nn.Conv2d(8 * base, 8 * base, kernel_size=3, padding=1),
            nn.BatchNorm2d(8 * base),
            nn.ReLU(),
        )
        self.conv6 = _UpBlock(8 * base, 4 * base, 4 * base)
        self.conv7 = _UpBlock(4 * base, 2 * base, 2 * base)
        self.conv8 = _UpBlock(2 * base, base, base)
        self.conv9 = nn.Sequential(
            nn.Conv2d(base, base, kernel_size=3, padding=1),
            nn.BatchNorm2d(base),
            nn.ReLU(),
        )
        self.conv10 = nn.Conv2d(base, 2, kernel_size=3, padding=1)

    def forward(self, lightness: torch.Tensor, palettes: torch.Tensor) -> torch.Tensor:
        if lightness.shape[-1] % 8 or lightness.shape[-2] % 8:
            raise InputError(f"spatial dims must be multiples of 8, got {tuple(lightness.shape[-2:])}")
        f9, f8, f4 = self.condition(palettes)
        e1 = self.conv1(lightness)
        e2 = self.conv2(e1)
        e3 = self.conv3(e2)
        e4 = self.conv4(e3) + f4
        mid = self.conv5(e4)
        d6 = self.conv6(mid, e3)
        d7 = self.conv7(d6, e2)
        d8 = self.conv8(d7, e1) + f8
        d9 = self.conv9(d8) + f9
        return torch.tanh(self.conv10(d9))


class ImageDiscriminator(nn.Module):
    """Strided-conv classifier over (palette-tiled, Lab image) stacks."""

    def __init__(self, base: int = 64, image_size: int = 64, image_channels: int = 3):
        super().__init__()
        if image_size % 2:
            raise ValueError("image_size must be even")
        downs = max(1, int(math.log2(image_size)) - 2)
        layers: list[nn.Module] = []
        in_ch = image_channels + PALETTE_DIM
        width = base
        for i in range(downs):
            layers.append(nn.Conv2d(in_ch, width, kernel_size=4, stride=2, padding=1))
            if i > 0:  # first layer sees raw pixels, no normalization
                layers.append(nn.BatchNorm2d(width))
            layers.append(nn.LeakyReLU(0.2))
            in_ch = width
            width = min(width * 2, 8 * base)
        self.features = nn.Sequential(*layers)
        spatial = image_size // (2**downs)
        self.classify = nn.Linear(in_ch * spatial * spatial, 1)
        self.image_size = image_size

    def forward(self, palettes: torch.Tensor, images: torch.Tensor) -> torch.Tensor:
        b, _, h, w = images.shape
        tiled = palettes.reshape(b, PALETTE_DIM, 1, 1).expand(b, PALETTE_DIM, h, w)
        x = self.features(torch.cat([images, tiled], dim=1))
        return torch.sigmoid(self.classify(x.flatten(1))).squeeze(-1)


def pcn_generator_loss(
    fake_scores: torch.Tensor,
    fake_ab: torch.Tensor,
    real_ab: torch.Tensor,
    lambda_huber: float = 10.0,
    delta: float = 1.0,
) -> torch.Tensor:
    return generator_adversarial_loss(fake_scores) + lambda_huber * huber(
        fake_ab, real_ab, delta
    )


def pcn_discriminator_loss(
    real_scores: torch.Tensor, fake_scores: torch.Tensor
) -> torch.Tensor:
    return discriminator_adversarial_loss(real_scores, fake_scores)


# --- full-resolution inference ------------------------------------------------


def image_to_lab(image: Image.Image) -> np.ndarray:
    """PIL image to an (H, W, 3) float64 Lab array."""
    return rgb_array_to_lab(np.asarray(image.convert("RGB"), dtype=np.uint8))


def normalized_palette_tensor(palette: Palette) -> torch.Tensor:
    """Palette as a (1, 15) network-scale tensor."""
    scaled = normalize_lab(palette.to_vector().reshape(Palette.SIZE, 3))
    return torch.from_numpy(scaled.reshape(1, PALETTE_DIM).astype(np.float32))


def colorize_full(
    model: ColorizationUNet,
    image: Image.Image,
    palette: Palette,
    working_size: int = 64,
) -> Image.Image:
    """Colorize an image of any size, preserving its lightness exactly.

    The lightness channel is resized to the network's training resolution,
    chroma is predicted there, upsampled back, and recombined with the
    *original* full-resolution lightness.
    """
    if image.width < 1 or image.height < 1:
        raise InputError("image must have at least one pixel")
    lab = image_to_lab(image)
    full_l = lab[..., 0]

    l_tensor = torch.from_numpy((full_l / 50.0 - 1.0).astype(np.float32))[None, None]
    l_small = F.interpolate(
        l_tensor, size=(working_size, working_size), mode="bilinear", align_corners=False
    )
    model.eval()
    with torch.no_grad():
        ab_small = model(l_small, normalized_palette_tensor(palette))
        ab_full = F.interpolate(
            ab_small, size=(image.height, image.width), mode="bilinear", align_corners=False
        )
    ab = ab_full[0].permute(1, 2, 0).numpy().astype(np.float64) * 110.0

    out = np.empty((image.height, image.width, 3), dtype=np.float64)
    out[..., 0] = full_l
    out[..., 1:] = ab
    return Image.fromarray(lab_array_to_rgb(out), mode="RGB")
