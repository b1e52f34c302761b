"""Generator and discriminator architectures.

The generator is a convolutional autoencoder mapping received-pilot images
``Y [2, n_ant, n_pilot]`` to channel-state images ``H' [2, n_ant, n_sub]``:
four encoding blocks (strided convolution, batch norm, ReLU) halve the
spatial size each, four decoding blocks (transposed convolution, batch norm,
ReLU) restore it, and a 1x1 linear projection emits the signed re/im planes.

The discriminator applies four blocks of convolution, batch norm, leaky ReLU
and dropout to a channel-state image and ends in a single linear unit; with
the least-squares objective its mean-square error against the real/fake
targets is the training loss.
"""
from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

ENCODE_BLOCKS = 4
DECODE_BLOCKS = 4
DISC_BLOCKS = 4


class GanConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GanConfig:
    n_ant: int = 16
    n_sub: int = 16
    n_pilot: int = 16
    base_channels: int = 16     # doubled per encode block
    g_lr: float = 2e-4
    d_lr: float = 2e-4
    adversarial_weight: float = 0.1
    batch_size: int = 64
    epochs: int = 20
    dropout: float = 0.3
    val_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        # four stride-2 stages need each input side divisible by 2^4
        side_min = 2 ** ENCODE_BLOCKS
        for name in ("n_ant", "n_sub", "n_pilot"):
            v = getattr(self, name)
            if v < side_min or v % side_min:
                raise GanConfigError(
                    f"{name}={v} unsupported: four downsampling stages need "
                    f"a multiple of {side_min} (minimum {side_min})"
                )


def build_generator(cfg: GanConfig) -> nn.Module:
    return Generator(cfg)


def build_discriminator(cfg: GanConfig) -> nn.Module:
    return Discriminator(cfg)


class Generator(nn.Module):
    def __init__(self, cfg: GanConfig):
        super().__init__()
        self.out_size = (cfg.n_ant, cfg.n_sub)
        c = cfg.base_channels
        enc, ch_in = [], 2
        for i in range(ENCODE_BLOCKS):
            ch_out = c * 2**i
            enc.append(nn.Sequential(
                nn.Conv2d(ch_in, ch_out, kernel_size=4, stride=2, padding=1),
                nn.BatchNorm2d(ch_out),
                nn.ReLU(inplace=True),
            ))
            ch_in = ch_out
        self.encoder = nn.Sequential(*enc)
        dec = []
        for i in reversed(range(ENCODE_BLOCKS)):
            ch_out = max(c * 2 ** (i - 1), c) if i > 0 else c
            dec.append(nn.Sequential(
                nn.ConvTranspose2d(ch_in, ch_out, kernel_size=4, stride=2,
                                   padding=1),
                nn.BatchNorm2d(ch_out),
                nn.ReLU(inplace=True),
            ))
            ch_in = ch_out
        self.decoder = nn.Sequential(*dec)
        self.project = nn.Conv2d(ch_in, 2, kernel_size=1)

    def forward(self, y: torch.Tensor) -> torch.Tensor:
        z = self.decoder(self.encoder(y))
        if z.shape[-2:] != self.out_size:
            # pilot and subcarrier grids may differ in width
            z = nn.functional.interpolate(z, size=self.out_size,
                                          mode="nearest")
        return self.project(z)


class Discriminator(nn.Module):
    def __init__(self, cfg: GanConfig):
        super().__init__()
        c = cfg.base_channels
        blocks, ch_in = [], 2
        for i in range(DISC_BLOCKS):
            ch_out = c * 2**i
            blocks.append(nn.Sequential(
                nn.Conv2d(ch_in, ch_out, kernel_size=4, stride=2, padding=1),
                nn.BatchNorm2d(ch_out),
                nn.LeakyReLU(0.2, inplace=True),
                nn.Dropout2d(cfg.dropout),
            ))
            ch_in = ch_out
        self.features = nn.Sequential(*blocks)
        side_ant = cfg.n_ant // 2**DISC_BLOCKS
        side_sub = cfg.n_sub // 2**DISC_BLOCKS
        self.output = nn.Linear(ch_in * side_ant * side_sub, 1)

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        z = self.features(h)
        return self.output(z.flatten(1)).squeeze(-1)
