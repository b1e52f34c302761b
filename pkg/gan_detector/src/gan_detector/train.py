"""Least-squares GAN training for the channel-state estimator.

The generator learns to reconstruct true channel state from noisy received
pilots; the discriminator learns to separate real channel matrices from
generated ones. Both optimize mean-square errors against their 1/0 targets
(the least-squares objective), and the generator additionally minimizes the
reconstruction error to the true channel. Only genuine records (label 0)
enter training; labelled attacks are reserved for evaluation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .dataset import CsidDataset, LABEL_GENUINE, load_csid, to_channels_first
from .models import GanConfig, build_discriminator, build_generator


@dataclass
class TrainingLog:
    g_loss: list = field(default_factory=list)
    d_loss: list = field(default_factory=list)
    val_reconstruction: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {"g_loss": self.g_loss, "d_loss": self.d_loss,
             "val_reconstruction": self.val_reconstruction},
            indent=2,
        )


@dataclass
class TrainedModels:
    generator: nn.Module
    discriminator: nn.Module
    config: GanConfig
    log: TrainingLog


def _tensors(ds: CsidDataset, device="cpu"):
    y = torch.from_numpy(to_channels_first(ds.y)).to(device)
    h_rep = torch.from_numpy(to_channels_first(ds.h_reported)).to(device)
    h_true = torch.from_numpy(to_channels_first(ds.h_true)).to(device)
    return y, h_rep, h_true


def train(dataset_path, cfg: GanConfig) -> TrainedModels:
    """Alternating least-squares-GAN updates; deterministic under cfg.seed."""
    ds = load_csid(dataset_path)
    if len(ds) == 0:
        raise ValueError(f"dataset {dataset_path} is empty")
    if (ds.n_ant, ds.n_sub, ds.n_pilot) != (cfg.n_ant, cfg.n_sub, cfg.n_pilot):
        raise ValueError(
            f"dataset dims {(ds.n_ant, ds.n_sub, ds.n_pilot)} do not match "
            f"config {(cfg.n_ant, cfg.n_sub, cfg.n_pilot)}"
        )
    genuine = ds.subset(ds.labels == LABEL_GENUINE)
    if len(genuine) == 0:
        raise ValueError("dataset contains no genuine records to train on")

    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    n_val = max(1, int(len(genuine) * cfg.val_fraction))
    order = rng.permutation(len(genuine))
    val = genuine.subset(order[:n_val])
    trn = genuine.subset(order[n_val:])

    g = build_generator(cfg)
    d = build_discriminator(cfg)
    opt_g = torch.optim.Adam(g.parameters(), lr=cfg.g_lr, betas=(0.5, 0.999))
    opt_d = torch.optim.Adam(d.parameters(), lr=cfg.d_lr, betas=(0.5, 0.999))
    mse = nn.MSELoss()

    y_tr, _, h_tr = _tensors(trn)
    y_val, _, h_val = _tensors(val)
    log = TrainingLog()
    log.val_reconstruction.append(_val_reconstruction(g, y_val, h_val))

    n = y_tr.shape[0]
    for _ in range(cfg.epochs):
        perm = torch.from_numpy(rng.permutation(n))
        g_losses, d_losses = [], []
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            if idx.numel() < 2:
                continue  # batch norm needs at least two samples
            y_b, h_b = y_tr[idx], h_tr[idx]

            # discriminator: real -> 1, generated -> 0
            opt_d.zero_grad()
            with torch.no_grad():
                fake = g(y_b)
            loss_d = mse(d(h_b), torch.ones(len(idx))) + \
                mse(d(fake), torch.zeros(len(idx)))
            loss_d.backward()
            opt_d.step()

            # generator: fool the discriminator and reconstruct the channel
            opt_g.zero_grad()
            fake = g(y_b)
            loss_g = cfg.adversarial_weight * mse(d(fake), torch.ones(len(idx))) \
                + mse(fake, h_b)
            loss_g.backward()
            opt_g.step()

            g_losses.append(loss_g.detach().item())
            d_losses.append(loss_d.detach().item())
        log.g_loss.append(float(np.mean(g_losses)))
        log.d_loss.append(float(np.mean(d_losses)))
        log.val_reconstruction.append(_val_reconstruction(g, y_val, h_val))
    return TrainedModels(generator=g, discriminator=d, config=cfg, log=log)


def _val_reconstruction(g: nn.Module, y: torch.Tensor, h: torch.Tensor) -> float:
    g.eval()
    with torch.no_grad():
        err = float(nn.functional.mse_loss(g(y), h))
    g.train()
    return err


def save_checkpoint(models: TrainedModels, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.save(models.generator.state_dict(), out / "generator.pt")
    torch.save(models.discriminator.state_dict(), out / "discriminator.pt")
    (out / "training_log.json").write_text(models.log.to_json() + "\n")
    (out / "config.json").write_text(
        json.dumps(models.config.__dict__, indent=2) + "\n"
    )


def load_checkpoint(out_dir) -> TrainedModels:
    out = Path(out_dir)
    cfg = GanConfig(**json.loads((out / "config.json").read_text()))
    g = build_generator(cfg)
    g.load_state_dict(torch.load(out / "generator.pt", weights_only=True))
    d = build_discriminator(cfg)
    d.load_state_dict(torch.load(out / "discriminator.pt", weights_only=True))
    log_doc = json.loads((out / "training_log.json").read_text())
    log = TrainingLog(**log_doc)
    return TrainedModels(generator=g, discriminator=d, config=cfg, log=log)
