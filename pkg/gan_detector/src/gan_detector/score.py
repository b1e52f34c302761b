"""Detection scoring: reconstruction disagreement between a reported channel
matrix and the generator's estimate from the raw received signal.

A report whose channel state was tampered with disagrees with what the
generator reconstructs from the physical pilots, so its mean-square error is
high; genuine reports score low. The alarm threshold is the (1 - FPR)
quantile of scores on held-out genuine records.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .dataset import CsidDataset, LABEL_GENUINE, to_channels_first


@dataclass(frozen=True)
class DetectionScore:
    score: float
    threshold: float
    decision: bool = None

    def __post_init__(self):
        object.__setattr__(self, "decision", bool(self.score > self.threshold))


def reconstruction_scores(generator: nn.Module, ds: CsidDataset,
                          batch_size: int = 256) -> np.ndarray:
    """Per-record MSE between the reported channel and G's reconstruction."""
    y = torch.from_numpy(to_channels_first(ds.y))
    h_rep = torch.from_numpy(to_channels_first(ds.h_reported))
    generator.eval()
    out = []
    with torch.no_grad():
        for start in range(0, len(ds), batch_size):
            yb = y[start:start + batch_size]
            hb = h_rep[start:start + batch_size]
            err = ((generator(yb) - hb) ** 2).mean(dim=(1, 2, 3))
            out.append(err.numpy())
    return np.concatenate(out) if out else np.empty(0)


def score_report(generator: nn.Module, y: np.ndarray, h_reported: np.ndarray,
                 threshold: float) -> DetectionScore:
    """Score one report; `y` and `h_reported` are [*, *, 2] re/im tensors."""
    ds = CsidDataset(
        labels=np.zeros(1, dtype=np.uint8),
        y=np.asarray(y, dtype=np.float32)[None],
        h_reported=np.asarray(h_reported, dtype=np.float32)[None],
        h_true=np.asarray(h_reported, dtype=np.float32)[None],
    )
    score = float(reconstruction_scores(generator, ds)[0])
    return DetectionScore(score=score, threshold=threshold)


def calibrate_threshold(generator: nn.Module, genuine: CsidDataset,
                        target_fpr: float = 0.1) -> float:
    """(1 - FPR) quantile of genuine-record scores."""
    if not 0.0 < target_fpr < 1.0:
        raise ValueError(f"target_fpr must lie in (0, 1), got {target_fpr}")
    scores = np.sort(reconstruction_scores(generator, genuine))
    j = int(np.ceil(scores.size * (1.0 - target_fpr)))
    return float(scores[min(max(j, 1), scores.size) - 1])


def evaluate(generator: nn.Module, ds: CsidDataset,
             target_fpr: float = 0.1, calibration_fraction: float = 0.5,
             seed: int = 0) -> dict:
    """Split genuine records into calibration and hold-out halves, threshold
    at the target FPR, and measure detection per attack label."""
    rng = np.random.default_rng(seed)
    genuine_idx = np.flatnonzero(ds.labels == LABEL_GENUINE)
    if genuine_idx.size < 4:
        raise ValueError("need at least 4 genuine records to evaluate")
    rng.shuffle(genuine_idx)
    n_cal = int(genuine_idx.size * calibration_fraction)
    cal = ds.subset(genuine_idx[:n_cal])
    holdout = ds.subset(genuine_idx[n_cal:])
    threshold = calibrate_threshold(generator, cal, target_fpr)

    result = {
        "threshold": threshold,
        "target_fpr": target_fpr,
        "holdout_fpr": float(
            np.mean(reconstruction_scores(generator, holdout) > threshold)
        ),
        "detection": {},
        "auc": {},
    }
    genuine_scores = reconstruction_scores(generator, holdout)
    for label in sorted(set(ds.labels) - {LABEL_GENUINE}):
        attacked = ds.subset(ds.labels == label)
        scores = reconstruction_scores(generator, attacked)
        result["detection"][int(label)] = float(np.mean(scores > threshold))
        result["auc"][int(label)] = _auc(genuine_scores, scores)
    return result


def _auc(negative: np.ndarray, positive: np.ndarray) -> float:
    """Rank-based area under the ROC curve."""
    all_scores = np.concatenate([negative, positive])
    ranks = all_scores.argsort().argsort().astype(float) + 1
    pos_ranks = ranks[negative.size:]
    n_pos, n_neg = positive.size, negative.size
    u = pos_ranks.sum() - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))
