"""Codebooks, beam selection and link metrics.

A codeword is either a unit-norm weight vector for a phased array or a
unit-modulus phase profile for a reconfigurable surface. Selection picks the
codeword maximizing received beam power against *reported* channel state;
the realized SNR is then evaluated on the *true* channel, which is what an
adversary tampering with reports degrades.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_count, check_nonnegative, check_positive
from .channel import ChannelState, steering_vector

ARRAY = "array"
RIS = "ris"


@dataclass(frozen=True)
class Codeword:
    """Beamforming weights (`array` kind, unit norm) or phase profile (`ris`
    kind, unit-modulus entries)."""

    weights: np.ndarray
    kind: str = ARRAY

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.complex128).reshape(-1)
        if w.size < 1:
            raise ValueError("codeword must have at least one element")
        if self.kind == ARRAY:
            n = np.linalg.norm(w)
            if abs(n - 1.0) > 1e-12:
                raise ValueError(f"array codeword must have unit norm, got {n}")
        elif self.kind == RIS:
            mods = np.abs(w)
            if np.max(np.abs(mods - 1.0)) > 1e-12:
                raise ValueError("ris codeword entries must have unit modulus")
        else:
            raise ValueError(f"unknown codeword kind {self.kind!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_elem(self) -> int:
        return self.weights.size

    def effective_weights(self) -> np.ndarray:
        """Weights used in inner-product gains; RIS profiles are scaled by
        ``1/sqrt(n_elem)`` so both kinds compare on the same footing."""
        if self.kind == RIS:
            return self.weights / np.sqrt(self.n_elem)
        return self.weights


@dataclass(frozen=True)
class Codebook:
    """Ordered codeword list with the beam angle each codeword points at."""

    codewords: tuple[Codeword, ...]
    beam_angles: np.ndarray

    def __post_init__(self):
        cws = tuple(self.codewords)
        if not cws:
            raise ValueError("codebook must be non-empty")
        kind, dim = cws[0].kind, cws[0].n_elem
        for cw in cws:
            if cw.kind != kind or cw.n_elem != dim:
                raise ValueError("all codewords must share kind and dimension")
        angles = np.asarray(self.beam_angles, dtype=float).reshape(-1)
        if angles.size != len(cws):
            raise ValueError("beam_angles must match the number of codewords")
        angles.setflags(write=False)
        object.__setattr__(self, "codewords", cws)
        object.__setattr__(self, "beam_angles", angles)

    def __len__(self) -> int:
        return len(self.codewords)

    def weight_matrix(self) -> np.ndarray:
        """Effective weights stacked as columns, shape [n_elem, n_beams]."""
        return np.stack([cw.effective_weights() for cw in self.codewords], axis=1)


@dataclass(frozen=True)
class LinkBudget:
    """Transmit power (dB over unit noise), fixed noise power, antenna gain."""

    tx_power_db: float = 10.0
    noise_power: float = 1.0
    antenna_gain_dbi: float = 2.0

    def __post_init__(self):
        check_positive(self.noise_power, "noise_power")


def dft_codebook(n_ant: int, n_beams: int, kind: str = ARRAY) -> Codebook:
    """Uniform-in-sine beam grid: ``sin(theta_b)`` spaced evenly over [-1, 1).

    With ``n_beams == n_ant`` the array codewords form an orthonormal (DFT)
    basis. `kind` = ``"ris"`` emits the same phase ramps as unit-modulus
    profiles instead of unit-norm weight vectors.
    """
    n_ant = check_count(n_ant, "n_ant")
    n_beams = check_count(n_beams, "n_beams")
    sines = -1.0 + 2.0 * np.arange(n_beams) / n_beams
    angles = np.arcsin(sines)
    codewords = []
    for theta in angles:
        v = steering_vector(theta, n_ant)
        if kind == RIS:
            v = v * np.sqrt(n_ant)  # unit-modulus entries
        codewords.append(Codeword(weights=v, kind=kind))
    return Codebook(codewords=tuple(codewords), beam_angles=angles)


def select_beam(cb: Codebook, h_reported: ChannelState) -> tuple[int, float]:
    """Exhaustive search for ``argmax_b |w_b^H h|^2`` on the first subcarrier.

    Ties break to the lowest index. Returns ``(index, gain)`` where the gain
    is evaluated on the reported channel handed in (spoofed reports therefore
    steer the selection).
    """
    W = cb.weight_matrix()
    if W.shape[0] != h_reported.n_ant:
        raise ValueError(
            f"codebook dimension {W.shape[0]} != channel n_ant {h_reported.n_ant}"
        )
    gains = np.abs(W.conj().T @ h_reported.h[:, 0]) ** 2
    idx = int(np.argmax(gains))
    return idx, float(gains[idx])


def beam_gains(cb: Codebook, h: ChannelState) -> np.ndarray:
    """Per-beam powers ``|w_b^H h|^2`` on the first subcarrier."""
    W = cb.weight_matrix()
    if W.shape[0] != h.n_ant:
        raise ValueError(f"codebook dimension {W.shape[0]} != channel n_ant {h.n_ant}")
    return np.abs(W.conj().T @ h.h[:, 0]) ** 2


def realized_snr(h_true: ChannelState, cw: Codeword, lb: LinkBudget) -> float:
    """Linear SNR delivered by `cw` on the true channel.

    ``SNR = 10^(tx_power_db/10) * |w^H h_true|^2 / noise_power``. The codeword
    may have been selected from tampered reports; the SNR always uses the
    true channel.
    """
    w = cw.effective_weights()
    if w.size != h_true.n_ant:
        raise ValueError(f"codeword dimension {w.size} != channel n_ant {h_true.n_ant}")
    gain = np.abs(np.vdot(w, h_true.h[:, 0])) ** 2
    return 10.0 ** (lb.tx_power_db / 10.0) * gain / lb.noise_power


def achievable_rate(snr: float) -> float:
    """Shannon rate ``log2(1 + snr)`` in bits/s/Hz."""
    snr = check_nonnegative(snr, "snr")
    return float(np.log2(1.0 + snr))
