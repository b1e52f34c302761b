"""Adversarial attack vectors on reported channel state and pilot signals.

Three vectors are implemented: per-entry phase spoofing of CSI reports,
pilot-aligned contamination of the received signal, and wholesale report
forgery. A catalog documents the six research directions the attack surface
covers; the three that act below the MAC layer are the ones simulated here.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_nonnegative, check_count
from .channel import ChannelState, steering_vector
from .csi import CsiReport, ReceivedSignal

CSI_PHASE_SPOOF = "csi_phase_spoof"
PILOT_CONTAMINATION = "pilot_contamination"
FAKE_REPORT = "fake_report"

REPLAY_OLD = "replay_old"
RANDOM_PHASE = "random_phase"
POSITION_SPOOF = "position_spoof_angle"


@dataclass(frozen=True)
class AttackSchedule:
    """Periodic activation window: active when
    ``slot >= start_slot`` and ``(slot - start_slot) % period < duration``."""

    start_slot: int = 0
    period: int = 1
    duration: int = 1

    def __post_init__(self):
        check_count(self.period, "period")
        check_nonnegative(self.start_slot, "start_slot")
        check_nonnegative(self.duration, "duration")


@dataclass(frozen=True)
class AttackConfig:
    """One attack vector plus its magnitude knob and activation schedule.

    `magnitude` is vector-specific: max phase offset in radians for
    `csi_phase_spoof`, attacker power (linear) for `pilot_contamination`,
    forged-report rate for `fake_report`.
    """

    vector: str
    magnitude: float
    schedule: AttackSchedule = field(default_factory=AttackSchedule)
    rng_seed: int = 0

    def __post_init__(self):
        if self.vector not in (CSI_PHASE_SPOOF, PILOT_CONTAMINATION, FAKE_REPORT):
            raise ValueError(f"unknown attack vector {self.vector!r}")
        check_nonnegative(self.magnitude, "magnitude")


@dataclass(frozen=True)
class AttackCatalogEntry:
    direction_id: int
    name: str
    goal: str
    implementation_notes: str
    implemented: bool


ATTACK_CATALOG: tuple[AttackCatalogEntry, ...] = (
    AttackCatalogEntry(
        1, "Adaptive modulation and coding",
        "Force mismatched MCS choices via poisoned link-quality feedback",
        "Catalogued only: requires an MCS/feedback loop above this layer",
        False,
    ),
    AttackCatalogEntry(
        2, "Channel coding",
        "Degrade decoder performance through crafted noise statistics",
        "Catalogued only: bit/symbol-level decoding is out of scope",
        False,
    ),
    AttackCatalogEntry(
        3, "Beam formation",
        "Steer the selected beam away from the user",
        "Implemented: per-entry phase spoofing of CSI reports "
        "(spoof_csi_phase)",
        True,
    ),
    AttackCatalogEntry(
        4, "Channel condition assessment",
        "Bias the base-station channel estimate",
        "Implemented: pilot-aligned contamination of received pilots "
        "(contaminate_pilot)",
        True,
    ),
    AttackCatalogEntry(
        5, "Signal strength",
        "Reduce delivered SNR/rate via broadcast modulated radio signal and "
        "position spoofing",
        "Implemented: report forgery incl. steering-vector forgery at a "
        "false angle (forge_report)",
        True,
    ),
    AttackCatalogEntry(
        6, "Planning and resource allocation",
        "Mislead the scheduler through data falsification and fake requests",
        "Catalogued only: scheduler modelling is out of scope; fake requests "
        "reduce to forged reports here",
        False,
    ),
)


def spoof_csi_phase(
    report: CsiReport, delta_max: float, rng: np.random.Generator
) -> CsiReport:
    """Rotate every reported entry by an independent uniform phase offset.

    Offsets are Uniform(-delta_max, delta_max); magnitudes are untouched.
    The returned report is marked tampered and its phase vector recomputed.
    """
    check_nonnegative(delta_max, "delta_max")
    deltas = rng.uniform(-delta_max, delta_max, size=report.h_hat.h.shape)
    h = report.h_hat.h * np.exp(1j * deltas)
    return CsiReport(
        h_hat=ChannelState(h=h, block_id=report.h_hat.block_id),
        source_id=report.source_id,
        timestamp=report.timestamp,
        tampered=True,
    )


def contaminate_pilot(
    sig: ReceivedSignal,
    g_attacker: ChannelState,
    power: float,
    attacker_symbols: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
) -> ReceivedSignal:
    """Superpose an attacker transmission onto the received pilots.

    ``y'[:, t] = y[:, t] + sqrt(power) * g[:, 0] * s_a[t]``. When the attacker
    replays the pilot itself (the default), the least-squares estimate is
    biased by exactly ``sqrt(power) * g``.
    """
    check_nonnegative(power, "power")
    if g_attacker.n_ant != sig.n_ant:
        raise ValueError(
            f"attacker channel n_ant {g_attacker.n_ant} != signal n_ant {sig.n_ant}"
        )
    s_a = sig.pilot if attacker_symbols is None else np.asarray(
        attacker_symbols, dtype=np.complex128
    ).reshape(-1)
    if s_a.size != sig.n_pilot:
        raise ValueError(
            f"attacker symbols length {s_a.size} != n_pilot {sig.n_pilot}"
        )
    y = sig.y + np.sqrt(power) * np.outer(g_attacker.h[:, 0], s_a)
    return ReceivedSignal(y=y, pilot=sig.pilot, noise_var=sig.noise_var)


def forge_report(
    template: CsiReport,
    strategy: str,
    rng: np.random.Generator,
    angle: float = 0.0,
) -> CsiReport:
    """Fabricate a syntactically valid report from a template.

    Strategies: `replay_old` returns a stale copy; `random_phase` keeps the
    template magnitudes under i.i.d. random phases; `position_spoof_angle`
    reports the steering vector of `angle` scaled to the template norm.
    """
    h_t = template.h_hat.h
    if strategy == REPLAY_OLD:
        h = h_t.copy()
    elif strategy == RANDOM_PHASE:
        phases = rng.uniform(-np.pi, np.pi, size=h_t.shape)
        h = np.abs(h_t) * np.exp(1j * phases)
    elif strategy == POSITION_SPOOF:
        v = steering_vector(angle, h_t.shape[0])
        scale = np.linalg.norm(h_t[:, 0])
        h = np.tile((v * scale)[:, None], (1, h_t.shape[1]))
    else:
        raise ValueError(f"unknown forgery strategy {strategy!r}")
    return CsiReport(
        h_hat=ChannelState(h=h, block_id=template.h_hat.block_id),
        source_id=template.source_id,
        timestamp=template.timestamp,
        tampered=True,
    )


def apply_schedule(cfg: AttackConfig, slot: int) -> bool:
    """True iff the attack is active at `slot` per its periodic schedule."""
    s = cfg.schedule
    if slot < s.start_slot:
        return False
    return (slot - s.start_slot) % s.period < s.duration
