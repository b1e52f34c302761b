"""Discrete-time replay of vehicles uploading through a beamformed link.

Vehicles circle a base station. Every slot, per vehicle: geometry gives a
line-of-sight path (plus fixed-angle scattered paths whose gains fade with an
AR(1) recursion), pilots are observed and the channel estimated, a scheduled
attack may tamper with the report, a beam is selected from the report, the
realized SNR on the true channel sets the slot's service capacity, and a FIFO
upload queue is served. A sequential detector watches the beam-power
innovation of each vehicle's reports; an alarm triggers an identification
outage after which the vehicle's attack state is cleared and its reporting
re-baselined.

The world advances single-threaded and deterministically: `step` is a pure
function of (world, slot, seed), so identical seeds give bit-identical logs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import check_count, check_nonnegative, check_positive
from .attacks import (
    AttackConfig,
    CSI_PHASE_SPOOF,
    FAKE_REPORT,
    PILOT_CONTAMINATION,
    RANDOM_PHASE,
    apply_schedule,
    contaminate_pilot,
    forge_report,
    spoof_csi_phase,
)
from .beamforming import Codebook, LinkBudget, dft_codebook, realized_snr, select_beam, achievable_rate
from .channel import ChannelState, FadingProcess, steering_vector
from .csi import CsiReport, estimate_csi, transmit_pilot, unit_pilot
from .detection import CusumState, cusum_update, monitored_statistic
from .errors import ConfigError

CUSUM = "cusum"
ORACLE = "oracle"  # fires at attack onset; used for invariant checks


@dataclass(frozen=True)
class Vehicle:
    """A transceiver circling the base station at constant radius."""

    id: int
    radius: float
    angular_speed: float
    phase0: float = 0.0
    backlog: int = 0
    attack_cfg: AttackConfig | None = None

    def __post_init__(self):
        check_positive(self.radius, "radius")
        check_nonnegative(self.backlog, "backlog")


@dataclass(frozen=True)
class DetectionSettings:
    """Detector wiring for the scenario loop."""

    enabled: bool = False
    detector: str = CUSUM
    threshold: float = float("inf")
    window: int = 100
    mu0: float = 0.0
    sigma0: float = 1.0

    def __post_init__(self):
        if self.detector not in (CUSUM, ORACLE):
            raise ConfigError(f"unknown detector {self.detector!r}", "detection.detector")


@dataclass(frozen=True)
class ScenarioConfig:
    n_slots: int
    vehicles: tuple[Vehicle, ...]
    slot_duration: float = 1e-3
    link_budget: LinkBudget = field(default_factory=LinkBudget)
    n_ant: int = 64
    n_beams: int = 64
    fading: FadingProcess = field(default_factory=lambda: FadingProcess(rho=0.99, sigma2=1.0))
    n_nlos_paths: int = 2
    nlos_rel_power_db: float = 10.0
    noise_var: float = 0.1
    n_pilot: int = 8
    detection: DetectionSettings = field(default_factory=DetectionSettings)
    identification_delay: int = 20
    packet_size_bits: float = 1e4
    bandwidth_hz: float = 1e6
    queue_capacity: int = 200
    arrivals_per_slot: int = 2
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_slots < 0:
            raise ConfigError("n_slots must be >= 0", "n_slots")
        check_nonnegative(self.identification_delay, "identification_delay")
        check_count(self.queue_capacity, "queue_capacity")
        check_nonnegative(self.arrivals_per_slot, "arrivals_per_slot")
        object.__setattr__(self, "vehicles", tuple(self.vehicles))
        ids = [v.id for v in self.vehicles]
        if len(set(ids)) != len(ids):
            raise ConfigError("vehicle ids must be unique", "vehicles")


@dataclass(frozen=True)
class MetricsRow:
    slot: int
    vehicle_id: int
    snr_db: float
    rate: float
    queued_packets: int
    delivered_packets: int
    dropped_packets: int
    latency_slots: float
    attack_active: bool
    alarm_raised: bool
    identifying: bool
    # in-memory only; not part of the metrics file columns
    arrivals: int = 0
    monitored: float = float("nan")


@dataclass(frozen=True)
class MetricsLog:
    rows: tuple[MetricsRow, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def for_vehicle(self, vehicle_id: int) -> tuple[MetricsRow, ...]:
        return tuple(r for r in self.rows if r.vehicle_id == vehicle_id)


@dataclass(frozen=True)
class _VehicleState:
    """Per-vehicle runtime state threaded through the slot loop."""

    vehicle: Vehicle
    nlos_angles: np.ndarray
    nlos_gains: np.ndarray  # complex AR(1) fading coefficients, one per path
    queue: tuple[int, ...]  # arrival slot of each queued packet, FIFO
    prev_report: CsiReport | None = None
    cusum: CusumState | None = None
    identifying_until: int = -1
    attack_neutralized: bool = False
    arrivals_total: int = 0
    delivered_total: int = 0
    dropped_total: int = 0


@dataclass(frozen=True)
class World:
    config: ScenarioConfig
    codebook: Codebook
    states: tuple[_VehicleState, ...]


def vehicle_position(v: Vehicle, slot: int) -> tuple[float, float]:
    """Angle from the base station (wrapped to (-pi, pi]) and distance."""
    angle = v.phase0 + v.angular_speed * slot
    angle = math.remainder(angle, 2.0 * math.pi)
    if angle <= -math.pi:
        angle += 2.0 * math.pi
    return angle, v.radius


def _los_angle(angle_from_bs: float) -> float:
    """Restrict the LoS departure angle to the array's front half-space."""
    s = math.sin(angle_from_bs)
    return math.asin(s)


def init_world(cfg: ScenarioConfig) -> World:
    codebook = dft_codebook(cfg.n_ant, cfg.n_beams)
    states = []
    for i, v in enumerate(cfg.vehicles):
        rng = np.random.default_rng([cfg.rng_seed, 0xA11CE, i])
        angles = rng.uniform(-np.pi / 2, np.pi / 2, size=cfg.n_nlos_paths)
        gains = _stationary_complex(cfg.n_nlos_paths, rng)
        states.append(
            _VehicleState(
                vehicle=v,
                nlos_angles=angles,
                nlos_gains=gains,
                queue=tuple(0 for _ in range(min(v.backlog, cfg.queue_capacity))),
            )
        )
    return World(config=cfg, codebook=codebook, states=tuple(states))


def _stationary_complex(n: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)


def _true_channel(cfg: ScenarioConfig, st: _VehicleState, slot: int) -> ChannelState:
    angle, _ = vehicle_position(st.vehicle, slot)
    theta = _los_angle(angle)
    h = steering_vector(theta, cfg.n_ant) * np.sqrt(cfg.n_ant)
    nlos_amp = 10.0 ** (-cfg.nlos_rel_power_db / 20.0)
    for a, g in zip(st.nlos_angles, st.nlos_gains):
        h = h + nlos_amp * g * steering_vector(a, cfg.n_ant) * np.sqrt(cfg.n_ant)
    return ChannelState(h=h[:, None], block_id=slot)


def step(world: World, slot: int, rng_seed: int | None = None) -> tuple[World, list[MetricsRow]]:
    """Advance every vehicle one slot; returns the new world and its log rows."""
    cfg = world.config
    seed = cfg.rng_seed if rng_seed is None else rng_seed
    rows = []
    new_states = []
    for vi, st in enumerate(world.states):
        rng = np.random.default_rng([seed, slot, vi])
        st, row = _step_vehicle(cfg, world.codebook, st, slot, rng)
        new_states.append(st)
        rows.append(row)
    return replace(world, states=tuple(new_states)), rows


def _step_vehicle(
    cfg: ScenarioConfig,
    codebook: Codebook,
    st: _VehicleState,
    slot: int,
    rng: np.random.Generator,
) -> tuple[_VehicleState, MetricsRow]:
    rho = cfg.fading.rho
    # evolve scattered-path fading
    innov = _stationary_complex(st.nlos_gains.size, rng) if st.nlos_gains.size else st.nlos_gains
    nlos_gains = rho * st.nlos_gains + np.sqrt(1.0 - rho**2) * innov

    st = replace(st, nlos_gains=nlos_gains)
    h_true = _true_channel(cfg, st, slot)

    attack_active = (
        st.vehicle.attack_cfg is not None
        and not st.attack_neutralized
        and apply_schedule(st.vehicle.attack_cfg, slot)
    )

    # pilot -> estimate -> (attack) -> report
    pilot = unit_pilot(cfg.n_pilot)
    sig = transmit_pilot(h_true, pilot, cfg.noise_var, rng)
    acfg = st.vehicle.attack_cfg
    if attack_active and acfg.vector == PILOT_CONTAMINATION:
        g = ChannelState(h=_stationary_complex(cfg.n_ant, rng)[:, None])
        sig = contaminate_pilot(sig, g, acfg.magnitude)
    report = estimate_csi(sig, source_id=st.vehicle.id, timestamp=slot)
    if attack_active and acfg.vector == CSI_PHASE_SPOOF:
        report = spoof_csi_phase(report, acfg.magnitude, rng)
    elif attack_active and acfg.vector == FAKE_REPORT:
        report = forge_report(report, RANDOM_PHASE, rng)

    beam_idx, _ = select_beam(codebook, report.h_hat)
    cw = codebook.codewords[beam_idx]
    snr = realized_snr(h_true, cw, cfg.link_budget)
    rate = achievable_rate(snr)

    identifying = slot <= st.identifying_until
    alarm = False
    monitored = float("nan")
    if identifying:
        pass  # link suspended; detector frozen until re-identification
    elif cfg.detection.enabled:
        st, alarm, monitored = _update_detector(cfg, st, report, cw, attack_active)
        if alarm:
            # re-identification clears a compromise already underway; a
            # false alarm on a clean vehicle only costs the outage
            underway = (
                st.vehicle.attack_cfg is not None
                and slot >= st.vehicle.attack_cfg.schedule.start_slot
            )
            st = replace(
                st,
                identifying_until=slot + cfg.identification_delay,
                attack_neutralized=st.attack_neutralized or underway,
                prev_report=None,
                cusum=None,
            )
            identifying = cfg.identification_delay > 0
    if not identifying and not alarm:
        st = replace(st, prev_report=report)
    serving = not identifying and not alarm

    # queue: arrivals, then service
    arrivals = cfg.arrivals_per_slot
    queue = list(st.queue)
    dropped = 0
    for _ in range(arrivals):
        if len(queue) < cfg.queue_capacity:
            queue.append(slot)
        else:
            dropped += 1
    capacity = 0
    if serving:
        capacity = int(rate * cfg.slot_duration * cfg.bandwidth_hz / cfg.packet_size_bits)
    served = min(capacity, len(queue))
    latencies = [slot - arr + 1 for arr in queue[:served]]
    queue = queue[served:]
    latency = float(np.mean(latencies)) if latencies else float("nan")

    st = replace(
        st,
        queue=tuple(queue),
        arrivals_total=st.arrivals_total + arrivals,
        delivered_total=st.delivered_total + served,
        dropped_total=st.dropped_total + dropped,
    )
    row = MetricsRow(
        slot=slot,
        vehicle_id=st.vehicle.id,
        snr_db=10.0 * math.log10(max(snr, 1e-30)),
        rate=rate,
        queued_packets=len(queue),
        delivered_packets=served,
        dropped_packets=dropped,
        latency_slots=latency,
        attack_active=bool(attack_active),
        alarm_raised=bool(alarm),
        identifying=bool(identifying),
        arrivals=arrivals,
        monitored=monitored,
    )
    return st, row


def _update_detector(
    cfg: ScenarioConfig,
    st: _VehicleState,
    report: CsiReport,
    cw,
    attack_active: bool,
) -> tuple[_VehicleState, bool, float]:
    ds = cfg.detection
    if ds.detector == ORACLE:
        return st, bool(attack_active), float("nan")
    if st.prev_report is None:
        # first trusted report after (re-)baselining: prediction undefined
        return st, False, float("nan")
    h_pred = ChannelState(h=cfg.fading.rho * st.prev_report.h_hat.h)
    x = monitored_statistic(report, h_pred, cw)
    cusum = st.cusum
    if cusum is None:
        cusum = CusumState(
            mu0=ds.mu0, sigma0=ds.sigma0, threshold=ds.threshold, window_len=ds.window
        )
    cusum = cusum_update(cusum, x)
    return replace(st, cusum=cusum), bool(cusum.alarmed), x


def run(cfg: ScenarioConfig) -> MetricsLog:
    """Run `cfg.n_slots` sequential steps and return the complete log."""
    world = init_world(cfg)
    rows: list[MetricsRow] = []
    for slot in range(cfg.n_slots):
        world, slot_rows = step(world, slot)
        rows.extend(slot_rows)
    return MetricsLog(rows=tuple(rows))


def summarize(log: MetricsLog) -> dict:
    """Per-vehicle aggregates: mean rate, mean delivery latency, drop rate,
    and mean detection delay (slots from each attack onset to the next alarm).
    """
    if not log.rows:
        raise ValueError("log is empty")
    out = {}
    ids = sorted({r.vehicle_id for r in log.rows})
    for vid in ids:
        rows = log.for_vehicle(vid)
        delivered = sum(r.delivered_packets for r in rows)
        lat_total = sum(
            r.latency_slots * r.delivered_packets
            for r in rows
            if r.delivered_packets > 0
        )
        arrivals = sum(r.arrivals for r in rows)
        dropped = sum(r.dropped_packets for r in rows)
        out[vid] = {
            "mean_rate": float(np.mean([r.rate for r in rows])),
            "mean_latency": (lat_total / delivered) if delivered else float("nan"),
            "drop_rate": (dropped / arrivals) if arrivals else 0.0,
            "detection_delay": _mean_detection_delay(rows),
            "delivered": delivered,
            "dropped": dropped,
        }
    return out


def _mean_detection_delay(rows) -> float:
    onsets = []
    prev_active = False
    for r in rows:
        if r.attack_active and not prev_active:
            onsets.append(r.slot)
        prev_active = r.attack_active
    delays = []
    alarms = [r.slot for r in rows if r.alarm_raised]
    for onset in onsets:
        later = [a for a in alarms if a >= onset]
        if later:
            delays.append(later[0] - onset)
    return float(np.mean(delays)) if delays else float("nan")


def post_onset_latency(log: MetricsLog, vehicle_id: int) -> float:
    """Mean delivery latency over slots at or after the first attack onset."""
    rows = log.for_vehicle(vehicle_id)
    onset = next((r.slot for r in rows if r.attack_active), None)
    if onset is None:
        return float("nan")
    delivered = sum(r.delivered_packets for r in rows if r.slot >= onset)
    lat_total = sum(
        r.latency_slots * r.delivered_packets
        for r in rows
        if r.slot >= onset and r.delivered_packets > 0
    )
    return (lat_total / delivered) if delivered else float("inf")
