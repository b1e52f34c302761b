"""Experiment pipelines: rate-degradation sweep, detector calibration and
evaluation, sample-size analysis, latency comparison, dataset export.

These functions wire the channel, beamforming, attack and detection modules
into the reproducible experiments the command-line interface exposes. All
Monte-Carlo paths are batched with numpy for speed; per-run RNGs derive from
``[seed, index]`` so sweeps parallelize and reproduce bit-exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.optimize import brentq

from .attacks import AttackSchedule, apply_schedule, AttackConfig, CSI_PHASE_SPOOF, PILOT_CONTAMINATION
from .channel import generate_channel, random_pathset
from .csi import estimation_error_var
from .dataio import (
    CsiDatasetRecord,
    ExperimentManifest,
    LABEL_CONTAMINATED,
    LABEL_FORGED,
    LABEL_PHASE_SPOOFED,
    complex_to_planes,
)
from .detection import (
    calibrate_threshold,
    glr_statistic_paths,
    ks_critical_value,
    ks_statistic,
    min_samples_for_miss,
    RocPoint,
)
from .scenario import (
    DetectionSettings,
    ScenarioConfig,
    Vehicle,
    post_onset_latency,
    run as run_scenario,
)

PUBLISHED_DEGRADATIONS = (10, 20, 30, 40)


# ---------------------------------------------------------------------------
# Rate-degradation sweep
# ---------------------------------------------------------------------------

def closed_form_rate_drop(degradation_pct: float, base_snr_db: float = 10.0) -> float:
    """Fractional Shannon-rate loss when the SNR in dB shrinks by the given
    percentage, at a fixed operating point."""
    snr0 = 10.0 ** (base_snr_db / 10.0)
    snr1 = 10.0 ** (base_snr_db * (1.0 - degradation_pct / 100.0) / 10.0)
    return 1.0 - math.log2(1.0 + snr1) / math.log2(1.0 + snr0)


@dataclass(frozen=True)
class RateSweepResult:
    degradation_pct: tuple
    mean_drop_pct: tuple
    closed_form_drop_pct: tuple
    n_channels: int
    mean_snr_db: float


def rate_degradation_table(
    n_ant: int = 64,
    n_receivers: int = 50,
    tx_power_db: float = 10.0,
    n_channels: int = 10_000,
    degradations=PUBLISHED_DEGRADATIONS,
    n_nlos: int = 2,
    nlos_rel_power_db: float = 10.0,
    seed: int = 0,
) -> RateSweepResult:
    """Mean achievable-rate reduction under dB-scale SNR degradation.

    Draws `n_channels` downlink realizations in drops of `n_receivers` users
    (LoS path with Rayleigh gain plus `n_nlos` scattered paths), selects the
    best codebook beam per user, and normalizes the ensemble so the mean
    post-beamforming SNR in dB equals `tx_power_db`. Each degradation level
    scales every user's SNR in dB by ``1 - pct/100``; the reported drop is
    ``1 - mean(rate_attacked) / mean(rate_baseline)``.
    """
    rng = np.random.default_rng(seed)
    k = np.arange(n_ant)
    sines = -1.0 + 2.0 * np.arange(n_ant) / n_ant
    W = np.exp(1j * np.pi * np.outer(k, sines)) / np.sqrt(n_ant)

    total = 0
    best = []
    while total < n_channels:
        n = min(n_receivers, n_channels - total)
        theta = rng.uniform(-np.pi / 2, np.pi / 2, size=n)
        g = _cn(rng, n)
        H = g[:, None] * np.exp(1j * np.pi * np.sin(theta)[:, None] * k[None, :])
        amp = 10.0 ** (-nlos_rel_power_db / 20.0)
        for _ in range(n_nlos):
            th2 = rng.uniform(-np.pi / 2, np.pi / 2, size=n)
            g2 = _cn(rng, n) * amp
            H += g2[:, None] * np.exp(1j * np.pi * np.sin(th2)[:, None] * k[None, :])
        gains = np.abs(H @ W) ** 2
        best.append(gains.max(axis=1))
        total += n
    best = np.concatenate(best)

    # place the ensemble's mean dB operating point at the transmit power
    offset_db = -10.0 * np.mean(np.log10(best))
    snr_db = tx_power_db + 10.0 * np.log10(best) + offset_db
    rate0 = np.log2(1.0 + 10.0 ** (snr_db / 10.0))
    drops = []
    for pct in degradations:
        rate1 = np.log2(1.0 + 10.0 ** (snr_db * (1.0 - pct / 100.0) / 10.0))
        drops.append(100.0 * (1.0 - rate1.mean() / rate0.mean()))
    return RateSweepResult(
        degradation_pct=tuple(degradations),
        mean_drop_pct=tuple(drops),
        closed_form_drop_pct=tuple(
            100.0 * closed_form_rate_drop(p, tx_power_db) for p in degradations
        ),
        n_channels=int(n_channels),
        mean_snr_db=float(snr_db.mean()),
    )


def _cn(rng: np.random.Generator, *shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


# ---------------------------------------------------------------------------
# Method 1: GLR-CUSUM on the beam-power innovation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Method1Config:
    """Operating point of the sequential-detector experiment.

    The monitored link is a stationary Rayleigh channel with slot-to-slot
    fading correlation `rho` (vehicular, hence fast); reports carry
    estimation noise of variance ``noise_var / n_pilot``. The strongest beam
    is re-selected from each report, and the monitored value is that beam's
    power innovation against the AR(1) prediction from the previous report.
    The contaminating transmitter follows the periodic schedule.
    """

    n_ant: int = 64
    n_beams: int = 64
    rho: float = 0.9
    sigma_h2: float = 1.0
    noise_var: float = 0.1
    n_pilot: int = 8
    window: int = 100
    target_fpr: float = 0.1
    snr_degradation_pct: float = 10.0
    attacker_shadowing_db: float = 6.0  # lognormal std of the attacker link
    schedule: AttackSchedule = field(default_factory=lambda: AttackSchedule(0, 20, 16))
    calib_runs: int = 1000
    eval_runs: int = 1000

    @property
    def sigma_e2(self) -> float:
        return estimation_error_var(self.noise_var, self.n_pilot)


def _beam_matrix(n_ant: int, n_beams: int) -> np.ndarray:
    k = np.arange(n_ant)
    sines = -1.0 + 2.0 * np.arange(n_beams) / n_beams
    return np.exp(1j * np.pi * np.outer(k, sines)) / np.sqrt(n_ant)


def _attacker_channels(cfg: Method1Config, n: int, rng: np.random.Generator) -> np.ndarray:
    """Rayleigh attacker channels with per-realization lognormal shadowing."""
    g = _cn(rng, n, cfg.n_ant)
    if cfg.attacker_shadowing_db > 0:
        scale = 10.0 ** (cfg.attacker_shadowing_db
                         * rng.standard_normal(n) / 20.0)
        g = g * scale[:, None]
    return g


def method1_streams(
    cfg: Method1Config,
    n_runs: int,
    n_samples: int,
    rng: np.random.Generator,
    attack_power: float = 0.0,
    scheduled: bool = True,
) -> np.ndarray:
    """Batched beam-power innovation streams, shape ``[n_runs, n_samples]``.

    Per slot and run: the channel advances by the AR(1) recursion, the report
    adds estimation noise (plus, on attacked slots, the contamination bias
    ``sqrt(power) * g`` with the attacker channel g fixed per run), the
    strongest codebook beam ``w_t`` is selected from the report, and the
    stream entry is ``|w_t^H h_hat_t|^2 - |w_t^H (rho * h_hat_{t-1})|^2``.
    """
    W = _beam_matrix(cfg.n_ant, cfg.n_beams)
    se = math.sqrt(cfg.sigma_e2)
    sh = math.sqrt(cfg.sigma_h2)
    rho = cfg.rho
    acfg = AttackConfig(PILOT_CONTAMINATION, max(attack_power, 1e-12), cfg.schedule)

    def active(t: int) -> bool:
        return attack_power > 0 and (not scheduled or apply_schedule(acfg, t))

    h = _cn(rng, n_runs, cfg.n_ant) * sh
    g = _attacker_channels(cfg, n_runs, rng)  # fixed per run
    rep_prev = h + _cn(rng, n_runs, cfg.n_ant) * se
    if active(0):
        rep_prev = rep_prev + math.sqrt(attack_power) * g
    proj_prev = rep_prev.conj() @ W
    out = np.empty((n_runs, n_samples))
    rows = np.arange(n_runs)
    for t in range(1, n_samples + 1):
        h = rho * h + math.sqrt(1.0 - rho**2) * _cn(rng, n_runs, cfg.n_ant) * sh
        rep = h + _cn(rng, n_runs, cfg.n_ant) * se
        if active(t):
            rep = rep + math.sqrt(attack_power) * g
        proj = rep.conj() @ W
        power = np.abs(proj) ** 2
        idx = np.argmax(power, axis=1)
        out[:, t - 1] = power[rows, idx] - rho**2 * np.abs(proj_prev[rows, idx]) ** 2
        proj_prev = proj
    return out


@dataclass(frozen=True)
class Method1Calibration:
    mu0: float
    sigma0: float
    threshold: float
    attack_power: float
    baseline_snr_db: float
    attacked_snr_db: float


def snr_under_contamination(
    cfg: Method1Config, power: float, n_channels: int, rng: np.random.Generator
) -> float:
    """Mean realized SNR (dB) when beams are selected from contaminated
    reports but evaluated on the true channel."""
    k = np.arange(cfg.n_ant)
    sines = -1.0 + 2.0 * np.arange(cfg.n_beams) / cfg.n_beams
    W = np.exp(1j * np.pi * np.outer(k, sines)) / np.sqrt(cfg.n_ant)
    h = _cn(rng, n_channels, cfg.n_ant) * math.sqrt(cfg.sigma_h2)
    e = _cn(rng, n_channels, cfg.n_ant) * math.sqrt(cfg.sigma_e2)
    rep = h + e
    if power > 0:
        g = _attacker_channels(cfg, n_channels, rng)
        rep = rep + math.sqrt(power) * g
    # |w_b^H x|^2 for every beam: rows of conj(x) @ W
    idx = np.argmax(np.abs(rep.conj() @ W) ** 2, axis=1)
    proj = (h.conj() @ W)[np.arange(n_channels), idx]
    snr = 10.0 * np.abs(proj) ** 2  # tx power 10 dB over unit noise
    return float(np.mean(10.0 * np.log10(np.maximum(snr, 1e-30))))


def calibrate_contamination_power(
    cfg: Method1Config, seed: int = 0, n_channels: int = 4000
) -> tuple[float, float, float]:
    """Attacker power giving the configured percentage SNR degradation (dB
    reading). Returns ``(power, baseline_snr_db, attacked_snr_db)``."""
    base = snr_under_contamination(cfg, 0.0, n_channels, np.random.default_rng([seed, 1]))
    target = base * (1.0 - cfg.snr_degradation_pct / 100.0)

    def gap(log_p):
        r = np.random.default_rng([seed, 2])
        return snr_under_contamination(cfg, 10.0 ** log_p, n_channels, r) - target

    log_p = brentq(gap, -3.0, 3.0, xtol=1e-4)
    power = 10.0 ** log_p
    attacked = snr_under_contamination(
        cfg, power, n_channels, np.random.default_rng([seed, 2])
    )
    return power, base, attacked


def calibrate_method1(cfg: Method1Config, seed: int = 0) -> Method1Calibration:
    """Full method-1 calibration: reference moments, alarm threshold at the
    target FPR, and the attack power matching the SNR-degradation point."""
    rng = np.random.default_rng([seed, 10])
    ref = method1_streams(cfg, 400, 400, rng)
    mu0, sigma0 = float(ref.mean()), float(ref.std())
    # empirical quantile of per-run maxima, same rule as calibrate_threshold
    h0 = method1_streams(cfg, cfg.calib_runs, cfg.window,
                         np.random.default_rng([seed, 11]))
    maxima = np.sort(glr_statistic_paths(h0, mu0, sigma0, cfg.window).max(axis=1))
    j = int(np.ceil(cfg.calib_runs * (1.0 - cfg.target_fpr)))
    thr = float(maxima[min(max(j, 1), cfg.calib_runs) - 1])
    power, base_db, att_db = calibrate_contamination_power(cfg, seed)
    return Method1Calibration(
        mu0=mu0, sigma0=sigma0, threshold=thr,
        attack_power=power, baseline_snr_db=base_db, attacked_snr_db=att_db,
    )


def method1_detection(
    cfg: Method1Config,
    cal: Method1Calibration,
    n_samples: int,
    seed: int = 0,
    n_runs: int | None = None,
    attack_power: float | None = None,
) -> RocPoint:
    """Detection probability of the calibrated CUSUM over attacked runs."""
    n_runs = cfg.eval_runs if n_runs is None else n_runs
    power = cal.attack_power if attack_power is None else attack_power
    rng = np.random.default_rng([seed, 12, n_samples])
    streams = method1_streams(cfg, n_runs, n_samples, rng, attack_power=power)
    paths = glr_statistic_paths(streams, cal.mu0, cal.sigma0, cfg.window)
    p_d = float(np.mean(paths.max(axis=1) > cal.threshold))
    return RocPoint(
        threshold=cal.threshold,
        false_positive_rate=cfg.target_fpr,
        detection_probability=p_d,
        n_samples_used=n_samples,
    )


def method1_fpr_holdout(
    cfg: Method1Config, cal: Method1Calibration, n_samples: int,
    seed: int = 99, n_runs: int = 1000,
) -> float:
    """Empirical alarm rate on fresh no-attack runs at the calibrated threshold."""
    rng = np.random.default_rng([seed, 13])
    streams = method1_streams(cfg, n_runs, n_samples, rng)
    paths = glr_statistic_paths(streams, cal.mu0, cal.sigma0, cfg.window)
    return float(np.mean(paths.max(axis=1) > cal.threshold))


# ---------------------------------------------------------------------------
# Method 2: KS on CSI error magnitudes under phase spoofing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Method2Config:
    """Quasi-static flat-fading measurement model for the KS detector.

    Each measurement is one scalar error magnitude ``|h_hat - h|`` from a
    fresh fading block with per-block channel variance `sigma_h2` and
    estimation-error variance `sigma_e2`. On attacked slots the report is
    rotated by a fresh Uniform(-delta, delta) phase. The periodic schedule
    reflects intermittent attacking; the sample-size planning in
    :func:`method2_min_samples` assumes the attack at full strength.
    """

    sigma_h2: float = 1.0
    sigma_e2: float = 0.1
    alpha: float = 0.01
    schedule: AttackSchedule = field(default_factory=lambda: AttackSchedule(0, 25, 13))
    quad_nodes: int = 200
    eval_runs: int = 2000

    def ref_cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, 1.0 - np.exp(-(x**2) / self.sigma_e2), 0.0)


def phase_spoof_error_cdf(x, delta_max: float, cfg: Method2Config):
    """CDF of ``|h_hat * e^{i delta} - h|`` with delta ~ Uniform(-d, d).

    Conditioned on the rotation, the error is circular Gaussian with variance
    ``4 * sigma_h2 * sin^2(delta/2) + sigma_e2``; the marginal integrates the
    Rayleigh CDF over the rotation law (Gauss-Legendre quadrature).
    """
    x = np.asarray(x, dtype=float)
    if delta_max == 0:
        return cfg.ref_cdf(x)
    nodes, weights = np.polynomial.legendre.leggauss(cfg.quad_nodes)
    d = 0.5 * delta_max * (nodes + 1.0)
    w = weights / weights.sum()
    v = 4.0 * cfg.sigma_h2 * np.sin(d / 2.0) ** 2 + cfg.sigma_e2
    expo = np.exp(-np.maximum(x[..., None], 0.0) ** 2 / v)
    out = 1.0 - expo @ w
    return np.where(x > 0, out, 0.0)


def _error_grid(cfg: Method2Config, delta_max: float) -> np.ndarray:
    hi = 5.0 * math.sqrt(4.0 * cfg.sigma_h2 * math.sin(delta_max / 2.0) ** 2
                         + cfg.sigma_e2)
    return np.linspace(1e-6, max(hi, 1.0), 20001)


def fit_spoof_magnitude(
    cfg: Method2Config,
    target_m: int = 120,
    miss_target: float = 0.1,
) -> float:
    """Phase-spoof magnitude whose planned sample requirement hits `target_m`.

    Solves for the rotation bound at which the asymptotic sample-size
    requirement for the target miss probability equals `target_m`. Monotone
    in the magnitude, so plain bisection applies.
    """
    from .detection import cdf_sup_distance, ks_miss_probability_estimate

    def m_required(delta):
        eps, x_star = cdf_sup_distance(
            lambda x: phase_spoof_error_cdf(x, delta, cfg),
            cfg.ref_cdf, _error_grid(cfg, delta),
        )
        f1 = float(phase_spoof_error_cdf(np.array([x_star]), delta, cfg)[0])
        sigma1 = math.sqrt(max(f1 * (1.0 - f1), 1e-12))
        lo, hi = 1.0, 1e7
        while hi / lo > 1.0 + 1e-9:
            mid = math.sqrt(lo * hi)
            if ks_miss_probability_estimate(mid, eps, sigma1, cfg.alpha) > miss_target:
                lo = mid
            else:
                hi = mid
        return math.sqrt(lo * hi)

    return float(brentq(lambda d: m_required(d) - target_m, 0.02, 3.0, xtol=1e-5))


def method2_samples(
    cfg: Method2Config,
    delta_max: float,
    n_runs: int,
    m: int,
    rng: np.random.Generator,
    scheduled: bool = True,
    attacked: bool = True,
) -> np.ndarray:
    """Batched error-magnitude runs, shape ``[n_runs, m]``."""
    h = _cn(rng, n_runs, m) * math.sqrt(cfg.sigma_h2)
    e = _cn(rng, n_runs, m) * math.sqrt(cfg.sigma_e2)
    h_hat = h + e
    if attacked and delta_max > 0:
        d = rng.uniform(-delta_max, delta_max, size=(n_runs, m))
        if scheduled:
            acfg = AttackConfig(CSI_PHASE_SPOOF, delta_max, cfg.schedule)
            active = np.array([apply_schedule(acfg, t) for t in range(m)])
        else:
            active = np.ones(m, dtype=bool)
        h_hat = np.where(active[None, :], h_hat * np.exp(1j * d), h_hat)
    return np.abs(h_hat - h)


def method2_detection_at(
    cfg: Method2Config, delta_max: float, m: int, seed: int = 0,
    n_runs: int | None = None,
) -> float:
    """Single-test detection probability at sample size `m` under the
    scheduled attack."""
    n_runs = cfg.eval_runs if n_runs is None else n_runs
    rng = np.random.default_rng([seed, 20, m])
    runs = method2_samples(cfg, delta_max, n_runs, m, rng)
    crit = ks_critical_value(cfg.alpha, m)
    d = np.array([ks_statistic(row, cfg.ref_cdf) for row in runs])
    return float(np.mean(d > crit))


def method2_min_samples(
    cfg: Method2Config,
    delta_max: float,
    miss_target: float,
    seed: int = 0,
) -> dict:
    """Minimum sample count for the target miss probability, with the
    empirically measured detection probability at that count."""
    return min_samples_for_miss(
        attack_cdf=lambda x: phase_spoof_error_cdf(x, delta_max, cfg),
        ref_cdf=cfg.ref_cdf,
        alpha=cfg.alpha,
        miss_target=miss_target,
        detection_estimator=lambda m: method2_detection_at(cfg, delta_max, m, seed=seed),
        x_grid=_error_grid(cfg, delta_max),
    )


def method2_h0_rejection_rate(
    cfg: Method2Config, m: int, n_runs: int = 2000, seed: int = 7
) -> float:
    rng = np.random.default_rng([seed, 21])
    runs = method2_samples(cfg, 0.0, n_runs, m, rng, attacked=False)
    crit = ks_critical_value(cfg.alpha, m)
    d = np.array([ks_statistic(row, cfg.ref_cdf) for row in runs])
    return float(np.mean(d > crit))


# ---------------------------------------------------------------------------
# Latency comparison (detection enabled vs disabled)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatencyExperimentConfig:
    n_slots: int = 3000
    onset_slot: int = 500
    n_vehicles: int = 3
    n_ant: int = 64
    spoof_delta: float = math.pi
    identification_delay: int = 20
    arrivals_per_slot: int = 4
    packet_size_bits: float = 1e3
    bandwidth_hz: float = 1e6
    calib_seeds: int = 5
    target_fpr: float = 0.05


def _latency_scenario(
    cfg: LatencyExperimentConfig, seed: int, detection: DetectionSettings,
    attacked: bool,
) -> ScenarioConfig:
    persistent = AttackSchedule(start_slot=cfg.onset_slot, period=10**9,
                                duration=10**9)
    vehicles = []
    for i in range(cfg.n_vehicles):
        attack = AttackConfig(CSI_PHASE_SPOOF, cfg.spoof_delta, persistent) \
            if attacked else None
        vehicles.append(
            Vehicle(id=i, radius=100.0, angular_speed=2 * math.pi / 2000,
                    phase0=2 * math.pi * i / cfg.n_vehicles, attack_cfg=attack)
        )
    return ScenarioConfig(
        n_slots=cfg.n_slots,
        vehicles=tuple(vehicles),
        n_ant=cfg.n_ant,
        n_beams=cfg.n_ant,
        detection=detection,
        identification_delay=cfg.identification_delay,
        arrivals_per_slot=cfg.arrivals_per_slot,
        packet_size_bits=cfg.packet_size_bits,
        bandwidth_hz=cfg.bandwidth_hz,
        rng_seed=seed,
    )


def calibrate_latency_detection(
    cfg: LatencyExperimentConfig, seed: int = 1000
) -> DetectionSettings:
    """Threshold the scenario detector on no-attack runs of the same world."""
    recorder = DetectionSettings(enabled=True, threshold=float("inf"))
    streams = []
    for s in range(cfg.calib_seeds):
        scenario = _latency_scenario(cfg, seed + s, recorder, attacked=False)
        log = run_scenario(scenario)
        for vid in range(cfg.n_vehicles):
            xs = np.array([r.monitored for r in log.for_vehicle(vid)])
            streams.append(xs[np.isfinite(xs)])
    n = min(len(s) for s in streams)
    streams = np.stack([s[:n] for s in streams])
    mu0, sigma0 = float(streams.mean()), float(streams.std())
    paths = glr_statistic_paths(streams, mu0, sigma0, 100)
    maxima = np.sort(paths.max(axis=1))
    j = int(np.ceil(maxima.size * (1.0 - cfg.target_fpr)))
    threshold = float(maxima[min(max(j, 1), maxima.size) - 1])
    return DetectionSettings(enabled=True, threshold=threshold,
                             mu0=mu0, sigma0=sigma0, window=100)


def latency_comparison(
    cfg: LatencyExperimentConfig,
    detection: DetectionSettings,
    seed: int,
) -> dict:
    """Run the same seed with detection enabled and disabled; report mean
    post-onset latencies and the logs."""
    enabled_cfg = _latency_scenario(cfg, seed, detection, attacked=True)
    disabled_cfg = _latency_scenario(
        cfg, seed, DetectionSettings(enabled=False), attacked=True
    )
    log_on = run_scenario(enabled_cfg)
    log_off = run_scenario(disabled_cfg)
    lat_on = float(np.nanmean([
        post_onset_latency(log_on, v.id) for v in enabled_cfg.vehicles
    ]))
    lat_off = float(np.nanmean([
        post_onset_latency(log_off, v.id) for v in disabled_cfg.vehicles
    ]))
    return {
        "latency_enabled": lat_on,
        "latency_disabled": lat_off,
        "log_enabled": log_on,
        "log_disabled": log_off,
    }


# ---------------------------------------------------------------------------
# Dataset export for the reconstruction-based detector
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DatasetConfig:
    n_records: int = 10_000
    n_ant: int = 16
    n_sub: int = 16
    n_paths: int = 3
    subcarrier_spacing_hz: float = 120e3
    max_delay_s: float = 4e-7
    noise_var: float = 0.05
    spoof_delta: float = math.pi / 2
    contamination_power: float = 0.5
    label_fractions: tuple = (0.7, 0.1, 0.1, 0.1)  # genuine, spoofed, contaminated, forged


def _geometric_channel(cfg: DatasetConfig, rng: np.random.Generator) -> np.ndarray:
    """Sparse multipath channel image, normalized to unit mean entry power."""
    ps = random_pathset(rng, n_paths=cfg.n_paths, max_delay_s=cfg.max_delay_s)
    h = generate_channel(ps, cfg.n_ant, cfg.n_sub,
                         subcarrier_spacing_hz=cfg.subcarrier_spacing_hz).h
    power = np.mean(np.abs(h) ** 2)
    if power < 1e-12:
        return h
    return h / math.sqrt(power)


def generate_dataset_records(cfg: DatasetConfig, seed: int = 0) -> list[CsiDatasetRecord]:
    """Labelled CSI examples from per-subcarrier pilot sounding.

    Channels come from the sparse geometric model (a few paths with steering
    structure across antennas and delay structure across subcarriers), the
    realistic regime a reconstruction model can exploit. Pilot symbol ``t``
    sounds subcarrier ``t``: ``y[:, t] = h[:, t] * p[t] + noise`` (so n_pilot
    equals n_sub) with a fixed, known pilot sequence. Attacked records tamper
    with the report (or, for contamination, with the received pilots) exactly
    as the attack operations do; `h_true` stays untouched.
    """
    rng = np.random.default_rng(seed)
    counts = _label_counts(cfg.n_records, cfg.label_fractions)
    pilot = np.ones(cfg.n_sub, dtype=np.complex128)
    records = []
    for label, count in enumerate(counts):
        for _ in range(count):
            h = _geometric_channel(cfg, rng)
            noise = _cn(rng, cfg.n_ant, cfg.n_sub) * math.sqrt(cfg.noise_var)
            y = h * pilot[None, :] + noise
            if label == LABEL_CONTAMINATED:
                g = _geometric_channel(cfg, rng)
                y = y + math.sqrt(cfg.contamination_power) * g * pilot[None, :]
            h_rep = y * pilot.conj()[None, :]
            if label == LABEL_PHASE_SPOOFED:
                d = rng.uniform(-cfg.spoof_delta, cfg.spoof_delta,
                                size=h_rep.shape)
                h_rep = h_rep * np.exp(1j * d)
            elif label == LABEL_FORGED:
                phases = rng.uniform(-np.pi, np.pi, size=h_rep.shape)
                h_rep = np.abs(h_rep) * np.exp(1j * phases)
            records.append(CsiDatasetRecord(
                label=label,
                y=complex_to_planes(y),
                h_reported=complex_to_planes(h_rep),
                h_true=complex_to_planes(h),
            ))
    order = np.random.default_rng([seed, 1]).permutation(len(records))
    return [records[i] for i in order]


def _label_counts(n: int, fractions) -> list[int]:
    counts = [int(n * f) for f in fractions]
    counts[0] += n - sum(counts)
    return counts


# ---------------------------------------------------------------------------
# Calibration manifest
# ---------------------------------------------------------------------------

def build_manifest(
    seed: int,
    m1_cfg: Method1Config,
    m1_cal: Method1Calibration,
    m2_cfg: Method2Config,
    spoof_delta: float,
) -> ExperimentManifest:
    return ExperimentManifest(
        seed=seed,
        config={
            "method1": asdict(m1_cfg),
            "method2": asdict(m2_cfg),
        },
        attack_magnitudes={
            "contamination_power": m1_cal.attack_power,
            "phase_spoof_delta": spoof_delta,
        },
        detector_thresholds={
            "cusum_threshold": m1_cal.threshold,
            "cusum_mu0": m1_cal.mu0,
            "cusum_sigma0": m1_cal.sigma0,
            "ks_alpha": m2_cfg.alpha,
        },
    )
