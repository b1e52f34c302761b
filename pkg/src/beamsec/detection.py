"""Sequential and distribution-based attack detectors.

Two detection methods operate on scalar streams derived from CSI reports:

* A windowed GLR-CUSUM for an unknown mean shift in a standardized Gaussian
  stream. At time ``t`` the statistic is

      max_{1 <= k <= min(t, W)}  ( sum of last k standardized deviations )^2
                                 ---------------------------------------
                                                2 k

  and an alarm fires when it crosses a threshold calibrated on no-attack
  runs.

* A one-sample Kolmogorov-Smirnov test of CSI error magnitudes against a
  Rayleigh reference law, with the asymptotic critical value
  ``c = k_alpha / sqrt(m)`` where ``Q(k_alpha) = alpha`` for the Kolmogorov
  survival function ``Q(k) = 2 * sum_{j>=1} (-1)^(j-1) exp(-2 j^2 k^2)``.

Threshold calibration, detection-probability evaluation and the minimum
sample-size analysis operate on caller-supplied stream generators so they
stay independent of the physical pipeline that produces the streams.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from ._validation import check_count, check_in_open_interval
from .beamforming import Codeword
from .channel import ChannelState
from .csi import CsiReport
from .errors import CalibrationError, SampleBudgetError

DEFAULT_SAMPLE_GRID_MAX = 300
SAMPLE_BUDGET = 10_000


# ---------------------------------------------------------------------------
# GLR-CUSUM
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CusumState:
    """State of the windowed GLR-CUSUM detector.

    `window` holds the most recent monitored values (at most `window_len`).
    `statistic` is the current GLR value, `alarmed` whether it exceeds
    `threshold`. Updates are functional: :func:`cusum_update` returns a new
    state, so a state value is never shared mutably.
    """

    mu0: float
    sigma0: float
    threshold: float
    window_len: int = 100
    window: tuple[float, ...] = ()
    statistic: float = 0.0
    alarmed: bool = False

    def __post_init__(self):
        if self.sigma0 <= 0:
            raise ValueError(f"sigma0 must be positive, got {self.sigma0}")
        if self.window_len < 2:
            raise ValueError(f"window_len must be >= 2, got {self.window_len}")
        if self.statistic < 0:
            raise ValueError("statistic must be non-negative")


def cusum_update(state: CusumState, x: float) -> CusumState:
    """Absorb one monitored value and recompute the windowed GLR statistic."""
    if not math.isfinite(x):
        raise ValueError(f"monitored value must be finite, got {x}")
    window = (state.window + (float(x),))[-state.window_len:]
    z = (np.asarray(window) - state.mu0) / state.sigma0
    # suffix sums: S_k = sum of the last k standardized deviations
    suffix = np.cumsum(z[::-1])
    k = np.arange(1, suffix.size + 1)
    statistic = float(np.max(suffix**2 / (2.0 * k)))
    return replace(
        state,
        window=window,
        statistic=statistic,
        alarmed=bool(statistic > state.threshold),
    )


def glr_statistic_path(
    xs: np.ndarray, mu0: float, sigma0: float, window_len: int
) -> np.ndarray:
    """Vectorized GLR statistic after each value of a single stream."""
    paths = glr_statistic_paths(np.asarray(xs, dtype=float)[None, :],
                                mu0, sigma0, window_len)
    return paths[0]


def glr_statistic_paths(
    streams: np.ndarray, mu0: float, sigma0: float, window_len: int
) -> np.ndarray:
    """GLR statistic trajectories for a batch of streams.

    `streams` has shape ``[n_runs, n_samples]``; the result has the same
    shape, entry ``[r, t]`` being the statistic after absorbing sample ``t``
    of run ``r``. Used by calibration and evaluation, which only need
    per-run maxima or first-crossing times.
    """
    streams = np.asarray(streams, dtype=float)
    if streams.ndim != 2:
        raise ValueError(f"streams must be 2-D [n_runs, n_samples], got {streams.shape}")
    if not np.all(np.isfinite(streams)):
        raise ValueError("streams contain non-finite values")
    z = (streams - mu0) / sigma0
    n_runs, n = z.shape
    c = np.concatenate([np.zeros((n_runs, 1)), np.cumsum(z, axis=1)], axis=1)
    out = np.empty_like(z)
    for t in range(n):
        kmax = min(t + 1, window_len)
        k = np.arange(1, kmax + 1)
        # sums of the last k values ending at t
        sums = c[:, t + 1, None] - c[:, t + 1 - k]
        out[:, t] = np.max(sums**2 / (2.0 * k), axis=1)
    return out


def first_crossing_times(paths: np.ndarray, threshold: float) -> np.ndarray:
    """Index of the first alarm per run, or -1 if the path never crosses."""
    above = paths > threshold
    times = np.where(above.any(axis=1), above.argmax(axis=1), -1)
    return times


def monitored_statistic(
    report: CsiReport, h_predicted: ChannelState, cw_selected: Codeword
) -> float:
    """Strongest-beam power innovation of a report against its prediction.

    Returns ``|w^H h_hat|^2 - |w^H h_pred|^2`` on the first subcarrier. With
    predictions formed as ``rho * previous report``, its no-attack mean is
    :func:`innovation_mean_h0`; streams are centered by that mean before the
    CUSUM sees them.
    """
    w = cw_selected.effective_weights()
    if w.size != report.h_hat.n_ant or w.size != h_predicted.n_ant:
        raise ValueError(
            f"dimension mismatch: codeword {w.size}, report {report.h_hat.n_ant}, "
            f"prediction {h_predicted.n_ant}"
        )
    p_hat = np.abs(np.vdot(w, report.h_hat.h[:, 0])) ** 2
    p_pred = np.abs(np.vdot(w, h_predicted.h[:, 0])) ** 2
    return float(p_hat - p_pred)


def innovation_mean_h0(rho: float, sigma_h2: float, sigma_e2: float) -> float:
    """No-attack mean of the beam-power innovation.

    For a unit-norm codeword, a stationary AR(1) channel with per-entry
    variance `sigma_h2` and estimation error variance `sigma_e2`, the
    projected report power has mean ``sigma_h2 + sigma_e2`` while the
    prediction ``rho * previous report`` has mean ``rho^2 *
    (sigma_h2 + sigma_e2)``.
    """
    return (1.0 - rho**2) * (sigma_h2 + sigma_e2)


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KsTestResult:
    d_stat: float
    n_samples: int
    critical_value: float
    alpha: float
    reject: bool = None

    def __post_init__(self):
        if not 0.0 <= self.d_stat <= 1.0:
            raise ValueError(f"d_stat must lie in [0, 1], got {self.d_stat}")
        object.__setattr__(self, "reject", bool(self.d_stat > self.critical_value))


def ks_statistic(samples: np.ndarray, ref_cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Supremum gap between the empirical CDF of `samples` and `ref_cdf`.

    ``D_m = max_i max( i/m - F(x_(i)),  F(x_(i)) - (i-1)/m )`` over the order
    statistics ``x_(i)``.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    m = x.size
    if m == 0:
        raise ValueError("samples must be non-empty")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples contain non-finite values")
    f = np.asarray(ref_cdf(x), dtype=float)
    i = np.arange(1, m + 1)
    d_plus = np.max(i / m - f)
    d_minus = np.max(f - (i - 1) / m)
    return float(max(d_plus, d_minus, 0.0))


def kolmogorov_survival(k: float) -> float:
    """``Q(k) = 2 * sum_{j>=1} (-1)^(j-1) exp(-2 j^2 k^2)``, clipped to [0, 1]."""
    if k <= 0:
        return 1.0
    total = 0.0
    for j in range(1, 101):
        term = math.exp(-2.0 * j * j * k * k)
        if term < 1e-18:
            break
        total += term if j % 2 == 1 else -term
    return min(1.0, max(0.0, 2.0 * total))


def ks_critical_value(alpha: float, m: int) -> float:
    """Asymptotic critical value ``k_alpha / sqrt(m)`` at significance `alpha`.

    ``k_alpha`` solves ``Q(k) = alpha`` by bisection to 1e-9.
    """
    check_in_open_interval(alpha, 0.0, 1.0, "alpha")
    m = check_count(m, "m")
    lo, hi = 1e-9, 10.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if kolmogorov_survival(mid) > alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) / math.sqrt(m)


def ks_test(samples, ref_cdf, alpha: float = 0.01) -> KsTestResult:
    """Convenience wrapper bundling statistic, critical value and decision."""
    samples = np.asarray(samples, dtype=float).ravel()
    d = ks_statistic(samples, ref_cdf)
    c = ks_critical_value(alpha, samples.size)
    return KsTestResult(d_stat=d, n_samples=samples.size,
                        critical_value=c, alpha=alpha)


# ---------------------------------------------------------------------------
# Calibration and evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RocPoint:
    """Operating point from disjoint null/attack Monte-Carlo runs."""

    threshold: float
    false_positive_rate: float
    detection_probability: float
    n_samples_used: int

    def __post_init__(self):
        for name in ("false_positive_rate", "detection_probability"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


def run_statistic(detector: str, stream: np.ndarray, **params) -> float:
    """Per-run scalar a threshold is compared against.

    For `cusum` this is the maximum GLR statistic along the stream (params:
    `mu0`, `sigma0`, `window_len`); for `ks` the KS statistic of the stream
    against `ref_cdf`.
    """
    if detector == "cusum":
        path = glr_statistic_path(stream, params["mu0"], params["sigma0"],
                                  params.get("window_len", 100))
        return float(path.max())
    if detector == "ks":
        return ks_statistic(stream, params["ref_cdf"])
    raise ValueError(f"unknown detector {detector!r}")


def _run_statistics(detector, generator, n_runs, rng, params) -> np.ndarray:
    if detector == "cusum":
        streams = np.stack([np.asarray(generator(rng), dtype=float)
                            for _ in range(n_runs)])
        paths = glr_statistic_paths(streams, params["mu0"], params["sigma0"],
                                    params.get("window_len", 100))
        return paths.max(axis=1)
    if detector == "ks":
        return np.array([ks_statistic(generator(rng), params["ref_cdf"])
                         for _ in range(n_runs)])
    raise ValueError(f"unknown detector {detector!r}")


def calibrate_threshold(
    detector: str,
    h0_generator: Callable[[np.random.Generator], np.ndarray],
    target_fpr: float,
    n_runs: int,
    rng: np.random.Generator,
    **params,
) -> float:
    """Smallest threshold whose empirical alarm rate on null runs is at most
    `target_fpr`.

    `h0_generator(rng)` must yield one no-attack run (a monitored stream for
    `cusum`, a sample vector for `ks`). The threshold is the empirical
    ``ceil(n * (1 - fpr))``-th order statistic of per-run maxima.
    """
    check_in_open_interval(target_fpr, 0.0, 1.0, "target_fpr")
    n_runs = check_count(n_runs, "n_runs", minimum=100)
    stats = np.sort(_run_statistics(detector, h0_generator, n_runs, rng, params))
    if stats[0] == stats[-1]:
        raise CalibrationError(
            "null-run statistics are constant; cannot place a threshold"
        )
    j = int(np.ceil(n_runs * (1.0 - target_fpr)))
    j = min(max(j, 1), n_runs)
    return float(stats[j - 1])


def evaluate_detection(
    detector: str,
    h1_generator: Callable[[np.random.Generator], np.ndarray],
    threshold: float,
    n_samples: int,
    n_runs: int,
    rng: np.random.Generator,
    calibration_fpr: float,
    **params,
) -> RocPoint:
    """Fraction of attacked runs whose statistic crosses `threshold`.

    `h1_generator(rng)` yields one attacked run of length `n_samples`; the
    returned point pairs the measured detection probability with the FPR the
    threshold was calibrated at.
    """
    stats = _run_statistics(detector, h1_generator, n_runs, rng, params)
    p_d = float(np.mean(stats > threshold))
    return RocPoint(
        threshold=float(threshold),
        false_positive_rate=float(calibration_fpr),
        detection_probability=p_d,
        n_samples_used=int(n_samples),
    )


# ---------------------------------------------------------------------------
# Minimum sample size for a target miss probability (KS detector)
# ---------------------------------------------------------------------------

def cdf_sup_distance(
    cdf_a: Callable[[np.ndarray], np.ndarray],
    cdf_b: Callable[[np.ndarray], np.ndarray],
    x_grid: np.ndarray,
) -> tuple[float, float]:
    """Supremum distance between two CDFs over a dense grid.

    Returns ``(distance, x_at_sup)``. The grid must cover the support well
    enough that the sup is interior.
    """
    x = np.asarray(x_grid, dtype=float)
    gaps = np.abs(np.asarray(cdf_a(x)) - np.asarray(cdf_b(x)))
    i = int(np.argmax(gaps))
    return float(gaps[i]), float(x[i])


def ks_miss_probability_estimate(
    m: int, eps: float, sigma1: float, alpha: float
) -> float:
    """Asymptotic-Gaussian estimate of the KS miss probability.

    At sample size `m` against an alternative whose CDF deviates from the
    reference by sup-distance `eps`, the test statistic concentrates near
    ``eps`` with standard error ``sigma1 / sqrt(m)`` (`sigma1` is the
    binomial standard deviation at the sup point). The estimated miss
    probability is ``Phi((k_alpha - sqrt(m) * eps) / sigma1)``.
    """
    k_alpha = ks_critical_value(alpha, 1)  # k_alpha / sqrt(1)
    z = (k_alpha - math.sqrt(m) * eps) / sigma1
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def min_samples_for_miss(
    attack_cdf: Callable[[np.ndarray], np.ndarray],
    ref_cdf: Callable[[np.ndarray], np.ndarray],
    alpha: float,
    miss_target: float,
    detection_estimator: Callable[[int], float],
    x_grid: np.ndarray,
    grid_step: int = 5,
    grid_start: int = 10,
    grid_max: int = DEFAULT_SAMPLE_GRID_MAX,
) -> dict:
    """Smallest sample count whose estimated miss probability meets the target.

    The miss probability is estimated from the asymptotic power model against
    the full-strength attack distribution `attack_cdf` (its sup-distance from
    `ref_cdf` is computed over `x_grid`). The search scans the documented grid
    ``{grid_start, +grid_step, ..., grid_max}``, extends in coarse steps up to
    the sample budget if needed, then refines to the smallest integer within
    one grid step. `detection_estimator(m)` supplies the empirically measured
    detection probability at the returned size, which is reported alongside.

    Raises :class:`SampleBudgetError` if the target is unreachable within
    10,000 samples.
    """
    check_in_open_interval(alpha, 0.0, 1.0, "alpha")
    check_in_open_interval(miss_target, 0.0, 1.0, "miss_target")
    eps, x_star = cdf_sup_distance(attack_cdf, ref_cdf, x_grid)
    if eps <= 0:
        raise CalibrationError("attack distribution equals the reference")
    f1 = float(np.asarray(attack_cdf(np.array([x_star])))[0])
    sigma1 = math.sqrt(max(f1 * (1.0 - f1), 1e-12))

    def miss(m: int) -> float:
        return ks_miss_probability_estimate(m, eps, sigma1, alpha)

    coarse = None
    for m in range(grid_start, grid_max + 1, grid_step):
        if miss(m) <= miss_target:
            coarse = m
            break
    if coarse is None:
        m = grid_max + grid_step
        while m <= SAMPLE_BUDGET:
            if miss(m) <= miss_target:
                coarse = m
                break
            m += grid_step * 10
    if coarse is None:
        raise SampleBudgetError(
            f"miss target {miss_target} unreachable within {SAMPLE_BUDGET} samples"
        )
    m_min = coarse
    for m in range(max(grid_start, coarse - grid_step + 1), coarse):
        if miss(m) <= miss_target:
            m_min = m
            break
    return {
        "m_min": int(m_min),
        "detection_at_m": float(detection_estimator(int(m_min))),
        "miss_estimate": float(miss(m_min)),
        "sup_distance": float(eps),
        "sigma1": float(sigma1),
    }
