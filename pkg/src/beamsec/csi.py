"""Pilot transmission, least-squares CSI estimation and error sampling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_complex_matrix, check_nonnegative
from .channel import ChannelState, _complex_gaussian


@dataclass(frozen=True)
class ReceivedSignal:
    """Noisy pilot observations at the base station.

    ``y[:, t] = h[:, 0] * pilot[t] + noise``, one column per pilot symbol.
    """

    y: np.ndarray
    pilot: np.ndarray
    noise_var: float

    def __post_init__(self):
        y = check_complex_matrix(self.y, "y")
        pilot = np.asarray(self.pilot, dtype=np.complex128).reshape(-1)
        if pilot.size < 1:
            raise ValueError("pilot must contain at least one symbol")
        if np.max(np.abs(np.abs(pilot) - 1.0)) > 1e-9:
            raise ValueError("pilot symbols must have unit modulus")
        if y.shape[1] != pilot.size:
            raise ValueError(
                f"y has {y.shape[1]} columns but pilot has {pilot.size} symbols"
            )
        check_nonnegative(self.noise_var, "noise_var")
        y.setflags(write=False)
        pilot.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "pilot", pilot)

    @property
    def n_ant(self) -> int:
        return self.y.shape[0]

    @property
    def n_pilot(self) -> int:
        return self.pilot.size


@dataclass(frozen=True)
class CsiReport:
    """Estimated channel state as reported to the base station.

    `phase_shift` is derived from the first subcarrier column of `h_hat`.
    `tampered` is ground truth visible to evaluation harnesses only; the
    detectors never read it.
    """

    h_hat: ChannelState
    source_id: int = 0
    timestamp: int = 0
    tampered: bool = False
    phase_shift: np.ndarray = None

    def __post_init__(self):
        ps = np.angle(self.h_hat.h[:, 0])
        ps.setflags(write=False)
        object.__setattr__(self, "phase_shift", ps)


@dataclass(frozen=True)
class CsiErrorModel:
    """Additive complex Gaussian estimation-error law (worst-case variance)."""

    sigma_e2: float

    def __post_init__(self):
        check_nonnegative(self.sigma_e2, "sigma_e2")

    def error_magnitude_cdf(self, x):
        """CDF of |error| under the model: Rayleigh with scale sqrt(sigma_e2/2)."""
        x = np.asarray(x, dtype=float)
        if self.sigma_e2 == 0:
            return (x >= 0).astype(float)
        return np.where(x > 0, 1.0 - np.exp(-(x**2) / self.sigma_e2), 0.0)


def unit_pilot(n_pilot: int) -> np.ndarray:
    """All-ones pilot sequence of length `n_pilot`."""
    if n_pilot < 1:
        raise ValueError(f"n_pilot must be >= 1, got {n_pilot}")
    return np.ones(n_pilot, dtype=np.complex128)


def transmit_pilot(
    h_true: ChannelState,
    pilot: np.ndarray,
    noise_var: float,
    rng: np.random.Generator,
) -> ReceivedSignal:
    """Observe the known pilot through the true channel plus receiver noise."""
    pilot = np.asarray(pilot, dtype=np.complex128).reshape(-1)
    noise = _complex_gaussian((h_true.n_ant, pilot.size), noise_var, rng) \
        if noise_var > 0 else 0.0
    y = np.outer(h_true.h[:, 0], pilot) + noise
    return ReceivedSignal(y=y, pilot=pilot, noise_var=noise_var)


def estimate_csi(
    sig: ReceivedSignal, source_id: int = 0, timestamp: int = 0
) -> CsiReport:
    """Least-squares channel estimate from the received pilots.

    ``h_hat[k] = mean_t y[k, t] * conj(pilot[t])``; with unit-modulus pilots
    the estimation error is complex Gaussian with per-entry variance
    ``noise_var / n_pilot``.
    """
    if sig.y.size == 0:
        raise ValueError("received signal is empty")
    h_hat = (sig.y @ sig.pilot.conj()) / sig.n_pilot
    return CsiReport(
        h_hat=ChannelState(h=h_hat[:, None]),
        source_id=source_id,
        timestamp=timestamp,
        tampered=False,
    )


def estimation_error_var(noise_var: float, n_pilot: int) -> float:
    """Per-entry variance of the LS estimation error."""
    return check_nonnegative(noise_var, "noise_var") / int(n_pilot)


def csi_error_samples(report: CsiReport, h_reference: ChannelState) -> np.ndarray:
    """Flattened per-entry error magnitudes ``|h_hat - h_reference|``.

    This is the sample stream handed to the goodness-of-fit detector.
    """
    if report.h_hat.h.shape != h_reference.h.shape:
        raise ValueError(
            f"shape mismatch: report {report.h_hat.h.shape}, "
            f"reference {h_reference.h.shape}"
        )
    return np.abs(report.h_hat.h - h_reference.h).ravel()
