"""Geometric multipath channel generation and Rayleigh fading dynamics.

The channel between a uniform linear array (ULA) and a single-antenna device
is a complex matrix ``h`` of shape ``[n_ant, n_sub]``. Columns are subcarriers;
rows are array elements. Two generation regimes are provided:

* :func:`generate_channel` builds a deterministic channel from a geometric
  path list (angle of departure, complex gain, delay, phase per path).
* :func:`sample_rayleigh_block` draws an i.i.d. circularly symmetric complex
  Gaussian block, the quasi-static flat-fading model used as the reference
  law by the distribution-based detector.

Temporal evolution uses a first-order Gauss-Markov (AR(1)) recursion per
entry, :func:`fading_step`, whose stationary law is the Rayleigh block above.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_complex_matrix, check_count, check_positive

# Reference amplitude for converting path loss (dB) into linear gain magnitude.
PATH_REFERENCE_AMPLITUDE = 1.0


@dataclass(frozen=True)
class Path:
    """One propagation path of the geometric model.

    Angles are in radians and restricted to [-pi/2, pi/2] (front half-space of
    the linear array). `gain` is the complex linear amplitude; its magnitude
    must equal ``10**(-path_loss_db/20) * PATH_REFERENCE_AMPLITUDE``.
    """

    aod: float
    aoa: float
    gain: complex
    delay: float
    phase: float
    path_loss_db: float

    def __post_init__(self):
        for name in ("aod", "aoa"):
            v = getattr(self, name)
            if not -np.pi / 2 <= v <= np.pi / 2:
                raise ValueError(f"{name} must lie in [-pi/2, pi/2], got {v}")
        if self.path_loss_db < 0:
            raise ValueError(f"path_loss_db must be >= 0, got {self.path_loss_db}")
        expected = 10.0 ** (-self.path_loss_db / 20.0) * PATH_REFERENCE_AMPLITUDE
        if expected > 0 and abs(abs(self.gain) - expected) > 1e-9 * expected:
            raise ValueError(
                f"|gain|={abs(self.gain)} inconsistent with path_loss_db="
                f"{self.path_loss_db} (expected {expected})"
            )


@dataclass(frozen=True)
class PathSet:
    """A collection of propagation paths plus the carrier frequency."""

    paths: tuple[Path, ...]
    carrier_freq_hz: float = 24e9

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        check_positive(self.carrier_freq_hz, "carrier_freq_hz")

    def __len__(self) -> int:
        return len(self.paths)


@dataclass(frozen=True)
class ChannelState:
    """Channel matrix snapshot: complex gains per (antenna, subcarrier)."""

    h: np.ndarray
    block_id: int = 0
    n_ant: int = field(init=False)
    n_sub: int = field(init=False)

    def __post_init__(self):
        h = check_complex_matrix(self.h, "h")
        if h.shape[0] < 1 or h.shape[1] < 1:
            raise ValueError(f"channel matrix must be at least 1x1, got {h.shape}")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "n_ant", h.shape[0])
        object.__setattr__(self, "n_sub", h.shape[1])

    def with_h(self, h: np.ndarray, bump_block: bool = False) -> "ChannelState":
        return ChannelState(h=h, block_id=self.block_id + (1 if bump_block else 0))


@dataclass(frozen=True)
class FadingProcess:
    """Parameters of the per-entry AR(1) fading recursion.

    ``rho`` is the slot-to-slot correlation; ``sigma2`` the stationary
    per-entry variance (linear power). ``rng_seed`` pins the noise stream.
    """

    rho: float
    sigma2: float
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        check_positive(self.sigma2, "sigma2")


def steering_vector(theta: float, n_ant: int) -> np.ndarray:
    """Array response of a half-wavelength ULA for a plane wave from `theta`.

    Entry ``k`` is ``exp(i*pi*k*sin(theta)) / sqrt(n_ant)``; the result has
    unit Euclidean norm.
    """
    n_ant = check_count(n_ant, "n_ant")
    if not np.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta}")
    k = np.arange(n_ant)
    return np.exp(1j * np.pi * k * np.sin(theta)) / np.sqrt(n_ant)


def generate_channel(
    paths: PathSet,
    n_ant: int,
    n_sub: int = 1,
    subcarrier_spacing_hz: float = 120e3,
    rng=None,
) -> ChannelState:
    """Superpose geometric paths into a channel matrix.

    Column ``m`` (subcarrier offset ``f_m = m * subcarrier_spacing_hz``) is

        sum_l gain_l * exp(i*phase_l) * exp(-i*2*pi*f_m*delay_l)
              * steering_vector(aod_l) * sqrt(n_ant)

    The ``sqrt(n_ant)`` factor makes a single unit-gain path deliver the full
    array gain ``n_ant`` under its matched codeword. Deterministic; `rng` is
    accepted for signature uniformity with the stochastic generators.
    """
    n_ant = check_count(n_ant, "n_ant")
    n_sub = check_count(n_sub, "n_sub")
    h = np.zeros((n_ant, n_sub), dtype=np.complex128)
    f = np.arange(n_sub) * subcarrier_spacing_hz
    for p in paths.paths:
        a = steering_vector(p.aod, n_ant) * np.sqrt(n_ant)
        coef = p.gain * np.exp(1j * p.phase) * np.exp(-2j * np.pi * f * p.delay)
        h += np.outer(a, coef)
    return ChannelState(h=h)


def fading_step(h: ChannelState, proc: FadingProcess, rng: np.random.Generator) -> ChannelState:
    """Advance the channel one slot: ``h' = rho*h + sqrt(1-rho^2)*w`` per entry.

    ``w`` is circularly symmetric complex Gaussian with per-entry variance
    ``proc.sigma2``, so the stationary law of the recursion is the i.i.d.
    Rayleigh block with that variance.
    """
    w = _complex_gaussian(h.h.shape, proc.sigma2, rng)
    h_next = proc.rho * h.h + np.sqrt(1.0 - proc.rho**2) * w
    return h.with_h(h_next, bump_block=True)


def sample_rayleigh_block(
    n_ant: int, n_sub: int, sigma2: float, rng: np.random.Generator
) -> ChannelState:
    """Draw one quasi-static flat-fading block.

    Entries are i.i.d. circularly symmetric complex Gaussian with variance
    `sigma2`; magnitudes are Rayleigh with scale ``sqrt(sigma2/2)``.
    """
    n_ant = check_count(n_ant, "n_ant")
    n_sub = check_count(n_sub, "n_sub")
    check_positive(sigma2, "sigma2")
    return ChannelState(h=_complex_gaussian((n_ant, n_sub), sigma2, rng))


def stationary_start(
    n_ant: int, n_sub: int, proc: FadingProcess, rng: np.random.Generator
) -> ChannelState:
    """A channel drawn from the stationary law of `proc` (block_id 0)."""
    return sample_rayleigh_block(n_ant, n_sub, proc.sigma2, rng)


def _complex_gaussian(shape, variance: float, rng: np.random.Generator) -> np.ndarray:
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def path_from_loss(
    aod: float,
    path_loss_db: float,
    phase: float = 0.0,
    aoa: float = 0.0,
    delay: float = 0.0,
) -> Path:
    """Build a Path whose gain magnitude is consistent with its loss in dB."""
    amp = 10.0 ** (-path_loss_db / 20.0) * PATH_REFERENCE_AMPLITUDE
    return Path(
        aod=aod, aoa=aoa, gain=complex(amp), delay=delay,
        phase=phase, path_loss_db=path_loss_db,
    )


def random_pathset(
    rng: np.random.Generator,
    n_paths: int = 3,
    nlos_loss_db: float = 10.0,
    carrier_freq_hz: float = 24e9,
    max_delay_s: float = 1e-7,
) -> PathSet:
    """Draw a line-of-sight path plus ``n_paths - 1`` weaker scattered paths.

    The LoS path has 0 dB loss and a uniform random angle and phase; each
    non-LoS path sits `nlos_loss_db` below it.
    """
    n_paths = check_count(n_paths, "n_paths")
    paths = []
    for i in range(n_paths):
        loss = 0.0 if i == 0 else nlos_loss_db
        paths.append(
            Path(
                aod=rng.uniform(-np.pi / 2, np.pi / 2),
                aoa=rng.uniform(-np.pi / 2, np.pi / 2),
                gain=complex(10.0 ** (-loss / 20.0)),
                delay=rng.uniform(0.0, max_delay_s),
                phase=rng.uniform(-np.pi, np.pi),
                path_loss_db=loss,
            )
        )
    return PathSet(paths=tuple(paths), carrier_freq_hz=carrier_freq_hz)
