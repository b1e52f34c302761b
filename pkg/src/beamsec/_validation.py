"""Input validation helpers used by the public API."""
from __future__ import annotations

import numpy as np


def check_complex_matrix(a, name: str = "array", ndim: int = 2) -> np.ndarray:
    """Coerce to a complex ndarray of the given rank and reject non-finite entries."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {a.shape}")
    if a.size and not np.all(np.isfinite(a.real) & np.isfinite(a.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def check_positive(x: float, name: str) -> float:
    x = float(x)
    if not np.isfinite(x) or x <= 0:
        raise ValueError(f"{name} must be positive and finite, got {x}")
    return x


def check_nonnegative(x: float, name: str) -> float:
    x = float(x)
    if not np.isfinite(x) or x < 0:
        raise ValueError(f"{name} must be non-negative and finite, got {x}")
    return x


def check_count(n, name: str, minimum: int = 1) -> int:
    n = int(n)
    if n < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {n}")
    return n


def check_in_open_interval(x: float, lo: float, hi: float, name: str) -> float:
    x = float(x)
    if not (lo < x < hi):
        raise ValueError(f"{name} must lie in ({lo}, {hi}), got {x}")
    return x


def check_same_shape(a: np.ndarray, b: np.ndarray, name_a: str, name_b: str) -> None:
    if a.shape != b.shape:
        raise ValueError(
            f"shape mismatch: {name_a} has {a.shape}, {name_b} has {b.shape}"
        )
