"""Scikit-learn style wrappers around the sequential detectors.

Both estimators consume 2-D arrays shaped ``[n_runs, n_samples]``: one row
per monitored run. ``fit`` calibrates on no-attack runs, ``predict`` returns
an alarm flag per row and ``decision_function`` the per-row statistic, so the
detectors drop into pipelines, grid searches and cross-validation tooling.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .detection import (
    glr_statistic_paths,
    ks_critical_value,
    ks_statistic,
)


class CusumDetector(BaseEstimator):
    """Windowed GLR-CUSUM change detector with empirical threshold calibration.

    Parameters
    ----------
    window : int
        GLR maximization window length.
    target_fpr : float
        Per-run false alarm rate the threshold is calibrated to.
    mu0, sigma0 : float or None
        Reference mean and standard deviation of the monitored statistic.
        Estimated from the calibration runs when None.
    """

    def __init__(self, window: int = 100, target_fpr: float = 0.1,
                 mu0: float | None = None, sigma0: float | None = None):
        self.window = window
        self.target_fpr = target_fpr
        self.mu0 = mu0
        self.sigma0 = sigma0

    def fit(self, X, y=None):
        """Calibrate the alarm threshold on no-attack runs (rows of X)."""
        X = check_array(X, ensure_min_samples=2, ensure_min_features=2)
        if not 0.0 < self.target_fpr < 1.0:
            raise ValueError(f"target_fpr must lie in (0, 1), got {self.target_fpr}")
        self.mu0_ = float(np.mean(X)) if self.mu0 is None else float(self.mu0)
        self.sigma0_ = float(np.std(X)) if self.sigma0 is None else float(self.sigma0)
        if self.sigma0_ <= 0:
            raise ValueError("calibration runs have zero variance")
        maxima = np.sort(self._statistics(X))
        n = maxima.size
        j = int(np.ceil(n * (1.0 - self.target_fpr)))
        self.threshold_ = float(maxima[min(max(j, 1), n) - 1])
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X) -> np.ndarray:
        """Maximum GLR statistic per run."""
        check_is_fitted(self, "threshold_")
        X = check_array(X, ensure_min_features=2)
        return self._statistics(X)

    def predict(self, X) -> np.ndarray:
        """Alarm flag per run (True where the statistic crosses threshold)."""
        return self.decision_function(X) > self.threshold_

    def _statistics(self, X) -> np.ndarray:
        paths = glr_statistic_paths(X, self.mu0_, self.sigma0_, self.window)
        return paths.max(axis=1)


class KsSpoofDetector(BaseEstimator):
    """Kolmogorov-Smirnov test of CSI error magnitudes against a Rayleigh law.

    ``fit`` estimates the Rayleigh reference scale from clean error samples;
    ``predict`` rejects rows whose empirical distribution strays beyond the
    asymptotic critical value at significance `alpha`.
    """

    def __init__(self, alpha: float = 0.01):
        self.alpha = alpha

    def fit(self, X, y=None):
        """Estimate the reference error variance from clean samples."""
        X = check_array(X, ensure_2d=False, allow_nd=False)
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if np.any(X < 0):
            raise ValueError("error magnitudes must be non-negative")
        self.sigma_e2_ = float(np.mean(np.asarray(X, dtype=float) ** 2))
        if self.sigma_e2_ <= 0:
            raise ValueError("clean samples have zero power")
        self.n_features_in_ = X.shape[1] if X.ndim == 2 else 1
        return self

    def ref_cdf_(self, x):
        check_is_fitted(self, "sigma_e2_")
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, 1.0 - np.exp(-(x**2) / self.sigma_e2_), 0.0)

    def decision_function(self, X) -> np.ndarray:
        """KS statistic per row."""
        check_is_fitted(self, "sigma_e2_")
        X = check_array(X, ensure_min_features=1)
        return np.array([ks_statistic(row, self.ref_cdf_) for row in X])

    def predict(self, X) -> np.ndarray:
        """Rejection flag per row at significance `alpha`."""
        X = check_array(X, ensure_min_features=1)
        crit = ks_critical_value(self.alpha, X.shape[1])
        return self.decision_function(X) > crit
