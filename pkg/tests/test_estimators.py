import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from beamsec.estimators import CusumDetector, KsSpoofDetector


class TestCusumDetector:
    def _h0(self, n_runs=500, n=80, seed=0):
        return np.random.default_rng(seed).normal(size=(n_runs, n))

    def test_fit_predict_roundtrip(self):
        det = CusumDetector(window=40, target_fpr=0.1).fit(self._h0())
        alarms = det.predict(self._h0(200, seed=1))
        assert alarms.dtype == bool
        assert abs(alarms.mean() - 0.1) < 0.06

    def test_detects_mean_shift(self):
        det = CusumDetector(window=40, target_fpr=0.1).fit(self._h0())
        shifted = self._h0(200, seed=2) + 1.5
        assert det.predict(shifted).mean() > 0.9

    def test_decision_function_matches_threshold(self):
        det = CusumDetector(window=40, target_fpr=0.2).fit(self._h0())
        X = self._h0(50, seed=3)
        np.testing.assert_array_equal(
            det.predict(X), det.decision_function(X) > det.threshold_
        )

    def test_get_params_and_clone(self):
        det = CusumDetector(window=64, target_fpr=0.05, mu0=1.0, sigma0=2.0)
        params = det.get_params()
        assert params == {"window": 64, "target_fpr": 0.05, "mu0": 1.0,
                          "sigma0": 2.0}
        cloned = clone(det)
        assert cloned.get_params() == params

    def test_explicit_reference_moments(self):
        det = CusumDetector(window=40, mu0=0.0, sigma0=1.0).fit(self._h0())
        assert (det.mu0_, det.sigma0_) == (0.0, 1.0)

    def test_predict_before_fit_raises(self):
        with pytest.raises(NotFittedError):
            CusumDetector().predict(self._h0(5))

    def test_bad_target_fpr(self):
        with pytest.raises(ValueError):
            CusumDetector(target_fpr=1.5).fit(self._h0(100))


class TestKsSpoofDetector:
    def _clean(self, n_runs, m, sigma_e2=0.1, seed=0):
        rng = np.random.default_rng(seed)
        z = (rng.standard_normal((n_runs, m))
             + 1j * rng.standard_normal((n_runs, m))) * np.sqrt(sigma_e2 / 2)
        return np.abs(z)

    def test_fit_estimates_scale(self):
        det = KsSpoofDetector().fit(self._clean(100, 200))
        assert abs(det.sigma_e2_ - 0.1) / 0.1 < 0.05

    def test_h0_rejection_near_alpha(self):
        det = KsSpoofDetector(alpha=0.05).fit(self._clean(200, 500))
        rate = det.predict(self._clean(2000, 100, seed=1)).mean()
        assert abs(rate - 0.05) < 0.02

    def test_detects_inflated_errors(self):
        det = KsSpoofDetector(alpha=0.01).fit(self._clean(200, 500))
        attacked = self._clean(300, 120, sigma_e2=0.25, seed=2)
        assert det.predict(attacked).mean() > 0.9

    def test_clone_and_params(self):
        det = KsSpoofDetector(alpha=0.2)
        assert clone(det).get_params() == {"alpha": 0.2}

    def test_negative_samples_rejected(self):
        with pytest.raises(ValueError):
            KsSpoofDetector().fit(np.array([[-1.0, 0.5]]))
