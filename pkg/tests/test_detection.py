import math

import numpy as np
import pytest
import scipy.special

from beamsec.beamforming import Codeword, dft_codebook, select_beam
from beamsec.channel import (
    steering_vector,
    ChannelState,
    FadingProcess,
    fading_step,
    stationary_start,
)
from beamsec.csi import estimate_csi, estimation_error_var, transmit_pilot, unit_pilot
from beamsec.attacks import spoof_csi_phase
from beamsec.detection import (
    CusumState,
    calibrate_threshold,
    cusum_update,
    evaluate_detection,
    first_crossing_times,
    glr_statistic_path,
    glr_statistic_paths,
    innovation_mean_h0,
    kolmogorov_survival,
    ks_critical_value,
    ks_statistic,
    ks_test,
    min_samples_for_miss,
    monitored_statistic,
    cdf_sup_distance,
)
from beamsec.errors import CalibrationError, SampleBudgetError


def glr_brute_force(window, mu0, sigma0):
    """Independent O(W^2) maximization over change points in the window."""
    z = [(x - mu0) / sigma0 for x in window]
    best = 0.0
    for k in range(1, len(z) + 1):
        s = sum(z[len(z) - k:])
        best = max(best, s * s / (2.0 * k))
    return best


class TestCusum:
    def test_constant_at_reference_stays_zero(self):
        state = CusumState(mu0=2.0, sigma0=1.0, threshold=5.0, window_len=10)
        for _ in range(50):
            state = cusum_update(state, 2.0)
            assert state.statistic == 0.0
            assert not state.alarmed

    def test_update_matches_brute_force(self):
        rng = np.random.default_rng(0)
        for w in (2, 3, 8, 33, 64):
            state = CusumState(mu0=0.3, sigma0=1.7, threshold=1e9, window_len=w)
            xs = rng.normal(0.3, 1.7, size=3 * w)
            for x in xs:
                state = cusum_update(state, x)
                expected = glr_brute_force(state.window, 0.3, 1.7)
                assert abs(state.statistic - expected) < 1e-10

    def test_batched_paths_match_sequential(self):
        rng = np.random.default_rng(1)
        streams = rng.normal(size=(5, 40))
        paths = glr_statistic_paths(streams, 0.0, 1.0, 16)
        for r in range(5):
            state = CusumState(mu0=0.0, sigma0=1.0, threshold=1e9, window_len=16)
            for t, x in enumerate(streams[r]):
                state = cusum_update(state, x)
                assert abs(paths[r, t] - state.statistic) < 1e-10

    def test_alarm_within_15_of_mean_shift(self):
        # N(0,1) -> N(3,1) change at t=100, threshold at 0.1 FPR per
        # 100-sample window: alarm within 15 samples in >= 95% of runs
        rng = np.random.default_rng(2)
        w = 50
        h0 = rng.normal(size=(1000, 100))
        maxima = np.sort(glr_statistic_paths(h0, 0.0, 1.0, w).max(axis=1))
        threshold = maxima[int(np.ceil(1000 * 0.9)) - 1]
        streams = np.concatenate(
            [rng.normal(size=(1000, 100)), rng.normal(3.0, 1.0, size=(1000, 15))],
            axis=1,
        )
        paths = glr_statistic_paths(streams, 0.0, 1.0, w)
        post = paths[:, 100:] > threshold
        detected = post.any(axis=1)
        assert detected.mean() >= 0.95

    def test_rejects_non_finite(self):
        state = CusumState(mu0=0.0, sigma0=1.0, threshold=1.0)
        with pytest.raises(ValueError):
            cusum_update(state, float("nan"))

    def test_invalid_state(self):
        with pytest.raises(ValueError):
            CusumState(mu0=0.0, sigma0=0.0, threshold=1.0)
        with pytest.raises(ValueError):
            CusumState(mu0=0.0, sigma0=1.0, threshold=1.0, window_len=1)


class TestMonitoredStatistic:
    def test_zero_when_report_equals_prediction(self):
        rng = np.random.default_rng(3)
        h = stationary_start(8, 1, FadingProcess(rho=0.9, sigma2=1.0), rng)
        rep = estimate_csi(transmit_pilot(h, unit_pilot(4), 0.0, rng))
        cw = Codeword(weights=np.ones(8, dtype=complex) / np.sqrt(8))
        assert monitored_statistic(rep, rep.h_hat, cw) == 0.0

    def _stream(self, rng, n_slots, delta=0.0, onset=0):
        """Centered innovation stream built through the channel/csi ops.

        The link is a line-of-sight channel whose scalar gain fades with an
        AR(1) recursion; the serving beam is selected from the first report
        and held. The analytic no-attack mean of the innovation is
        ``(1 - rho^2) * (|w^H h_base|^2 * sigma2 + sigma_e2)``.
        """
        proc = FadingProcess(rho=0.5, sigma2=1.0)
        noise_var, n_pilot = 0.2, 4
        sigma_e2 = estimation_error_var(noise_var, n_pilot)
        n_ant = 16
        cb = dft_codebook(n_ant, n_ant)
        base = np.sqrt(n_ant) * steering_vector(0.3, n_ant)
        fade = stationary_start(1, 1, proc, rng)
        h = ChannelState(h=base[:, None] * fade.h[0, 0])
        rep_prev = estimate_csi(transmit_pilot(h, unit_pilot(n_pilot), noise_var, rng))
        cw = cb.codewords[select_beam(cb, rep_prev.h_hat)[0]]
        p_base = abs(np.vdot(cw.effective_weights(), base)) ** 2
        center = innovation_mean_h0(proc.rho, p_base * proc.sigma2, sigma_e2)
        out = []
        for t in range(n_slots):
            fade = fading_step(fade, proc, rng)
            h = ChannelState(h=base[:, None] * fade.h[0, 0])
            rep = estimate_csi(transmit_pilot(h, unit_pilot(n_pilot), noise_var, rng))
            if delta > 0 and t >= onset:
                rep = spoof_csi_phase(rep, delta, rng)
            h_pred = ChannelState(h=proc.rho * rep_prev.h_hat.h)
            out.append(monitored_statistic(rep, h_pred, cw) - center)
            rep_prev = rep
        return np.array(out)

    def test_no_attack_stream_zero_mean(self):
        xs = self._stream(np.random.default_rng(4), 10_000)
        se = xs.std() / math.sqrt(xs.size)
        assert abs(xs.mean()) < 3 * se

    def test_phase_spoof_shifts_mean(self):
        rng = np.random.default_rng(5)
        clean = self._stream(np.random.default_rng(4), 10_000)
        se = clean.std() / math.sqrt(200)
        spoofed = self._stream(rng, 200, delta=np.pi / 2)
        assert abs(spoofed.mean()) >= 5 * se

    def test_dimension_mismatch(self):
        cw = Codeword(weights=np.ones(4, dtype=complex) / 2)
        h = ChannelState(h=np.ones((8, 1), dtype=complex))
        rep = estimate_csi(transmit_pilot(h, unit_pilot(2), 0.0,
                                          np.random.default_rng(0)))
        with pytest.raises(ValueError):
            monitored_statistic(rep, h, cw)


def ks_grid_oracle(samples, ref_cdf):
    """Sup over a dense grid enriched with both one-sided limits at the
    sample points; independent of the order-statistics formula."""
    samples = np.sort(np.asarray(samples, dtype=float))
    lo, hi = samples[0] - 1.0, samples[-1] + 1.0
    grid = np.concatenate([
        np.linspace(lo, hi, 1_000_001),
        samples,
        samples - 1e-12,
    ])
    grid.sort()
    emp = np.searchsorted(samples, grid, side="right") / samples.size
    return float(np.max(np.abs(emp - ref_cdf(grid))))


class TestKsStatistic:
    def test_single_sample_uniform(self):
        assert ks_statistic(np.array([0.5]), lambda x: np.clip(x, 0, 1)) == 0.5

    def test_samples_at_quantiles(self):
        m = 99
        samples = np.arange(1, m + 1) / (m + 1)
        d = ks_statistic(samples, lambda x: np.clip(x, 0, 1))
        assert d <= 1 / (m + 1) + 1 / m

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(6)
        uniform = lambda x: np.clip(x, 0.0, 1.0)
        for m in (3, 17, 200):
            samples = rng.uniform(size=m)
            d = ks_statistic(samples, uniform)
            assert abs(d - ks_grid_oracle(samples, uniform)) < 1e-9

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ks_statistic(np.array([]), lambda x: x)


class TestKsCriticalValue:
    def test_survival_function_at_solution(self):
        for alpha in (0.01, 0.05, 0.2):
            k_alpha = ks_critical_value(alpha, 1)
            # forward evaluation of the alternating series at the solution
            q = 2 * sum((-1) ** (j - 1) * math.exp(-2 * j * j * k_alpha**2)
                        for j in range(1, 60))
            assert abs(q - alpha) < 1e-6

    def test_against_scipy(self):
        for alpha in (0.01, 0.05, 0.1):
            assert abs(ks_critical_value(alpha, 1)
                       - scipy.special.kolmogi(alpha)) < 1e-8
        assert abs(kolmogorov_survival(1.0) - scipy.special.kolmogorov(1.0)) < 1e-12

    def test_sqrt_m_scaling(self):
        c1 = ks_critical_value(0.05, 25)
        c2 = ks_critical_value(0.05, 100)
        assert abs(c1 - 2 * c2) < 1e-12

    def test_h0_rejection_rate(self):
        # empirical rejection rate at alpha=0.05, m=100, 10^4 trials
        rng = np.random.default_rng(7)
        m, trials = 100, 10_000
        crit = ks_critical_value(0.05, m)
        samples = np.sort(rng.uniform(size=(trials, m)), axis=1)
        i = np.arange(1, m + 1)
        d_plus = (i / m - samples).max(axis=1)
        d_minus = (samples - (i - 1) / m).max(axis=1)
        rate = float(np.mean(np.maximum(d_plus, d_minus) > crit))
        assert abs(rate - 0.05) < 0.01

    def test_out_of_range_alpha(self):
        for alpha in (0.0, 1.0, -1.0, 2.0):
            with pytest.raises(ValueError):
                ks_critical_value(alpha, 10)

    def test_ks_test_wrapper(self):
        res = ks_test([0.5], lambda x: np.clip(x, 0, 1), alpha=0.05)
        assert res.d_stat == 0.5
        assert res.reject == (res.d_stat > res.critical_value)


class TestCalibrateThreshold:
    @staticmethod
    def _h0_gen(rng):
        return rng.normal(size=60)

    def test_loose_target_gives_min_maximum(self):
        rng = np.random.default_rng(8)
        params = dict(mu0=0.0, sigma0=1.0, window_len=20)
        thr = calibrate_threshold("cusum", self._h0_gen, 0.999, 200, rng, **params)
        stats = []
        rng2 = np.random.default_rng(8)
        for _ in range(200):
            stats.append(glr_statistic_path(self._h0_gen(rng2), 0.0, 1.0, 20).max())
        assert thr == min(stats)

    def test_holdout_fpr(self):
        rng = np.random.default_rng(9)
        params = dict(mu0=0.0, sigma0=1.0, window_len=20)
        thr = calibrate_threshold("cusum", self._h0_gen, 0.1, 2000, rng, **params)
        fresh = np.random.default_rng(10).normal(size=(10_000, 60))
        paths = glr_statistic_paths(fresh, 0.0, 1.0, 20)
        fpr = float(np.mean(paths.max(axis=1) > thr))
        assert fpr <= 0.1 + 0.03

    def test_monotone_in_target(self):
        thresholds = [
            calibrate_threshold(
                "cusum", self._h0_gen, fpr, 500, np.random.default_rng(11),
                mu0=0.0, sigma0=1.0, window_len=20,
            )
            for fpr in (0.05, 0.1, 0.2, 0.5)
        ]
        assert all(a >= b for a, b in zip(thresholds, thresholds[1:]))

    def test_degenerate_generator(self):
        with pytest.raises(CalibrationError):
            calibrate_threshold(
                "cusum", lambda rng: np.zeros(30), 0.1, 200,
                np.random.default_rng(12), mu0=0.0, sigma0=1.0, window_len=10,
            )

    def test_ks_detector_calibration(self):
        uniform = lambda x: np.clip(x, 0.0, 1.0)
        thr = calibrate_threshold(
            "ks", lambda rng: rng.uniform(size=100), 0.05, 1000,
            np.random.default_rng(13), ref_cdf=uniform,
        )
        # close to the asymptotic critical value at the same level
        assert abs(thr - ks_critical_value(0.05, 100)) < 0.02


class TestEvaluateDetection:
    def test_null_attack_matches_fpr(self):
        rng = np.random.default_rng(14)
        params = dict(mu0=0.0, sigma0=1.0, window_len=20)
        gen = lambda r: r.normal(size=60)
        thr = calibrate_threshold("cusum", gen, 0.1, 2000, rng, **params)
        pt = evaluate_detection("cusum", gen, thr, 60, 1000,
                                np.random.default_rng(15), 0.1, **params)
        assert abs(pt.detection_probability - 0.1) <= 0.05

    def test_roc_dominance_in_magnitude(self):
        rng = np.random.default_rng(16)
        params = dict(mu0=0.0, sigma0=1.0, window_len=20)
        gen0 = lambda r: r.normal(size=60)
        thr = calibrate_threshold("cusum", gen0, 0.1, 1000, rng, **params)
        dets = []
        for shift in (0.2, 0.5, 1.0):
            gen1 = lambda r, s=shift: r.normal(size=60) + s
            pt = evaluate_detection("cusum", gen1, thr, 60, 1000,
                                    np.random.default_rng(17), 0.1, **params)
            dets.append(pt.detection_probability)
        assert dets[0] <= dets[1] <= dets[2]


class TestMinSamples:
    uniform = staticmethod(lambda x: np.clip(np.asarray(x, dtype=float), 0.0, 1.0))

    @staticmethod
    def shifted(x):
        # uniform on [0.08, 1.08]: sup distance 0.08 from uniform(0,1)
        return np.clip(np.asarray(x, dtype=float) - 0.08, 0.0, 1.0)

    def test_sup_distance(self):
        grid = np.linspace(-0.5, 1.5, 20001)
        eps, x_star = cdf_sup_distance(self.uniform, self.shifted, grid)
        assert abs(eps - 0.08) < 1e-3

    def test_trivial_miss_target_hits_grid_start(self):
        # strong alternative (uniform stretched to [0, 2], sup distance 0.5
        # at an interior point): a 0.99 miss budget is satisfied immediately
        strong = lambda x: np.clip(np.asarray(x, dtype=float) / 2.0, 0.0, 1.0)
        res = min_samples_for_miss(
            strong, self.uniform, 0.01, 0.99,
            detection_estimator=lambda m: 0.5,
            x_grid=np.linspace(-0.5, 2.5, 20001),
        )
        assert res["m_min"] == 10

    def test_unreachable_raises(self):
        nearly = lambda x: np.clip(np.asarray(x, dtype=float) - 1e-4, 0.0, 1.0)
        with pytest.raises(SampleBudgetError):
            min_samples_for_miss(
                nearly, self.uniform, 0.01, 0.1,
                detection_estimator=lambda m: 0.0,
                x_grid=np.linspace(-0.5, 1.5, 20001),
            )

    def test_monotone_in_miss_target(self):
        grid = np.linspace(-0.5, 1.5, 20001)
        m_strict = min_samples_for_miss(
            self.shifted, self.uniform, 0.01, 0.1,
            detection_estimator=lambda m: 0.0, x_grid=grid)["m_min"]
        m_loose = min_samples_for_miss(
            self.shifted, self.uniform, 0.01, 0.3,
            detection_estimator=lambda m: 0.0, x_grid=grid)["m_min"]
        assert m_strict >= m_loose


class TestFirstCrossing:
    def test_basic(self):
        paths = np.array([[0.0, 1.0, 3.0], [0.0, 0.1, 0.2]])
        np.testing.assert_array_equal(first_crossing_times(paths, 2.0), [2, -1])
