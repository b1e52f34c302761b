import numpy as np
import pytest

from beamsec.channel import ChannelState, sample_rayleigh_block
from beamsec.csi import (
    CsiErrorModel,
    csi_error_samples,
    estimate_csi,
    estimation_error_var,
    transmit_pilot,
    unit_pilot,
)
from beamsec.detection import ks_test


def _channel(v) -> ChannelState:
    return ChannelState(h=np.asarray(v, dtype=complex)[:, None])


class TestTransmitPilot:
    def test_noiseless_columns_equal_channel(self):
        h = _channel([1 + 2j, -0.5j, 3.0])
        sig = transmit_pilot(h, unit_pilot(4), 0.0, np.random.default_rng(0))
        for t in range(4):
            np.testing.assert_array_equal(sig.y[:, t], h.h[:, 0])

    def test_pure_noise_variance(self):
        h = _channel(np.zeros(100))
        sig = transmit_pilot(h, unit_pilot(100), 0.5, np.random.default_rng(1))
        emp = np.mean(np.abs(sig.y) ** 2)
        assert abs(emp - 0.5) / 0.5 < 0.05

    def test_seed_reproducible(self):
        h = _channel([1.0, 2.0])
        a = transmit_pilot(h, unit_pilot(8), 0.1, np.random.default_rng(3))
        b = transmit_pilot(h, unit_pilot(8), 0.1, np.random.default_rng(3))
        assert np.array_equal(a.y, b.y)

    def test_non_unit_pilot_rejected(self):
        h = _channel([1.0])
        with pytest.raises(ValueError):
            transmit_pilot(h, np.array([2.0 + 0j]), 0.0, np.random.default_rng(0))


class TestEstimateCsi:
    def test_noiseless_exact(self):
        h = _channel([1 + 1j, 2 - 0.5j])
        pilot = np.exp(1j * np.array([0.3, -1.0, 2.2]))
        sig = transmit_pilot(h, pilot, 0.0, np.random.default_rng(0))
        rep = estimate_csi(sig)
        np.testing.assert_allclose(rep.h_hat.h, h.h, atol=1e-12)
        assert not rep.tampered

    def test_error_variance_scales_with_pilots(self):
        rng = np.random.default_rng(4)
        noise_var = 0.1
        for n_pilot in (1, 4, 16):
            errs = []
            h = _channel(np.zeros(500))
            for _ in range(20):
                sig = transmit_pilot(h, unit_pilot(n_pilot), noise_var, rng)
                rep = estimate_csi(sig)
                errs.append(np.abs(rep.h_hat.h[:, 0]) ** 2)
            emp = float(np.mean(errs))
            expected = estimation_error_var(noise_var, n_pilot)
            assert abs(emp - expected) / expected < 0.10

    def test_error_magnitudes_match_rayleigh_reference(self):
        # LS error magnitudes against the model's Rayleigh law, checked with
        # the KS machinery at significance 0.01 on 10^4 samples
        rng = np.random.default_rng(5)
        noise_var, n_pilot = 0.1, 10
        h = sample_rayleigh_block(10_000, 1, 1.0, rng)
        sig = transmit_pilot(h, unit_pilot(n_pilot), noise_var, rng)
        rep = estimate_csi(sig)
        err = np.abs(rep.h_hat.h - h.h).ravel()
        model = CsiErrorModel(sigma_e2=estimation_error_var(noise_var, n_pilot))
        res = ks_test(err, model.error_magnitude_cdf, alpha=0.01)
        assert not res.reject

    def test_unbiased(self):
        rng = np.random.default_rng(6)
        h = _channel(np.zeros(10_000))
        sig = transmit_pilot(h, unit_pilot(4), 0.1, rng)
        rep = estimate_csi(sig)
        sigma_e2 = estimation_error_var(0.1, 4)
        mean_err = abs(np.mean(rep.h_hat.h))
        assert mean_err < 3 * np.sqrt(sigma_e2 / 10_000)

    def test_phase_shift_consistent(self):
        rng = np.random.default_rng(7)
        h = sample_rayleigh_block(16, 1, 1.0, rng)
        sig = transmit_pilot(h, unit_pilot(4), 0.2, rng)
        rep = estimate_csi(sig)
        np.testing.assert_array_equal(rep.phase_shift, np.angle(rep.h_hat.h[:, 0]))
        assert np.all(rep.phase_shift > -np.pi) and np.all(rep.phase_shift <= np.pi)


class TestCsiErrorSamples:
    def test_identical_reports_give_zero(self):
        h = sample_rayleigh_block(4, 2, 1.0, np.random.default_rng(8))
        rep = estimate_csi(
            transmit_pilot(h, unit_pilot(2), 0.0, np.random.default_rng(0))
        )
        # single-subcarrier estimate against the matching reference column
        ref = ChannelState(h=h.h[:, :1])
        np.testing.assert_allclose(csi_error_samples(rep, ref), 0.0, atol=1e-12)

    def test_constant_offset(self):
        h = _channel([1.0, 2.0, 3.0])
        shifted = ChannelState(h=h.h + (0.3 - 0.4j))
        rep = estimate_csi(
            transmit_pilot(shifted, unit_pilot(1), 0.0, np.random.default_rng(0))
        )
        samples = csi_error_samples(rep, h)
        np.testing.assert_allclose(samples, 0.5, atol=1e-12)

    def test_untampered_stream_is_ks_consistent(self):
        rng = np.random.default_rng(9)
        noise_var, n_pilot = 0.2, 8
        model = CsiErrorModel(sigma_e2=estimation_error_var(noise_var, n_pilot))
        h = sample_rayleigh_block(5000, 1, 1.0, rng)
        rep = estimate_csi(transmit_pilot(h, unit_pilot(n_pilot), noise_var, rng))
        samples = csi_error_samples(rep, h)
        assert not ks_test(samples, model.error_magnitude_cdf, alpha=0.01).reject

    def test_dimension_mismatch(self):
        h = _channel([1.0, 2.0])
        rep = estimate_csi(
            transmit_pilot(h, unit_pilot(1), 0.0, np.random.default_rng(0))
        )
        with pytest.raises(ValueError):
            csi_error_samples(rep, _channel([1.0, 2.0, 3.0]))
