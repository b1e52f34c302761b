import pytest
import torch

from gan_detector.models import (
    DECODE_BLOCKS,
    DISC_BLOCKS,
    ENCODE_BLOCKS,
    GanConfig,
    GanConfigError,
    build_discriminator,
    build_generator,
)


class TestGenerator:
    def test_output_matches_channel_shape(self):
        g = build_generator(GanConfig())
        out = g(torch.zeros(3, 2, 16, 16))
        assert out.shape == (3, 2, 16, 16)
        assert torch.isfinite(out).all()

    def test_batch_dimension_scales(self):
        g = build_generator(GanConfig())
        a = g(torch.zeros(2, 2, 16, 16))
        b = g(torch.zeros(4, 2, 16, 16))
        assert a.shape[0] == 2 and b.shape[0] == 4
        assert a.shape[1:] == b.shape[1:]

    def test_block_counts(self):
        g = build_generator(GanConfig())
        assert len(g.encoder) == ENCODE_BLOCKS == 4
        assert len(g.decoder) == DECODE_BLOCKS == 4
        for block in g.encoder:
            names = [type(m).__name__ for m in block]
            assert names == ["Conv2d", "BatchNorm2d", "ReLU"]
        for block in g.decoder:
            names = [type(m).__name__ for m in block]
            assert names == ["ConvTranspose2d", "BatchNorm2d", "ReLU"]

    def test_too_small_input_rejected(self):
        with pytest.raises(GanConfigError):
            GanConfig(n_ant=8)
        with pytest.raises(GanConfigError):
            GanConfig(n_sub=12)

    def test_one_gradient_step_reduces_reconstruction(self):
        torch.manual_seed(0)
        cfg = GanConfig()
        g = build_generator(cfg)
        y = torch.randn(16, 2, 16, 16)
        target = torch.randn(16, 2, 16, 16) * 0.1
        opt = torch.optim.SGD(g.parameters(), lr=0.05)
        loss0 = torch.nn.functional.mse_loss(g(y), target)
        loss0.backward()
        opt.step()
        loss1 = torch.nn.functional.mse_loss(g(y), target)
        assert loss1.item() < loss0.item()


class TestDiscriminator:
    def test_scalar_output_per_input(self):
        d = build_discriminator(GanConfig())
        out = d(torch.zeros(5, 2, 16, 16))
        assert out.shape == (5,)

    def test_block_counts_and_layers(self):
        d = build_discriminator(GanConfig())
        assert len(d.features) == DISC_BLOCKS == 4
        for block in d.features:
            names = [type(m).__name__ for m in block]
            assert names == ["Conv2d", "BatchNorm2d", "LeakyReLU", "Dropout2d"]
        assert type(d.output).__name__ == "Linear"
        assert d.output.out_features == 1

    def test_eval_mode_deterministic(self):
        torch.manual_seed(1)
        d = build_discriminator(GanConfig())
        d.eval()
        x = torch.randn(4, 2, 16, 16)
        assert torch.equal(d(x), d(x))

    def test_train_mode_dropout_varies(self):
        torch.manual_seed(2)
        d = build_discriminator(GanConfig(dropout=0.5))
        d.train()
        x = torch.randn(4, 2, 16, 16)
        assert not torch.equal(d(x), d(x))

    def test_one_step_separates_toy_data(self):
        torch.manual_seed(3)
        cfg = GanConfig()
        d = build_discriminator(cfg)
        real = torch.randn(32, 2, 16, 16) + 2.0
        fake = torch.randn(32, 2, 16, 16) - 2.0
        opt = torch.optim.Adam(d.parameters(), lr=1e-3)
        mse = torch.nn.MSELoss()

        def loss_fn():
            return mse(d(real), torch.ones(32)) + mse(d(fake), torch.zeros(32))

        loss0 = loss_fn()
        loss0.backward()
        opt.step()
        d.eval()
        assert loss_fn().item() < loss0.item()


class TestGradientCheck:
    def test_generator_gradients_match_finite_differences(self):
        # float64 end to end; 10-parameter slice, central differences
        torch.manual_seed(4)
        cfg = GanConfig()
        g = build_generator(cfg).double()
        g.eval()  # freeze batch-norm statistics so the map is deterministic
        y = torch.randn(2, 2, 16, 16, dtype=torch.float64)
        target = torch.randn(2, 2, 16, 16, dtype=torch.float64)

        def loss_fn():
            return torch.nn.functional.mse_loss(g(y), target)

        loss = loss_fn()
        loss.backward()
        params = [p for p in g.parameters() if p.grad is not None]
        flat = torch.cat([p.detach().reshape(-1) for p in params])
        grads = torch.cat([p.grad.detach().reshape(-1) for p in params])
        rng = torch.Generator().manual_seed(5)
        picks = torch.randperm(flat.numel(), generator=rng)[:10]
        eps = 1e-5  # large enough that rounding noise stays below truncation
        offsets = torch.cumsum(
            torch.tensor([0] + [p.numel() for p in params]), 0
        )

        def poke(index, delta):
            for pi, p in enumerate(params):
                if offsets[pi] <= index < offsets[pi + 1]:
                    local = index - offsets[pi]
                    with torch.no_grad():
                        p.reshape(-1)[local] += delta
                    return

        for idx in picks.tolist():
            poke(idx, eps)
            hi = loss_fn().item()
            poke(idx, -2 * eps)
            lo = loss_fn().item()
            poke(idx, eps)
            numeric = (hi - lo) / (2 * eps)
            analytic = grads[idx].item()
            denom = max(abs(numeric), abs(analytic), 1e-8)
            assert abs(numeric - analytic) / denom < 1e-3, (
                idx, numeric, analytic
            )
