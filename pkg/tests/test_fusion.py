"""The five audio-visual fusion strategies."""

import numpy as np
import pytest

from hypervd import fusion
from hypervd.errors import ConfigError, DimensionError

D, A = 16, 8


def make(strategy, seed=0, dropout=0.6):
    return fusion.make_fusion(strategy, np.random.default_rng(seed), D, A, dropout)


def inputs(rng, t=7):
    return rng.standard_normal((t, D)), rng.standard_normal((t, A))


class TestShapes:
    @pytest.mark.parametrize("strategy", fusion.STRATEGIES)
    def test_output_width_is_twice_audio(self, strategy):
        rng = np.random.default_rng(1)
        xv, xa = inputs(rng)
        out = fusion.fuse(make(strategy), xv, xa)
        assert out.data.shape == (7, 2 * A)

    def test_full_scale_detour_width(self):
        module = fusion.make_fusion("detour", np.random.default_rng(0), 1024, 128, 0.6)
        assert module.out_dim == 256
        assert module.hidden_dim == 512

    def test_snippet_count_mismatch(self):
        rng = np.random.default_rng(2)
        with pytest.raises(DimensionError):
            fusion.fuse(make("detour"), rng.standard_normal((5, D)), rng.standard_normal((4, A)))

    def test_feature_width_mismatch(self):
        rng = np.random.default_rng(3)
        with pytest.raises(DimensionError):
            fusion.fuse(make("detour"), rng.standard_normal((5, D + 1)), rng.standard_normal((5, A)))

    def test_unknown_strategy(self):
        with pytest.raises(ConfigError):
            fusion.make_fusion("late", np.random.default_rng(0), D, A, 0.0)


class TestDetour:
    def test_audio_passes_through_untouched(self):
        rng = np.random.default_rng(4)
        xv, xa = inputs(rng)
        out = fusion.fuse(make("detour"), xv, xa).data
        np.testing.assert_array_equal(out[:, A:], xa)

    def test_audio_passthrough_in_train_mode(self):
        rng = np.random.default_rng(5)
        xv, xa = inputs(rng)
        out = fusion.fuse(
            make("detour"), xv, xa, training=True, rng=np.random.default_rng(0)
        ).data
        np.testing.assert_array_equal(out[:, A:], xa)

    def test_zero_visual_zero_bias_gives_zero_visual_columns(self):
        rng = np.random.default_rng(6)
        module = make("detour")
        xv = np.zeros((5, D))
        xa = rng.standard_normal((5, A))
        out = fusion.fuse(module, xv, xa).data
        np.testing.assert_array_equal(out[:, :A], np.zeros((5, A)))


class TestLinearity:
    def test_additive_zero_weights_give_zero(self):
        rng = np.random.default_rng(7)
        module = make("additive")
        module.fa.weight.data[:] = 0.0
        module.fv.weight.data[:] = 0.0
        xv, xa = inputs(rng)
        out = fusion.fuse(module, xv, xa).data
        np.testing.assert_array_equal(out, np.zeros_like(out))


class TestProperties:
    @pytest.mark.parametrize("strategy", fusion.STRATEGIES)
    def test_per_snippet_permutation_equivariance(self, strategy):
        rng = np.random.default_rng(8)
        xv, xa = inputs(rng, t=9)
        module = make(strategy)
        perm = rng.permutation(9)
        base = fusion.fuse(module, xv, xa).data
        permuted = fusion.fuse(module, xv[perm], xa[perm]).data
        np.testing.assert_allclose(permuted, base[perm], atol=1e-12)

    @pytest.mark.parametrize("strategy", fusion.STRATEGIES)
    def test_eval_mode_deterministic(self, strategy):
        rng = np.random.default_rng(9)
        xv, xa = inputs(rng)
        module = make(strategy)
        a = fusion.fuse(module, xv, xa).data
        b = fusion.fuse(module, xv, xa).data
        np.testing.assert_array_equal(a, b)

    def test_gradients_flow_to_all_parameters(self):
        from hypervd import autodiff as ad

        rng = np.random.default_rng(10)
        xv, xa = inputs(rng)
        for strategy in fusion.STRATEGIES:
            module = make(strategy)
            out = fusion.fuse(module, xv, xa)
            ad.sum_(out * out).backward()
            for name, p in module.parameters("f").items():
                assert p.grad is not None, f"{strategy}: no gradient for {name}"
