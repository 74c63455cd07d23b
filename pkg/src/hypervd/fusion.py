"""Audio-visual fusion strategies.

All five schemes are per-snippet maps from (T x D visual, T x d audio) to a
T x 2d fused sequence. Detour fusion — the method of record — sends only the
visual stream through a two-layer stack (D -> D/2 -> d, LeakyReLU + dropout
after each layer) and concatenates the raw audio, so the audio columns pass
through untouched. The other four exist for the fusion ablation.
"""

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ConfigError, DimensionError
from .nn import Linear

STRATEGIES = ("detour", "concat", "additive", "gated", "bilinear_concat")


def _check_inputs(xv, xa, visual_dim, audio_dim):
    if xv.shape[0] != xa.shape[0]:
        raise DimensionError(
            f"fusion: snippet counts misaligned (visual T={xv.shape[0]}, "
            f"audio T={xa.shape[0]})"
        )
    if xv.shape[1] != visual_dim or xa.shape[1] != audio_dim:
        raise DimensionError(
            f"fusion: expected widths ({visual_dim}, {audio_dim}), "
            f"got ({xv.shape[1]}, {xa.shape[1]})"
        )


class _FusionBase:
    def __init__(self, visual_dim, audio_dim, dropout_rate, negative_slope):
        self.visual_dim = visual_dim
        self.audio_dim = audio_dim
        self.out_dim = 2 * audio_dim
        self.hidden_dim = max(1, visual_dim // 2)
        self.dropout_rate = float(dropout_rate)
        self.negative_slope = float(negative_slope)

    def _maybe_dropout(self, x, training, rng):
        if training and self.dropout_rate > 0.0:
            return ad.dropout(x, self.dropout_rate, rng)
        return x


class DetourFusion(_FusionBase):
    def __init__(self, rng, visual_dim, audio_dim, dropout_rate, negative_slope):
        super().__init__(visual_dim, audio_dim, dropout_rate, negative_slope)
        self.fc1 = Linear(rng, visual_dim, self.hidden_dim)
        self.fc2 = Linear(rng, self.hidden_dim, audio_dim)

    def forward(self, xv, xa, *, training=False, rng=None):
        h = ad.leaky_relu(self.fc1.forward(xv), self.negative_slope)
        h = self._maybe_dropout(h, training, rng)
        h = ad.leaky_relu(self.fc2.forward(h), self.negative_slope)
        h = self._maybe_dropout(h, training, rng)
        return ad.concat([h, xa], axis=1)

    def parameters(self, prefix):
        return {**self.fc1.parameters(f"{prefix}.fc1"), **self.fc2.parameters(f"{prefix}.fc2")}


class ConcatFusion(_FusionBase):
    def __init__(self, rng, visual_dim, audio_dim, dropout_rate, negative_slope):
        super().__init__(visual_dim, audio_dim, dropout_rate, negative_slope)
        self.fc1 = Linear(rng, visual_dim + audio_dim, self.hidden_dim)
        self.fc2 = Linear(rng, self.hidden_dim, self.out_dim)

    def forward(self, xv, xa, *, training=False, rng=None):
        h = ad.concat([xv, xa], axis=1)
        h = ad.leaky_relu(self.fc1.forward(h), self.negative_slope)
        h = self._maybe_dropout(h, training, rng)
        h = ad.leaky_relu(self.fc2.forward(h), self.negative_slope)
        return self._maybe_dropout(h, training, rng)

    def parameters(self, prefix):
        return {**self.fc1.parameters(f"{prefix}.fc1"), **self.fc2.parameters(f"{prefix}.fc2")}


class AdditiveFusion(_FusionBase):
    def __init__(self, rng, visual_dim, audio_dim, dropout_rate, negative_slope):
        super().__init__(visual_dim, audio_dim, dropout_rate, negative_slope)
        self.fa = Linear(rng, audio_dim, self.out_dim)
        self.fv = Linear(rng, visual_dim, self.out_dim)

    def forward(self, xv, xa, *, training=False, rng=None):
        h = self.fa.forward(xa) + self.fv.forward(xv)
        return self._maybe_dropout(h, training, rng)

    def parameters(self, prefix):
        return {**self.fa.parameters(f"{prefix}.fa"), **self.fv.parameters(f"{prefix}.fv")}


class GatedFusion(_FusionBase):
    """Audio gated by the visual stream through a sigmoid, then remixed.

    U, V, W are bare weight matrices, as the scheme is written.
    """

    def __init__(self, rng, visual_dim, audio_dim, dropout_rate, negative_slope):
        super().__init__(visual_dim, audio_dim, dropout_rate, negative_slope)
        self.u = Linear(rng, audio_dim, self.out_dim, bias=False)
        self.v = Linear(rng, visual_dim, self.out_dim, bias=False)
        self.w = Linear(rng, self.out_dim, self.out_dim, bias=False)

    def forward(self, xv, xa, *, training=False, rng=None):
        gated = self.u.forward(xa) * ad.sigmoid(self.v.forward(xv))
        return self._maybe_dropout(self.w.forward(gated), training, rng)

    def parameters(self, prefix):
        return {
            **self.u.parameters(f"{prefix}.u"),
            **self.v.parameters(f"{prefix}.v"),
            **self.w.parameters(f"{prefix}.w"),
        }


class BilinearConcatFusion(_FusionBase):
    """Each modality through one bare projection, then concatenated."""

    def __init__(self, rng, visual_dim, audio_dim, dropout_rate, negative_slope):
        super().__init__(visual_dim, audio_dim, dropout_rate, negative_slope)
        self.u = Linear(rng, audio_dim, audio_dim, bias=False)
        self.v = Linear(rng, visual_dim, audio_dim, bias=False)

    def forward(self, xv, xa, *, training=False, rng=None):
        h = ad.concat([self.u.forward(xa), self.v.forward(xv)], axis=1)
        return self._maybe_dropout(h, training, rng)

    def parameters(self, prefix):
        return {**self.u.parameters(f"{prefix}.u"), **self.v.parameters(f"{prefix}.v")}


_CLASSES = {
    "detour": DetourFusion,
    "concat": ConcatFusion,
    "additive": AdditiveFusion,
    "gated": GatedFusion,
    "bilinear_concat": BilinearConcatFusion,
}


def make_fusion(strategy, rng, visual_dim, audio_dim, dropout_rate=0.6, negative_slope=0.01):
    if strategy not in _CLASSES:
        raise ConfigError(
            f"fusion: unknown strategy {strategy!r}; choose from {STRATEGIES}"
        )
    return _CLASSES[strategy](rng, visual_dim, audio_dim, dropout_rate, negative_slope)


def fuse(module, xv, xa, *, training=False, rng=None):
    """Run a fusion module on plain arrays or tensors, with shape checks."""
    xv = xv if isinstance(xv, Tensor) else Tensor(np.asarray(xv, dtype=np.float64))
    xa = xa if isinstance(xa, Tensor) else Tensor(np.asarray(xa, dtype=np.float64))
    _check_inputs(xv.data, xa.data, module.visual_dim, module.audio_dim)
    return module.forward(xv, xa, training=training, rng=rng)
