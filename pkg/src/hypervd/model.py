"""End-to-end model assembly and checkpoint serialization.

Pipeline: fuse audio/visual features, lift rows onto the hyperboloid, run the
feature-similarity and temporal-relation graph branches (two hyperbolic
linear + aggregation layers each), concatenate the branch embeddings per
snippet, and classify. The similarity adjacency is recomputed from each
layer's input embeddings; the temporal adjacency is fixed by T and gamma.

The Euclidean GCN baseline mirrors the same wiring without the manifold:
plain linear layers, row-stochastic aggregation, thresholded cosine
similarity, and a sigmoid affine classifier.
"""

import io
import json
import struct
from dataclasses import asdict, dataclass

import numpy as np

from . import autodiff as ad
from . import graphs, nn
from .autodiff import Tensor
from .errors import ConfigError, FormatError
from .fusion import STRATEGIES, fuse, make_fusion
from .lorentz import check_curvature

GEOMETRIES = ("hyperbolic", "euclidean")


@dataclass
class ModelConfig:
    visual_dim: int = 1024
    audio_dim: int = 128
    hidden_dim: int = 32
    curvature: float = -1.0
    tau: float = 0.7
    gamma: float = 1.0
    classifier_eps: float = 2.0
    dropout: float = 0.6
    fusion: str = "detour"
    geometry: str = "hyperbolic"
    use_hfsg: bool = True
    use_htrg: bool = True
    negative_slope: float = 0.01

    def validate(self):
        check_curvature(self.curvature)
        graphs.check_tau(self.tau)
        graphs.check_gamma(self.gamma)
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"model: dropout must be in [0, 1), got {self.dropout}")
        if self.fusion not in STRATEGIES:
            raise ConfigError(f"model: unknown fusion strategy {self.fusion!r}")
        if self.geometry not in GEOMETRIES:
            raise ConfigError(f"model: unknown geometry {self.geometry!r}")
        if not (self.use_hfsg or self.use_htrg):
            raise ConfigError("model: at least one graph branch must be enabled")
        for name in ("visual_dim", "audio_dim", "hidden_dim"):
            if getattr(self, name) < 1:
                raise ConfigError(f"model: {name} must be >= 1")
        return self


def _spatial_to_manifold(spatial, k):
    """Attach the time coordinate sqrt(‖spatial‖^2 - 1/k) to spatial rows."""
    time = ad.sqrt(ad.sum_(spatial * spatial, axis=1, keepdims=True) - 1.0 / k)
    return ad.concat([time, spatial], axis=1)


class HyperVDModel:
    """Dual hyperbolic graph branches over lifted fused features."""

    def __init__(self, cfg, seed=0):
        self.cfg = cfg.validate()
        rng = np.random.default_rng(seed)
        self.fusion = make_fusion(
            cfg.fusion, rng, cfg.visual_dim, cfg.audio_dim, cfg.dropout, cfg.negative_slope
        )
        in_dim = self.fusion.out_dim
        branches = []
        for enabled in (cfg.use_hfsg, cfg.use_htrg):
            if not enabled:
                branches.append(None)
                continue
            branches.append(
                [
                    nn.HyperbolicLinear(
                        rng, in_dim, cfg.hidden_dim,
                        dropout_rate=cfg.dropout, negative_slope=cfg.negative_slope,
                    ),
                    nn.HyperbolicLinear(
                        rng, cfg.hidden_dim, cfg.hidden_dim,
                        dropout_rate=cfg.dropout, negative_slope=cfg.negative_slope,
                    ),
                ]
            )
        self.hfsg_layers, self.htrg_layers = branches
        n_branches = int(cfg.use_hfsg) + int(cfg.use_htrg)
        self.classifier = nn.HyperbolicClassifier(
            rng, n_branches * (cfg.hidden_dim + 1), eps=cfg.classifier_eps
        )

    def _branch(self, layers, xhat, adjacency_for, *, training, rng, trace=None):
        cfg = self.cfg
        h = xhat
        for layer in layers:
            adj = adjacency_for(h)
            z = layer.forward(h, training=training, rng=rng)
            h = nn.aggregate(adj, z, cfg.curvature)
            if trace is not None:
                trace.append(h.data.copy())
        spatial = ad.leaky_relu(h[:, 1:], cfg.negative_slope)
        if training and cfg.dropout > 0.0:
            spatial = ad.dropout(spatial, cfg.dropout, rng)
        out = _spatial_to_manifold(spatial, cfg.curvature)
        if trace is not None:
            trace.append(out.data.copy())
        return out

    def forward(self, xv, xa, *, training=False, rng=None, trace=None):
        cfg = self.cfg
        fused = fuse(self.fusion, xv, xa, training=training, rng=rng)
        xhat = ad.lorentz_lift(fused, cfg.curvature)
        if trace is not None:
            trace["lift"] = xhat.data.copy()
        outputs = []
        if cfg.use_hfsg:
            hfsg_trace = [] if trace is not None else None
            outputs.append(
                self._branch(
                    self.hfsg_layers, xhat,
                    lambda h: graphs.hfsg_adjacency_t(h, cfg.tau, cfg.curvature),
                    training=training, rng=rng, trace=hfsg_trace,
                )
            )
            if trace is not None:
                trace["hfsg"] = hfsg_trace
        if cfg.use_htrg:
            t = fused.shape[0]
            temporal = Tensor(graphs.htrg_adjacency(t, cfg.gamma))
            htrg_trace = [] if trace is not None else None
            outputs.append(
                self._branch(
                    self.htrg_layers, xhat, lambda h: temporal,
                    training=training, rng=rng, trace=htrg_trace,
                )
            )
            if trace is not None:
                trace["htrg"] = htrg_trace
        joint = outputs[0] if len(outputs) == 1 else ad.concat(outputs, axis=1)
        return self.classifier.forward(joint)

    def parameters(self):
        params = self.fusion.parameters("fusion")
        for name, layers in (("hfsg", self.hfsg_layers), ("htrg", self.htrg_layers)):
            if layers is None:
                continue
            for i, layer in enumerate(layers):
                params.update(layer.parameters(f"{name}.{i}"))
        params.update(self.classifier.parameters("classifier"))
        return params


class EuclideanGCNModel:
    """Ablation baseline: same wiring, flat geometry, cosine similarity."""

    def __init__(self, cfg, seed=0):
        self.cfg = cfg.validate()
        rng = np.random.default_rng(seed)
        self.fusion = make_fusion(
            cfg.fusion, rng, cfg.visual_dim, cfg.audio_dim, cfg.dropout, cfg.negative_slope
        )
        in_dim = self.fusion.out_dim
        branches = []
        for enabled in (cfg.use_hfsg, cfg.use_htrg):
            if not enabled:
                branches.append(None)
                continue
            branches.append(
                [nn.Linear(rng, in_dim, cfg.hidden_dim), nn.Linear(rng, cfg.hidden_dim, cfg.hidden_dim)]
            )
        self.hfsg_layers, self.htrg_layers = branches
        n_branches = int(cfg.use_hfsg) + int(cfg.use_htrg)
        self.classifier = nn.Linear(rng, n_branches * cfg.hidden_dim, 1)

    def _branch(self, layers, features, adjacency_for, *, training, rng):
        cfg = self.cfg
        h = features
        for layer in layers:
            adj = adjacency_for(h)
            if training and cfg.dropout > 0.0:
                h = ad.dropout(h, cfg.dropout, rng)
            z = ad.leaky_relu(layer.forward(h), cfg.negative_slope)
            z = adj @ z if isinstance(adj, Tensor) else Tensor(adj) @ z
            h = z
        h = ad.leaky_relu(h, cfg.negative_slope)
        if training and cfg.dropout > 0.0:
            h = ad.dropout(h, cfg.dropout, rng)
        return h

    def forward(self, xv, xa, *, training=False, rng=None, trace=None):
        cfg = self.cfg
        fused = fuse(self.fusion, xv, xa, training=training, rng=rng)
        outputs = []
        if cfg.use_hfsg:
            outputs.append(
                self._branch(
                    self.hfsg_layers, fused,
                    lambda h: graphs.cosine_adjacency(h, cfg.tau),
                    training=training, rng=rng,
                )
            )
        if cfg.use_htrg:
            t = fused.shape[0]
            temporal = Tensor(graphs.row_normalize(graphs.htrg_adjacency(t, cfg.gamma)))
            outputs.append(
                self._branch(
                    self.htrg_layers, fused, lambda h: temporal,
                    training=training, rng=rng,
                )
            )
        joint = outputs[0] if len(outputs) == 1 else ad.concat(outputs, axis=1)
        logits = self.classifier.forward(joint)
        return ad.sigmoid(ad.reshape(logits, (-1,)))

    def parameters(self):
        params = self.fusion.parameters("fusion")
        for name, layers in (("hfsg", self.hfsg_layers), ("htrg", self.htrg_layers)):
            if layers is None:
                continue
            for i, layer in enumerate(layers):
                params.update(layer.parameters(f"{name}.{i}"))
        params.update(self.classifier.parameters("classifier"))
        return params


def build_model(cfg, seed=0):
    cfg.validate()
    cls = HyperVDModel if cfg.geometry == "hyperbolic" else EuclideanGCNModel
    return cls(cfg, seed=seed)


def count_parameters(model):
    """Exact number of learnable scalars in the assembled model."""
    return nn.count_parameters(model.parameters())


# Checkpoint format: magic "HVDM", u16 version, u32 config-JSON length and
# bytes, then per tensor: u16 name length, name, u8 rank, u32 dims,
# float64 little-endian payload. Reload is bit-exact.

CHECKPOINT_MAGIC = b"HVDM"
CHECKPOINT_VERSION = 1


def save_checkpoint(path, model, extra=None):
    cfg_dict = asdict(model.cfg)
    if extra:
        cfg_dict["extra"] = extra
    blob = json.dumps(cfg_dict, sort_keys=True).encode("utf-8")
    buf = io.BytesIO()
    buf.write(CHECKPOINT_MAGIC)
    buf.write(struct.pack("<H", CHECKPOINT_VERSION))
    buf.write(struct.pack("<I", len(blob)))
    buf.write(blob)
    params = model.parameters()
    for name in sorted(params):
        tensor = params[name]
        encoded = name.encode("utf-8")
        data = np.asarray(tensor.data, dtype="<f8", order="C")
        buf.write(struct.pack("<H", len(encoded)))
        buf.write(encoded)
        buf.write(struct.pack("<B", data.ndim))
        for dim in data.shape:
            buf.write(struct.pack("<I", dim))
        buf.write(data.tobytes())
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def _read_exact(fh, n, what):
    data = fh.read(n)
    if len(data) != n:
        raise FormatError(f"model: checkpoint truncated while reading {what}", offset=fh.tell())
    return data


def load_checkpoint(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise FormatError(f"model: bad checkpoint magic {magic!r}", offset=0)
        (version,) = struct.unpack("<H", _read_exact(fh, 2, "version"))
        if version != CHECKPOINT_VERSION:
            raise FormatError(f"model: unsupported checkpoint version {version}", offset=4)
        (cfg_len,) = struct.unpack("<I", _read_exact(fh, 4, "config length"))
        cfg_dict = json.loads(_read_exact(fh, cfg_len, "config block").decode("utf-8"))
        cfg_dict.pop("extra", None)
        cfg = ModelConfig(**cfg_dict)
        model = build_model(cfg, seed=0)
        params = model.parameters()
        seen = set()
        while True:
            head = fh.read(2)
            if not head:
                break
            if len(head) != 2:
                raise FormatError("model: checkpoint truncated in tensor header", offset=fh.tell())
            (name_len,) = struct.unpack("<H", head)
            name = _read_exact(fh, name_len, "tensor name").decode("utf-8")
            (rank,) = struct.unpack("<B", _read_exact(fh, 1, "tensor rank"))
            dims = tuple(
                struct.unpack("<I", _read_exact(fh, 4, "tensor dims"))[0] for _ in range(rank)
            )
            count = int(np.prod(dims)) if dims else 1
            payload = _read_exact(fh, 8 * count, f"tensor {name}")
            if name not in params:
                raise FormatError(f"model: unknown tensor {name!r} in checkpoint")
            if dims != params[name].data.shape:
                raise FormatError(
                    f"model: tensor {name!r} has shape {dims}, expected "
                    f"{params[name].data.shape}"
                )
            params[name].data = np.frombuffer(payload, dtype="<f8").reshape(dims).copy()
            seen.add(name)
        missing = set(params) - seen
        if missing:
            raise FormatError(f"model: checkpoint missing tensors {sorted(missing)}")
    return model
