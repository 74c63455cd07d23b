"""Run configuration: INI-style key = value files with strict validation.

Defaults reproduce the reference hyper-parameters: K = -1, gamma = 1,
eps = 2, dropout 0.6, lr 5e-4, 50 epochs, batch 128, hidden 32, q = 16.
Unknown sections or keys are rejected; HYPERVD_SEED overrides the seed.
"""

import configparser
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .model import ModelConfig
from .training import TrainConfig


def _parse_bool(raw, where):
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"config: {where}: expected a boolean, got {raw!r}")


def _parse_int(raw, where):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"config: {where}: expected an integer, got {raw!r}") from None


def _parse_float(raw, where):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"config: {where}: expected a number, got {raw!r}") from None


_MODEL_KEYS = {
    "visual_dim": ("visual_dim", _parse_int),
    "audio_dim": ("audio_dim", _parse_int),
    "hidden_dim": ("hidden_dim", _parse_int),
    "curvature": ("curvature", _parse_float),
    "tau": ("tau", _parse_float),
    "gamma": ("gamma", _parse_float),
    "classifier_eps": ("classifier_eps", _parse_float),
    "dropout": ("dropout", _parse_float),
    "fusion": ("fusion", None),
    "geometry": ("geometry", None),
    "hfsg": ("use_hfsg", _parse_bool),
    "htrg": ("use_htrg", _parse_bool),
    "leaky_slope": ("negative_slope", _parse_float),
}

_TRAIN_KEYS = {
    "epochs": ("epochs", _parse_int),
    "batch_size": ("batch_size", _parse_int),
    "lr": ("lr0", _parse_float),
    "q": ("q", _parse_int),
    "seed": ("seed", _parse_int),
    "beta1": ("beta1", _parse_float),
    "beta2": ("beta2", _parse_float),
    "adam_eps": ("adam_eps", _parse_float),
}

_DATA_KEYS = ("train_manifest", "test_manifest")


@dataclass
class RunConfig:
    model: ModelConfig
    train: TrainConfig
    train_manifest: Path | None = None
    test_manifest: Path | None = None

    @classmethod
    def default(cls):
        return cls(model=ModelConfig(), train=TrainConfig())


def load_config(path):
    """Parse, validate, and apply the HYPERVD_SEED override."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config: {path} does not exist")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as e:
        raise ConfigError(f"config: {path}: {e}") from None

    unknown_sections = set(parser.sections()) - {"model", "train", "data"}
    if unknown_sections:
        raise ConfigError(f"config: unknown sections {sorted(unknown_sections)}")

    cfg = RunConfig.default()
    if parser.has_section("model"):
        for key, raw in parser.items("model"):
            if key not in _MODEL_KEYS:
                raise ConfigError(f"config: unknown key model.{key}")
            attr, parse = _MODEL_KEYS[key]
            setattr(cfg.model, attr, parse(raw, f"model.{key}") if parse else raw.strip())
    if parser.has_section("train"):
        for key, raw in parser.items("train"):
            if key not in _TRAIN_KEYS:
                raise ConfigError(f"config: unknown key train.{key}")
            attr, parse = _TRAIN_KEYS[key]
            setattr(cfg.train, attr, parse(raw, f"train.{key}"))
    if parser.has_section("data"):
        for key, raw in parser.items("data"):
            if key not in _DATA_KEYS:
                raise ConfigError(f"config: unknown key data.{key}")
            setattr(cfg, key, path.parent / raw.strip())

    env_seed = os.environ.get("HYPERVD_SEED")
    if env_seed is not None:
        cfg.train.seed = _parse_int(env_seed, "HYPERVD_SEED")

    cfg.model.validate()
    cfg.train.validate()
    return cfg


def write_config(path, cfg):
    """Serialize a RunConfig back to disk (paths written as given)."""
    lines = [
        "[model]",
        f"visual_dim = {cfg.model.visual_dim}",
        f"audio_dim = {cfg.model.audio_dim}",
        f"hidden_dim = {cfg.model.hidden_dim}",
        f"curvature = {cfg.model.curvature!r}",
        f"tau = {cfg.model.tau!r}",
        f"gamma = {cfg.model.gamma!r}",
        f"classifier_eps = {cfg.model.classifier_eps!r}",
        f"dropout = {cfg.model.dropout!r}",
        f"fusion = {cfg.model.fusion}",
        f"geometry = {cfg.model.geometry}",
        f"hfsg = {'true' if cfg.model.use_hfsg else 'false'}",
        f"htrg = {'true' if cfg.model.use_htrg else 'false'}",
        f"leaky_slope = {cfg.model.negative_slope!r}",
        "",
        "[train]",
        f"epochs = {cfg.train.epochs}",
        f"batch_size = {cfg.train.batch_size}",
        f"lr = {cfg.train.lr0!r}",
        f"q = {cfg.train.q}",
        f"seed = {cfg.train.seed}",
        f"beta1 = {cfg.train.beta1!r}",
        f"beta2 = {cfg.train.beta2!r}",
        f"adam_eps = {cfg.train.adam_eps!r}",
    ]
    if cfg.train_manifest is not None or cfg.test_manifest is not None:
        lines.append("")
        lines.append("[data]")
        if cfg.train_manifest is not None:
            lines.append(f"train_manifest = {cfg.train_manifest}")
        if cfg.test_manifest is not None:
            lines.append(f"test_manifest = {cfg.test_manifest}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
