"""Command-line entry point.

Subcommands: gen-synth, train, score, eval, ablate, gradcheck. Every command
is reproducible from (config, seed); HYPERVD_SEED overrides the configured
seed. Exit codes: 0 success, 2 config error, 3 data error, 4 numerical
failure.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import data as data_io
from . import training
from .config import load_config
from .errors import ConfigError, DataError, HyperVDError, NumericalError
from .evaluation import evaluate_frames, export_curves
from .model import ModelConfig, build_model, load_checkpoint, save_checkpoint
from .training import VideoBag


def cmd_gen_synth(args):
    dataset = data_io.generate_synthetic(
        args.out,
        seed=args.seed,
        n_train=args.n_train,
        n_test=args.n_test,
        t_range=(args.t_min, args.t_max),
        visual_dim=args.visual_dim,
        audio_dim=args.audio_dim,
        separation=args.separation,
    )
    print(f"wrote {dataset.train_manifest}")
    print(f"wrote {dataset.test_manifest}")
    return 0


def _load_train_eval_bags(cfg):
    if cfg.train_manifest is None or cfg.test_manifest is None:
        raise ConfigError("cli: config needs data.train_manifest and data.test_manifest")
    return data_io.load_bags(cfg.train_manifest), data_io.load_bags(cfg.test_manifest)


def cmd_train(args):
    cfg = load_config(args.config)
    train_bags, eval_bags = _load_train_eval_bags(cfg)
    result = training.train(cfg.model, cfg.train, train_bags, eval_bags)
    save_checkpoint(args.checkpoint, result.model, extra={"seed": cfg.train.seed})
    training.write_history(args.history, result.history)
    print(f"best eval AP {result.best_ap:.4f} at epoch {result.best_epoch}")
    print(f"wrote {args.checkpoint}")
    print(f"wrote {args.history}")
    return 0


def cmd_score(args):
    model = load_checkpoint(args.checkpoint)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for bag in data_io.load_bags(args.manifest):
        snippet_scores = model.forward(bag.visual, bag.audio, training=False).data
        frame_scores = data_io.expand_scores(snippet_scores)
        path = out_dir / f"{bag.video_id}.txt"
        with open(path, "w", encoding="utf-8") as fh:
            for value in frame_scores:
                fh.write(f"{float(value)!r}\n")
    print(f"wrote scores to {out_dir}")
    return 0


def _read_score_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return np.array([float(line) for line in fh if line.strip()])
    except FileNotFoundError:
        raise DataError(f"cli: missing score file {path}") from None
    except ValueError as e:
        raise DataError(f"cli: malformed score file {path}: {e}") from None


def cmd_eval(args):
    video_ids, scores, labels = [], [], []
    for entry in data_io.load_manifest(args.manifest):
        if entry.frame_label_path is None:
            raise DataError(
                f"cli: manifest entry {entry.video_id!r} has no frame labels; "
                "evaluation needs the test split"
            )
        t, _ = data_io.read_header(entry.visual_path)
        frame_labels = data_io.read_frame_labels(entry.frame_label_path, t)
        frame_scores = _read_score_file(Path(args.scores) / f"{entry.video_id}.txt")
        if frame_scores.size != frame_labels.size:
            raise DataError(
                f"cli: {entry.video_id}: {frame_scores.size} scores for "
                f"{frame_labels.size} frame labels"
            )
        video_ids.append(entry.video_id)
        scores.append(frame_scores)
        labels.append(frame_labels)
    report = evaluate_frames(video_ids, scores, labels)
    if args.curves_dir:
        curves = Path(args.curves_dir)
        curves.mkdir(parents=True, exist_ok=True)
        for video_id, s, l in zip(video_ids, scores, labels):
            export_curves(video_id, s, l, curves / f"{video_id}.csv")
    text = report.format()
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


AXES = {
    "fusion": [
        ("detour", {"fusion": "detour"}),
        ("concat", {"fusion": "concat"}),
        ("additive", {"fusion": "additive"}),
        ("gated", {"fusion": "gated"}),
        ("bilinear_concat", {"fusion": "bilinear_concat"}),
    ],
    "branch": [
        ("hfsg_only", {"use_hfsg": True, "use_htrg": False}),
        ("htrg_only", {"use_hfsg": False, "use_htrg": True}),
        ("both", {"use_hfsg": True, "use_htrg": True}),
    ],
    "geometry": [
        ("euclidean", {"geometry": "euclidean"}),
        ("hyperbolic", {"geometry": "hyperbolic"}),
    ],
}


def run_ablation(cfg, axis, seeds, train_bags, eval_bags):
    """Train every variant along one axis for each seed; returns
    {variant: [best eval AP per seed]}."""
    if axis not in AXES:
        raise ConfigError(f"cli: unknown ablation axis {axis!r}")
    results = {}
    for name, overrides in AXES[axis]:
        aps = []
        for seed in seeds:
            model_cfg = replace(cfg.model, **overrides)
            train_cfg = replace(cfg.train, seed=seed)
            outcome = training.train(model_cfg, train_cfg, train_bags, eval_bags)
            aps.append(outcome.best_ap)
        results[name] = aps
    return results


def cmd_ablate(args):
    cfg = load_config(args.config)
    seeds = [int(s) for s in args.seeds.split(",")]
    train_bags, eval_bags = _load_train_eval_bags(cfg)
    results = run_ablation(cfg, args.axis, seeds, train_bags, eval_bags)
    header = "variant\t" + "\t".join(f"seed{s}" for s in seeds) + "\tmean"
    print(f"# ablation axis={args.axis}")
    print(header)
    for name, aps in results.items():
        cells = "\t".join(f"{ap:.4f}" for ap in aps)
        print(f"{name}\t{cells}\t{np.mean(aps):.4f}")
    return 0


def toy_gradcheck_setup(seed=0):
    """Small configuration and two synthetic bags for the gradient contract."""
    cfg = ModelConfig(
        visual_dim=8, audio_dim=4, hidden_dim=3, dropout=0.0, tau=0.5
    )
    rng = np.random.default_rng(seed)
    bags = []
    for i, label in enumerate((1, 0)):
        t = 5
        bags.append(
            VideoBag(
                video_id=f"toy_{i}",
                visual=rng.standard_normal((t, cfg.visual_dim)),
                audio=rng.standard_normal((t, cfg.audio_dim)),
                label=label,
            )
        )
    return cfg, bags


def cmd_gradcheck(args):
    if args.config:
        cfg = load_config(args.config)
        model_cfg = replace(cfg.model, dropout=0.0)
        seed = cfg.train.seed
        q = cfg.train.q
        _, bags = toy_gradcheck_setup(seed)
        rng = np.random.default_rng(seed + 1)
        for bag in bags:
            bag.visual = rng.standard_normal((5, model_cfg.visual_dim))
            bag.audio = rng.standard_normal((5, model_cfg.audio_dim))
    else:
        model_cfg, bags = toy_gradcheck_setup()
        seed, q = 0, 16
    model = build_model(model_cfg, seed=seed)
    report = training.gradcheck(model, bags, q)
    status = "PASS" if report.passed else "FAIL"
    print(
        f"{status}, max rel err {report.max_rel_err:.3e} at {report.worst_param} "
        f"({report.n_params} parameters)"
    )
    for line in report.failures[:20]:
        print(f"  {line}")
    if not report.passed:
        raise NumericalError("cli: gradient check failed the finite-difference contract")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hypervd",
        description="Hyperbolic dual-graph violence detection pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", help="generate a synthetic dataset with manifests")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--n-train", type=int, default=64, help="training videos (default 64)")
    p.add_argument("--n-test", type=int, default=32, help="test videos (default 32)")
    p.add_argument("--t-min", type=int, default=16, help="min snippets per video")
    p.add_argument("--t-max", type=int, default=40, help="max snippets per video")
    p.add_argument("--visual-dim", type=int, default=16, help="visual feature width")
    p.add_argument("--audio-dim", type=int, default=8, help="audio feature width")
    p.add_argument(
        "--separation", type=float, default=4.0,
        help="shift of violent snippets along the hidden direction",
    )
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("train", help="train from a config file")
    p.add_argument("--config", required=True, help="run configuration file")
    p.add_argument("--checkpoint", default="checkpoint.hvdm", help="checkpoint output path")
    p.add_argument("--history", default="history.tsv", help="per-epoch history output path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="score a manifest with a trained checkpoint")
    p.add_argument("--checkpoint", required=True, help="model checkpoint")
    p.add_argument("--manifest", required=True, help="dataset manifest")
    p.add_argument("--out-dir", required=True, help="directory for per-video score files")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="frame-level AP of per-video score files")
    p.add_argument("--scores", required=True, help="directory of <video_id>.txt score files")
    p.add_argument("--manifest", required=True, help="test manifest with frame labels")
    p.add_argument("--report", default=None, help="also write the report to this file")
    p.add_argument("--curves-dir", default=None, help="export per-video score curves here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="comparison table along one ablation axis")
    p.add_argument("--config", required=True, help="base run configuration")
    p.add_argument("--axis", required=True, choices=sorted(AXES), help="ablation axis")
    p.add_argument(
        "--seeds", default="0,1,2,3,4", help="comma-separated seeds (default 0,1,2,3,4)"
    )
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("gradcheck", help="finite-difference check of every gradient")
    p.add_argument(
        "--config", default=None,
        help="optional run config; defaults to the built-in toy setup "
        "(dropout is forced off either way)",
    )
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"hypervd: {e}", file=sys.stderr)
        return 2
    except NumericalError as e:
        print(f"hypervd: {e}", file=sys.stderr)
        return 4
    except DataError as e:
        print(f"hypervd: {e}", file=sys.stderr)
        return 3
    except HyperVDError as e:
        print(f"hypervd: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
