"""Feature files, manifests, synthetic datasets, and score expansion.

Feature matrices are stored as "HVDF" files: 4-byte magic, u16 version,
u32 rows, u32 cols (little-endian), then rows*cols float32 values row-major.
Storage is float32 to mirror upstream feature extractors; all computation
happens in float64.

A manifest is comma-delimited text, one video per line:
    video_id,visual_path,audio_path,label[,frame_label_path]
Paths are relative to the manifest's directory; the frame-label file (one
0/1 per line, 16 entries per snippet) appears on test-split lines only.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, DimensionError, FormatError
from .training import VideoBag

FEATURE_MAGIC = b"HVDF"
FEATURE_VERSION = 1
FRAMES_PER_SNIPPET = 16
_HEADER = struct.Struct("<4sHII")


def write_features(path, matrix):
    """Write a 2-D float matrix; payload is float32 little-endian."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise DimensionError(f"data: feature matrix must be 2-D, got {matrix.ndim}-D")
    if matrix.size and not np.all(np.isfinite(matrix)):
        raise DataError("data: refusing to write non-finite features")
    payload = np.ascontiguousarray(matrix, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FEATURE_MAGIC, FEATURE_VERSION, *matrix.shape))
        fh.write(payload.tobytes())


def read_header(path):
    """(rows, cols) from a feature file without loading the payload."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
    if len(head) < _HEADER.size:
        raise FormatError(f"data: {path}: truncated header", offset=len(head))
    magic, version, rows, cols = _HEADER.unpack(head)
    if magic != FEATURE_MAGIC:
        raise FormatError(f"data: {path}: bad magic {magic!r}", offset=0)
    if version != FEATURE_VERSION:
        raise FormatError(f"data: {path}: unsupported version {version}", offset=4)
    return rows, cols


def read_features(path):
    """Read a feature file back as float32; bitwise inverse of write_features."""
    rows, cols = read_header(path)
    expected = 4 * rows * cols
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size)
        payload = fh.read()
    if len(payload) != expected:
        raise FormatError(
            f"data: {path}: payload is {len(payload)} bytes, expected {expected}",
            offset=_HEADER.size + min(len(payload), expected),
        )
    matrix = np.frombuffer(payload, dtype="<f4").reshape(rows, cols)
    if matrix.size and not np.all(np.isfinite(matrix)):
        bad = int(np.flatnonzero(~np.isfinite(matrix.reshape(-1)))[0])
        raise FormatError(
            f"data: {path}: non-finite value at element {bad}",
            offset=_HEADER.size + 4 * bad,
        )
    return matrix.copy()


def write_frame_labels(path, labels):
    with open(path, "w", encoding="utf-8") as fh:
        for value in labels:
            fh.write(f"{int(value)}\n")


def read_frame_labels(path, t):
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if line not in ("0", "1"):
                raise DataError(f"data: {path}:{line_no}: frame labels must be 0 or 1")
            values.append(int(line))
    if len(values) != FRAMES_PER_SNIPPET * t:
        raise DataError(
            f"data: {path}: {len(values)} frame labels for {t} snippets "
            f"(expected {FRAMES_PER_SNIPPET * t})"
        )
    return np.array(values, dtype=np.int64)


@dataclass
class ManifestEntry:
    video_id: str
    visual_path: Path
    audio_path: Path
    label: int
    frame_label_path: Path | None = None


def load_manifest(path):
    """Parse and validate a manifest; dangling paths and T mismatches fail."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"data: manifest {path} does not exist")
    base = path.parent
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) not in (4, 5):
                raise DataError(f"data: {path}:{line_no}: expected 4 or 5 fields")
            video_id, visual, audio, label = parts[:4]
            if label not in ("0", "1"):
                raise DataError(f"data: {path}:{line_no}: label must be 0 or 1")
            entry = ManifestEntry(
                video_id=video_id,
                visual_path=base / visual,
                audio_path=base / audio,
                label=int(label),
                frame_label_path=base / parts[4] if len(parts) == 5 else None,
            )
            for p in (entry.visual_path, entry.audio_path, entry.frame_label_path):
                if p is not None and not p.exists():
                    raise DataError(f"data: {path}:{line_no}: missing file {p}")
            t_v, _ = read_header(entry.visual_path)
            t_a, _ = read_header(entry.audio_path)
            if t_v != t_a:
                raise DataError(
                    f"data: {path}:{line_no}: snippet counts differ "
                    f"(visual {t_v}, audio {t_a})"
                )
            entries.append(entry)
    if not entries:
        raise DataError(f"data: manifest {path} is empty")
    return entries


def load_bags(manifest_path):
    """Manifest -> list of VideoBag with float64 features."""
    bags = []
    for entry in load_manifest(manifest_path):
        visual = read_features(entry.visual_path).astype(np.float64)
        audio = read_features(entry.audio_path).astype(np.float64)
        frame_labels = None
        if entry.frame_label_path is not None:
            frame_labels = read_frame_labels(entry.frame_label_path, visual.shape[0])
        bags.append(
            VideoBag(
                video_id=entry.video_id,
                visual=visual,
                audio=audio,
                label=entry.label,
                frame_labels=frame_labels,
            )
        )
    return bags


def expand_scores(snippet_scores):
    """Repeat each snippet score over its 16 frames, order preserved."""
    snippet_scores = np.asarray(snippet_scores, dtype=np.float64)
    return np.repeat(snippet_scores, FRAMES_PER_SNIPPET)


# Synthetic data ------------------------------------------------------------


@dataclass
class SyntheticDataset:
    out_dir: Path
    train_manifest: Path
    test_manifest: Path
    visual_direction: np.ndarray
    audio_direction: np.ndarray
    separation: float


def _unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _make_video(rng, t, visual_dim, audio_dim, violent, directions, separation):
    visual = rng.standard_normal((t, visual_dim))
    audio = rng.standard_normal((t, audio_dim))
    snippet_labels = np.zeros(t, dtype=np.int64)
    if violent:
        # contiguous violent region covering 10-50% of snippets
        length = max(1, int(round(t * rng.uniform(0.1, 0.5))))
        start = int(rng.integers(0, t - length + 1))
        snippet_labels[start : start + length] = 1
        visual[start : start + length] += separation * directions[0]
        audio[start : start + length] += separation * directions[1]
    return visual, audio, snippet_labels


def generate_synthetic(
    out_dir,
    seed,
    n_train,
    n_test,
    t_range=(16, 40),
    visual_dim=16,
    audio_dim=8,
    separation=4.0,
):
    """Write a balanced two-blob dataset with contiguous violent regions.

    Byte-identical output for identical arguments: file contents depend only
    on the RNG stream and fixed iteration order.
    """
    if separation < 0:
        raise DataError(f"data: separation must be >= 0, got {separation}")
    t_lo, t_hi = t_range
    if not (1 <= t_lo <= t_hi):
        raise DataError(f"data: bad T range {t_range}")
    out_dir = Path(out_dir)
    (out_dir / "features").mkdir(parents=True, exist_ok=True)
    (out_dir / "labels").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    directions = (_unit(rng, visual_dim), _unit(rng, audio_dim))

    def make_split(split, n_videos, with_frame_labels):
        lines = []
        labels = np.array([1] * (n_videos // 2) + [0] * (n_videos - n_videos // 2))
        labels = labels[rng.permutation(n_videos)]
        for i in range(n_videos):
            video_id = f"{split}_{i:04d}"
            t = int(rng.integers(t_lo, t_hi + 1))
            visual, audio, snippet_labels = _make_video(
                rng, t, visual_dim, audio_dim, bool(labels[i]), directions, separation
            )
            visual_rel = f"features/{video_id}_v.hvdf"
            audio_rel = f"features/{video_id}_a.hvdf"
            write_features(out_dir / visual_rel, visual)
            write_features(out_dir / audio_rel, audio)
            fields = [video_id, visual_rel, audio_rel, str(int(labels[i]))]
            if with_frame_labels:
                label_rel = f"labels/{video_id}.txt"
                write_frame_labels(
                    out_dir / label_rel, np.repeat(snippet_labels, FRAMES_PER_SNIPPET)
                )
                fields.append(label_rel)
            lines.append(",".join(fields))
        manifest = out_dir / f"{split}.manifest"
        manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return manifest

    train_manifest = make_split("train", n_train, with_frame_labels=False)
    test_manifest = make_split("test", n_test, with_frame_labels=True)
    return SyntheticDataset(
        out_dir=out_dir,
        train_manifest=train_manifest,
        test_manifest=test_manifest,
        visual_direction=directions[0],
        audio_direction=directions[1],
        separation=float(separation),
    )
