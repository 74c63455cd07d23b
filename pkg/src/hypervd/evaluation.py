"""Frame-level average precision and score-curve export.

AP is computed from a single descending-score ranking: precision@rank is
accumulated at every positive hit and divided once by the positive count.
Ties are broken by original index (stable sort), precision terms are added
with exact compensated summation (math.fsum), so the value is reproducible
across platforms. The dataset-level metric ranks the concatenated frames of
all test videos; per-video APs are diagnostics only.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, UndefinedMetricError


def average_precision(scores, labels):
    """Area under the precision-recall curve of a binary ranking."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise DimensionError(
            f"eval: scores and labels must be equal-length vectors, got "
            f"{scores.shape} vs {labels.shape}"
        )
    if not np.all((labels == 0) | (labels == 1)):
        raise UndefinedMetricError("eval: labels must be 0/1")
    n_positive = int(labels.sum())
    if n_positive == 0:
        raise UndefinedMetricError("eval: AP undefined without positive labels")
    order = np.argsort(-scores, kind="stable")
    relevant = labels[order].astype(np.int64)
    cumulative = np.cumsum(relevant)
    ranks = np.nonzero(relevant)[0] + 1
    return math.fsum(cumulative[ranks - 1] / ranks) / n_positive


@dataclass
class EvalReport:
    ap: float
    n_frames: int
    n_positive: int
    per_video: list  # (video_id, ap or None when a video has no positives)

    def format(self):
        lines = [
            f"ap: {self.ap!r}",
            f"n_frames: {self.n_frames}",
            f"n_positive: {self.n_positive}",
        ]
        for video_id, ap in self.per_video:
            lines.append(f"video_ap[{video_id}]: {'n/a' if ap is None else repr(ap)}")
        return "\n".join(lines) + "\n"


def evaluate_frames(video_ids, frame_scores, frame_labels):
    """Dataset-level AP over concatenated frames, plus per-video diagnostics."""
    per_video = []
    for video_id, scores, labels in zip(video_ids, frame_scores, frame_labels):
        if int(np.sum(labels)) == 0:
            per_video.append((video_id, None))
        else:
            per_video.append((video_id, average_precision(scores, labels)))
    all_scores = np.concatenate(frame_scores)
    all_labels = np.concatenate(frame_labels)
    return EvalReport(
        ap=average_precision(all_scores, all_labels),
        n_frames=int(all_labels.size),
        n_positive=int(all_labels.sum()),
        per_video=per_video,
    )


def export_curves(video_id, frame_scores, frame_labels, path):
    """Write one frame per row: frame_index, score, label."""
    frame_scores = np.asarray(frame_scores, dtype=np.float64)
    frame_labels = np.asarray(frame_labels)
    if frame_scores.shape != frame_labels.shape:
        raise DimensionError(
            f"eval: {video_id}: scores/labels lengths differ "
            f"({frame_scores.size} vs {frame_labels.size})"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("frame_index,score,label\n")
        for i, (score, label) in enumerate(zip(frame_scores, frame_labels)):
            fh.write(f"{i},{float(score)!r},{int(label)}\n")
