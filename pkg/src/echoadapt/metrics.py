"""Dice overlap scoring for binary segmentation masks.

The score for masks S and P is ``(2*|S & P| + eps) / (|S| + |P| + eps)``;
the epsilon keeps tiny and empty masks stable (two empty masks score 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, PairingError, ParameterError, ShapeMismatchError
from .imgio import list_image_files, read_binary_mask
from .spectral import Image2D

__all__ = [
    "BinaryMask",
    "EvalReport",
    "dice",
    "threshold",
    "evaluate_batch",
    "DEFAULT_EPSILON",
]

DEFAULT_EPSILON = 1e-6


class BinaryMask:
    """Strictly {0, 1} W x H mask."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.array(data, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidInputError(f"mask must be 2D with both sides >= 1, got shape {arr.shape}")
        if not np.all(np.isin(arr, (0, 1))):
            raise InvalidInputError("mask values must be exactly 0 or 1")
        arr = arr.astype(np.uint8)
        arr.setflags(write=False)
        self.data = arr

    @property
    def width(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __repr__(self):
        return f"BinaryMask({self.width}x{self.height}, ones={int(self.data.sum())})"


def dice(s: BinaryMask, s_hat: BinaryMask, epsilon: float = DEFAULT_EPSILON) -> float:
    """Epsilon-stabilized Dice similarity coefficient, in (0, 1]."""
    if s.shape != s_hat.shape:
        raise ShapeMismatchError(f"mask shapes differ: {s.shape} vs {s_hat.shape}")
    if not (epsilon > 0):
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    intersection = int(np.count_nonzero(s.data & s_hat.data))
    total = int(s.data.sum()) + int(s_hat.data.sum())
    return (2.0 * intersection + epsilon) / (total + epsilon)


def threshold(img: Image2D, t: float = 0.5) -> BinaryMask:
    """Binarize a continuous image: pixel > t maps to 1."""
    if not (0.0 <= t <= 1.0):
        raise ParameterError(f"threshold must lie in [0, 1], got {t}")
    return BinaryMask((img.data > t).astype(np.uint8))


@dataclass(frozen=True)
class EvalReport:
    """Per-sample Dice scores with their aggregates."""

    sample_ids: list[str]
    scores: list[float]
    mean: float
    median: float
    std: float
    epsilon: float = DEFAULT_EPSILON

    @classmethod
    def from_scores(cls, sample_ids, scores, epsilon=DEFAULT_EPSILON) -> "EvalReport":
        scores = [float(s) for s in scores]
        arr = np.asarray(scores, dtype=np.float64)
        return cls(
            sample_ids=list(sample_ids),
            scores=scores,
            mean=float(arr.mean()) if arr.size else float("nan"),
            median=float(np.median(arr)) if arr.size else float("nan"),
            std=float(arr.std()) if arr.size else float("nan"),
            epsilon=float(epsilon),
        )

    def to_dict(self) -> dict:
        return {
            "sample_ids": list(self.sample_ids),
            "scores": list(self.scores),
            "mean": self.mean,
            "median": self.median,
            "std": self.std,
            "epsilon": self.epsilon,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        d = json.loads(text)
        return cls(
            sample_ids=list(d["sample_ids"]),
            scores=[float(s) for s in d["scores"]],
            mean=float(d["mean"]),
            median=float(d["median"]),
            std=float(d["std"]),
            epsilon=float(d["epsilon"]),
        )

    def to_table(self) -> str:
        lines = [f"{'sample':<40} {'dice':>10}"]
        for sid, score in zip(self.sample_ids, self.scores):
            lines.append(f"{sid:<40} {score:>10.6f}")
        lines.append(f"{'mean':<40} {self.mean:>10.6f}")
        lines.append(f"{'median':<40} {self.median:>10.6f}")
        lines.append(f"{'std':<40} {self.std:>10.6f}")
        return "\n".join(lines) + "\n"


def evaluate_batch(
    pred_dir: str | Path, gt_dir: str | Path, epsilon: float = DEFAULT_EPSILON
) -> EvalReport:
    """Score every same-named mask pair across two directories.

    Filenames must match one-to-one; any orphan on either side raises
    :class:`PairingError` listing the offenders.
    """
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    pred_files = set(list_image_files(pred_dir))
    gt_files = set(list_image_files(gt_dir))
    only_pred = sorted(pred_files - gt_files)
    only_gt = sorted(gt_files - pred_files)
    if only_pred or only_gt:
        raise PairingError(
            "prediction/ground-truth filenames do not match; "
            f"only in predictions: {only_pred}; only in ground truth: {only_gt}"
        )
    ids = sorted(pred_files)
    scores = []
    for name in ids:
        pred = BinaryMask(read_binary_mask(pred_dir / name).data)
        gt = BinaryMask(read_binary_mask(gt_dir / name).data)
        scores.append(dice(gt, pred, epsilon))
    return EvalReport.from_scores(ids, scores, epsilon)
