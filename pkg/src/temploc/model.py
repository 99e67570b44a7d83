"""Linear per-class, per-part frame scorer over user-supplied feature vectors.

Each class gets three affine scoring heads (start/middle/end) over the
frame features, producing the three score tracks the window search
consumes.  The scorer is exactly differentiable in its weights, which is
what the structured training loop relies on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import PartScores

__all__ = [
    "PART_START",
    "PART_MIDDLE",
    "PART_END",
    "ModelParams",
    "as_feature_matrix",
    "init_params",
    "score_frames",
    "save_checkpoint",
    "load_checkpoint",
]

PART_START, PART_MIDDLE, PART_END = 0, 1, 2

_CHECKPOINT_FORMAT = "temploc-checkpoint"
_CHECKPOINT_VERSION = 1


def as_feature_matrix(features) -> np.ndarray:
    """Validate and coerce an (n, d) frame-feature matrix to float64."""
    arr = np.asarray(features, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"features must be 2-dimensional (frames x dims), got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"features must be non-empty, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("features contain non-finite values")
    return arr


@dataclass
class ModelParams:
    """Weights (C x 3 x d) and biases (C x 3) of the linear scorer."""

    num_classes: int
    dim: int
    weights: np.ndarray
    biases: np.ndarray

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        expected_w = (self.num_classes, 3, self.dim)
        expected_b = (self.num_classes, 3)
        if self.weights.shape != expected_w:
            raise ValueError(f"weights shape {self.weights.shape} != {expected_w}")
        if self.biases.shape != expected_b:
            raise ValueError(f"biases shape {self.biases.shape} != {expected_b}")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.biases).all()):
            raise ValueError("parameters contain non-finite values")

    def copy(self) -> "ModelParams":
        return ModelParams(self.num_classes, self.dim, self.weights.copy(), self.biases.copy())


def init_params(num_classes: int, dim: int, seed: int = 0, scale: float = 0.01) -> ModelParams:
    """Seeded uniform weights in [-scale, scale], zero biases."""
    if num_classes < 1 or dim < 1:
        raise ValueError(f"need num_classes >= 1 and dim >= 1, got {num_classes}, {dim}")
    if scale < 0:
        raise ValueError(f"scale must be >= 0, got {scale}")
    rng = np.random.default_rng(seed)
    weights = rng.uniform(-scale, scale, size=(num_classes, 3, dim))
    return ModelParams(num_classes, dim, weights, np.zeros((num_classes, 3)))


def score_frames(params: ModelParams, features, class_id: int) -> PartScores:
    """Per-frame start/middle/end tracks for one class: features @ w.T + b."""
    feats = as_feature_matrix(features)
    if feats.shape[1] != params.dim:
        raise ValueError(f"feature dim {feats.shape[1]} != model dim {params.dim}")
    if not (0 <= class_id < params.num_classes):
        raise ValueError(f"class_id {class_id} out of range [0, {params.num_classes})")
    tracks = feats @ params.weights[class_id].T + params.biases[class_id]
    return PartScores(tracks[:, PART_START], tracks[:, PART_MIDDLE], tracks[:, PART_END])


def save_checkpoint(params: ModelParams, path, class_names: list[str] | None = None) -> None:
    """Write a versioned JSON checkpoint; floats round-trip bit-exactly."""
    if class_names is not None and len(class_names) != params.num_classes:
        raise ValueError(f"{len(class_names)} class names for {params.num_classes} classes")
    doc = {
        "format": _CHECKPOINT_FORMAT,
        "version": _CHECKPOINT_VERSION,
        "num_classes": params.num_classes,
        "dim": params.dim,
        "class_names": class_names or [f"class{c}" for c in range(params.num_classes)],
        "weights": params.weights.tolist(),
        "biases": params.biases.tolist(),
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")


def _read_checkpoint(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != _CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a model checkpoint")
    if doc.get("version") != _CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {doc.get('version')}")
    return doc


def load_checkpoint(path) -> ModelParams:
    doc = _read_checkpoint(path)
    return ModelParams(doc["num_classes"], doc["dim"], doc["weights"], doc["biases"])


def read_checkpoint_class_names(path) -> list[str]:
    return list(_read_checkpoint(path)["class_names"])
