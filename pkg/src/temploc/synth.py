"""Seeded synthetic data: feature sequences with plantable action windows.

Background frames draw i.i.d. Gaussian features.  Inside a planted window
of class c, the start frame adds the signal magnitude to coordinate 3c,
every middle frame to coordinate 3c+1, and the end frame to 3c+2, so with
dim >= 3 * num_classes a linear scorer that reads those coordinates
separates actions from background exactly when the noise is zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Window
from .model import ModelParams

__all__ = ["SynthConfig", "DatasetPaths", "generate_sequence", "generate_dataset", "signature_params", "class_name"]


@dataclass(frozen=True)
class SynthConfig:
    num_classes: int = 3
    dim: int = 9
    train_clips: int = 200
    test_sequences: int = 20
    train_clip_length: tuple[int, int] = (40, 80)
    sequence_length: tuple[int, int] = (200, 400)
    windows_per_sequence: tuple[int, int] = (2, 4)
    window_length: tuple[int, int] = (6, 12)
    # Sequences also carry unannotated middle-signature-only segments:
    # sustained "action-like" activity with no start/end boundary, the case
    # that separates order-aware search from plain frame averaging.  Train
    # clips see a few as well so the margin loss can learn to discount them.
    distractors_per_sequence: tuple[int, int] = (2, 4)
    train_distractors_per_clip: tuple[int, int] = (1, 2)
    noise_std: float = 0.3
    part_signal: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_classes < 1:
            raise ValueError(f"num_classes must be >= 1, got {self.num_classes}")
        if self.dim < 3 * self.num_classes:
            raise ValueError(
                f"dim must be >= 3 * num_classes ({3 * self.num_classes}) for the part signatures, got {self.dim}"
            )
        for name in (
            "train_clip_length",
            "sequence_length",
            "windows_per_sequence",
            "window_length",
            "distractors_per_sequence",
            "train_distractors_per_clip",
        ):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} range ({lo}, {hi}) is empty")
        if self.window_length[0] < 2:
            raise ValueError(f"window_length must start at >= 2, got {self.window_length[0]}")
        if self.windows_per_sequence[0] < 0 or self.distractors_per_sequence[0] < 0:
            raise ValueError("segment counts must be non-negative")
        if self.noise_std < 0:
            raise ValueError(f"noise_std must be >= 0, got {self.noise_std}")


def class_name(class_id: int) -> str:
    return f"class{class_id}"


def signature_params(config: SynthConfig, boundary_gain: float = 1.0) -> ModelParams:
    """The planting signature as model weights.

    With ``boundary_gain`` large enough (roughly the clip length), this is a
    zero-structured-loss witness for the train split at zero noise: the
    start/end spikes then out-margin any window over distractor or
    background frames by more than its task loss.
    """
    weights = np.zeros((config.num_classes, 3, config.dim))
    for c in range(config.num_classes):
        weights[c, 0, 3 * c] = boundary_gain
        weights[c, 1, 3 * c + 1] = 1.0
        weights[c, 2, 3 * c + 2] = boundary_gain
    return ModelParams(config.num_classes, config.dim, weights, np.zeros((config.num_classes, 3)))


def _plant(features: np.ndarray, window: Window, class_id: int, signal: float, middle_only: bool = False) -> None:
    if middle_only:
        features[window.start - 1 : window.end, 3 * class_id + 1] += signal
        return
    features[window.start - 1, 3 * class_id] += signal
    if window.length > 2:
        features[window.start : window.end - 1, 3 * class_id + 1] += signal
    features[window.end - 1, 3 * class_id + 2] += signal


def generate_sequence(
    config: SynthConfig,
    rng: np.random.Generator,
    length_range: tuple[int, int] | None = None,
    windows_range: tuple[int, int] | None = None,
    distractors_range: tuple[int, int] | None = None,
) -> tuple[np.ndarray, list[tuple[Window, int]]]:
    """One sequence: (n, dim) features plus (window, class) annotations.

    Planted segments (annotated windows and unannotated middle-only
    distractors) never overlap and keep at least 2 background frames
    between neighbours.  Raises ValueError when the drawn segments cannot
    be packed into the drawn sequence length.
    """
    lo, hi = length_range or config.sequence_length
    wlo, whi = windows_range or config.windows_per_sequence
    dlo, dhi = distractors_range if distractors_range is not None else config.distractors_per_sequence
    n = int(rng.integers(lo, hi + 1))
    count = int(rng.integers(wlo, whi + 1))
    dcount = int(rng.integers(dlo, dhi + 1))
    total = count + dcount
    lengths = [int(rng.integers(config.window_length[0], config.window_length[1] + 1)) for _ in range(total)]
    classes = [int(rng.integers(0, config.num_classes)) for _ in range(total)]
    required = sum(lengths) + 2 * max(0, total - 1)
    if required > n:
        raise ValueError(f"cannot pack {total} segments totalling {required} frames into {n}")
    slack = n - required
    features = rng.normal(0.0, config.noise_std, size=(n, config.dim)) if config.noise_std > 0 else np.zeros((n, config.dim))
    annotations: list[tuple[Window, int]] = []
    if total:
        # Interleave real windows and distractors in random order.
        is_window = np.zeros(total, dtype=bool)
        is_window[rng.permutation(total)[:count]] = True
        gaps = rng.multinomial(slack, np.full(total + 1, 1.0 / (total + 1)))
        cursor = 1 + int(gaps[0])
        for i in range(total):
            window = Window(cursor, cursor + lengths[i] - 1)
            _plant(features, window, classes[i], config.part_signal, middle_only=not is_window[i])
            if is_window[i]:
                annotations.append((window, classes[i]))
            cursor = window.end + 1 + 2 + int(gaps[i + 1])
    return features, annotations


@dataclass(frozen=True)
class DatasetPaths:
    root: Path
    train_manifest: Path
    test_manifest: Path
    annotations: Path


def generate_dataset(config: SynthConfig, out_dir) -> DatasetPaths:
    """Write a train split (single-window clips) and a test split (long
    multi-window sequences) in the formats the trainer and detector read."""
    from . import formats

    root = Path(out_dir)
    train_dir = root / "train" / "features"
    test_dir = root / "test" / "features"
    train_dir.mkdir(parents=True, exist_ok=True)
    test_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(config.seed)

    train_rows = []
    for i in range(config.train_clips):
        features, annotations = generate_sequence(
            config,
            rng,
            length_range=config.train_clip_length,
            windows_range=(1, 1),
            distractors_range=config.train_distractors_per_clip,
        )
        clip_id = f"train_{i:04d}"
        path = train_dir / f"{clip_id}.feat"
        formats.write_feature_file(path, features)
        window, cid = annotations[0]
        train_rows.append((clip_id, f"features/{clip_id}.feat", window.start, window.end, class_name(cid)))
    train_manifest = root / "train" / "manifest.tsv"
    formats.write_train_manifest(train_manifest, train_rows)

    test_rows = []
    ann_rows = []
    for i in range(config.test_sequences):
        features, annotations = generate_sequence(config, rng)
        video_id = f"test_{i:04d}"
        path = test_dir / f"{video_id}.feat"
        formats.write_feature_file(path, features)
        test_rows.append((video_id, f"features/{video_id}.feat"))
        for window, cid in annotations:
            ann_rows.append((video_id, class_name(cid), window.start, window.end))
    test_manifest = root / "test" / "manifest.tsv"
    annotations_path = root / "test" / "annotations.tsv"
    formats.write_test_manifest(test_manifest, test_rows)
    formats.write_annotations(annotations_path, ann_rows)
    return DatasetPaths(root, train_manifest, test_manifest, annotations_path)
