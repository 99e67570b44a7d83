"""Readers and writers for the toolkit's text file formats.

All formats are line-oriented, deterministic (floats serialized with
shortest round-trip repr unless a fixed precision is part of the format),
and raise FormatError with the offending path and line number on
malformed input.

Formats:

* feature file    — header ``n d``, then n space-separated rows of d values
* scores file     — header ``n C name0 ... nameC-1``, then 3 lines per
                    class (start/middle/end tracks, n values each)
* train manifest  — TSV ``id features start end class``
* test manifest   — TSV ``id features``
* annotations     — TSV ``video_id class start end``
* detections      — TSV ``video_id class start_frame end_frame
                    start_seconds end_seconds score`` (score at 6 dp)
* loss history    — TSV ``epoch loc cls total``
* priors          — JSON ``{class: {"log_mean": .., "log_std": ..}}``
* AP table        — TSV ``class`` column plus one AP column per threshold
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import PartScores, Window
from .postprocess import DurationPrior
from .train import TrainExample

__all__ = [
    "FormatError",
    "write_feature_file",
    "read_feature_file",
    "write_scores_file",
    "read_scores_file",
    "write_train_manifest",
    "read_train_manifest",
    "load_train_examples",
    "write_test_manifest",
    "read_test_manifest",
    "write_annotations",
    "read_annotations",
    "write_detections",
    "read_detections",
    "write_history",
    "write_priors",
    "read_priors",
    "write_ap_table",
]


class FormatError(ValueError):
    """Malformed file content, with path and 1-based line number."""

    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


def _fmt_floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def _parse_floats(path, line_no: int, text: str, expected: int) -> list[float]:
    parts = text.split()
    if len(parts) != expected:
        raise FormatError(path, line_no, f"expected {expected} values, found {len(parts)}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise FormatError(path, line_no, f"bad float: {exc}") from None


def _read_lines(path) -> list[str]:
    try:
        return Path(path).read_text().splitlines()
    except OSError as exc:
        raise FormatError(path, 0, f"cannot read file: {exc.strerror or exc}") from None


def write_feature_file(path, features: np.ndarray) -> None:
    features = np.asarray(features, dtype=np.float64)
    n, d = features.shape
    lines = [f"{n} {d}"]
    lines.extend(_fmt_floats(row) for row in features)
    Path(path).write_text("\n".join(lines) + "\n")


def read_feature_file(path) -> np.ndarray:
    lines = _read_lines(path)
    if not lines:
        raise FormatError(path, 1, "empty feature file")
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError(path, 1, f"expected header 'n d', got {lines[0]!r}")
    try:
        n, d = int(head[0]), int(head[1])
    except ValueError:
        raise FormatError(path, 1, f"non-integer header {lines[0]!r}") from None
    if len(lines) - 1 != n:
        raise FormatError(path, len(lines), f"expected {n} feature rows, found {len(lines) - 1}")
    rows = [_parse_floats(path, i + 2, lines[i + 1], d) for i in range(n)]
    return np.asarray(rows, dtype=np.float64)


def write_scores_file(path, class_names: list[str], scores_by_class: dict[int, PartScores]) -> None:
    if sorted(scores_by_class) != list(range(len(class_names))):
        raise ValueError("scores_by_class must cover classes 0..C-1")
    n = scores_by_class[0].n
    lines = [f"{n} {len(class_names)} " + " ".join(class_names)]
    for c in range(len(class_names)):
        s = scores_by_class[c]
        lines.append(_fmt_floats(s.start_scores))
        lines.append(_fmt_floats(s.middle_scores))
        lines.append(_fmt_floats(s.end_scores))
    Path(path).write_text("\n".join(lines) + "\n")


def read_scores_file(path) -> tuple[list[str], dict[int, PartScores]]:
    lines = _read_lines(path)
    if not lines:
        raise FormatError(path, 1, "empty scores file")
    head = lines[0].split()
    if len(head) < 2:
        raise FormatError(path, 1, f"expected header 'n C names...', got {lines[0]!r}")
    try:
        n, num_classes = int(head[0]), int(head[1])
    except ValueError:
        raise FormatError(path, 1, f"non-integer header {lines[0]!r}") from None
    names = head[2:]
    if len(names) != num_classes:
        raise FormatError(path, 1, f"expected {num_classes} class names, found {len(names)}")
    if len(lines) - 1 != 3 * num_classes:
        raise FormatError(path, len(lines), f"expected {3 * num_classes} track lines, found {len(lines) - 1}")
    scores: dict[int, PartScores] = {}
    for c in range(num_classes):
        base = 1 + 3 * c
        tracks = [_parse_floats(path, base + t + 1, lines[base + t], n) for t in range(3)]
        scores[c] = PartScores(*tracks)
    return names, scores


def _write_tsv(path, header: list[str], rows) -> None:
    lines = ["\t".join(header)]
    lines.extend("\t".join(str(c) for c in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def _read_tsv(path, header: list[str]) -> list[tuple[list[str], int]]:
    lines = _read_lines(path)
    if not lines:
        raise FormatError(path, 1, "empty file")
    if lines[0].split("\t") != header:
        raise FormatError(path, 1, f"expected header {'/'.join(header)}, got {lines[0]!r}")
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) != len(header):
            raise FormatError(path, i, f"expected {len(header)} columns, found {len(cells)}")
        rows.append((cells, i))
    return rows


_TRAIN_HEADER = ["id", "features", "start", "end", "class"]
_TEST_HEADER = ["id", "features"]
_ANN_HEADER = ["video_id", "class", "start", "end"]
_DET_HEADER = ["video_id", "class", "start_frame", "end_frame", "start_seconds", "end_seconds", "score"]


def write_train_manifest(path, rows: list[tuple]) -> None:
    _write_tsv(path, _TRAIN_HEADER, rows)


def read_train_manifest(path) -> list[tuple[str, str, Window, str]]:
    """Rows of (example id, feature path, gt window, class name)."""
    out = []
    for cells, line_no in _read_tsv(path, _TRAIN_HEADER):
        try:
            window = Window(int(cells[2]), int(cells[3]))
        except ValueError as exc:
            raise FormatError(path, line_no, str(exc)) from None
        out.append((cells[0], cells[1], window, cells[4]))
    return out


def load_train_examples(path) -> tuple[list[TrainExample], list[str]]:
    """Materialize manifest rows into TrainExamples; returns (examples, class names).

    Feature paths are resolved relative to the manifest's directory.
    Class ids follow the sorted order of the class names seen.
    """
    rows = read_train_manifest(path)
    base = Path(path).parent
    names = sorted({r[3] for r in rows})
    ids = {name: i for i, name in enumerate(names)}
    examples = [
        TrainExample(read_feature_file(base / rel), window, ids[name], id=ex_id)
        for ex_id, rel, window, name in rows
    ]
    return examples, names


def write_test_manifest(path, rows: list[tuple]) -> None:
    _write_tsv(path, _TEST_HEADER, rows)


def read_test_manifest(path) -> list[tuple[str, str]]:
    return [(cells[0], cells[1]) for cells, _ in _read_tsv(path, _TEST_HEADER)]


def write_annotations(path, rows: list[tuple]) -> None:
    _write_tsv(path, _ANN_HEADER, rows)


def read_annotations(path) -> list[tuple[str, str, Window]]:
    """Rows of (video id, class name, window)."""
    out = []
    for cells, line_no in _read_tsv(path, _ANN_HEADER):
        try:
            window = Window(int(cells[2]), int(cells[3]))
        except ValueError as exc:
            raise FormatError(path, line_no, str(exc)) from None
        out.append((cells[0], cells[1], window))
    return out


def write_detections(path, rows: list[tuple[str, str, Window, float]], fps: float) -> None:
    """Rows of (video id, class name, window, score); seconds derive from fps."""
    out = []
    for video_id, name, window, score in rows:
        out.append(
            (
                video_id,
                name,
                window.start,
                window.end,
                f"{(window.start - 1) / fps:.3f}",
                f"{window.end / fps:.3f}",
                f"{score:.6f}",
            )
        )
    _write_tsv(path, _DET_HEADER, out)


def read_detections(path) -> list[tuple[str, str, Window, float]]:
    out = []
    for cells, line_no in _read_tsv(path, _DET_HEADER):
        try:
            window = Window(int(cells[2]), int(cells[3]))
            score = float(cells[6])
        except ValueError as exc:
            raise FormatError(path, line_no, str(exc)) from None
        out.append((cells[0], cells[1], window, score))
    return out


def write_history(path, history) -> None:
    rows = [(h.epoch, repr(h.loc_loss), repr(h.cls_loss), repr(h.total)) for h in history]
    _write_tsv(path, ["epoch", "loc", "cls", "total"], rows)


def write_priors(path, priors_by_name: dict[str, DurationPrior]) -> None:
    doc = {
        name: {"log_mean": p.log_mean, "log_std": p.log_std}
        for name, p in priors_by_name.items()
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")


def read_priors(path) -> dict[str, tuple[float, float]]:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise FormatError(path, 0, f"cannot read file: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(path, exc.lineno, f"bad JSON: {exc.msg}") from None
    return {name: (entry["log_mean"], entry["log_std"]) for name, entry in doc.items()}


def write_ap_table(path, class_names: list[str], result) -> None:
    """Per-class AP rows plus a final mAP row, one column per threshold."""
    header = ["class"] + [f"ap@{sigma:g}" for sigma in result.sigmas]
    rows = []
    for c in result.classes:
        rows.append([class_names[c]] + [f"{result.per_class[c][s]:.6f}" for s in result.sigmas])
    rows.append(["mAP"] + [f"{result.map_at[s]:.6f}" for s in result.sigmas])
    _write_tsv(path, header, rows)
