"""Structured max-margin training of the linear frame scorer.

Per training clip the objective combines a localization hinge (the
most-violating window under the loss-augmented search must not outscore
the ground truth) and a classification hinge (the best window of every
wrong class must trail the ground truth by a margin), weighted by
``lambda_cls``.  Both hinges are piecewise linear in the model weights, so
plain subgradient descent applies; with the witnesses fixed the gradient
of the window score is just the sum of the contributing feature rows.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import PartWeights, ScoredWindow, UNIT_WEIGHTS, Window, window_score
from .lossaug import loss_augmented_argmax
from .model import PART_END, PART_MIDDLE, PART_START, ModelParams, as_feature_matrix, score_frames
from .sms import SmsConfig, sms_topk

__all__ = [
    "TrainExample",
    "TrainConfig",
    "LossReport",
    "EpochLoss",
    "Gradient",
    "TrainingDiverged",
    "loc_loss",
    "cls_loss",
    "evaluate_example",
    "subgradient",
    "train",
    "dataset_loss",
]


class TrainingDiverged(RuntimeError):
    """Raised when the mean loss blows up past the divergence guard."""


@dataclass(frozen=True)
class TrainExample:
    """One training clip: features, its single ground-truth window, and class."""

    features: np.ndarray
    gt: Window
    class_id: int
    id: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "features", as_feature_matrix(self.features))
        n = self.features.shape[0]
        if self.gt.end > n:
            raise ValueError(f"{self.id or 'example'}: gt [{self.gt.start}, {self.gt.end}] exceeds {n} frames")
        if self.gt.length < 2:
            raise ValueError(f"{self.id or 'example'}: gt shorter than 2 frames")
        if self.class_id < 0:
            raise ValueError(f"{self.id or 'example'}: negative class_id")


@dataclass(frozen=True)
class TrainConfig:
    lambda_cls: float = 0.5
    margin_mode: str = "gt-length"  # or "fixed" (uses margin_value)
    margin_value: float = 1.0
    learning_rate: float = 0.02
    epochs: int = 50
    seed: int = 0
    middle_balancing: bool = True
    boundary_jitter: bool = False
    weights: PartWeights = UNIT_WEIGHTS
    lr_decay: bool = False

    def __post_init__(self) -> None:
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.lambda_cls < 0:
            raise ValueError(f"lambda_cls must be >= 0, got {self.lambda_cls}")
        if self.margin_mode not in ("gt-length", "fixed"):
            raise ValueError(f"unknown margin_mode {self.margin_mode!r}")


@dataclass(frozen=True)
class LossReport:
    """Losses and witnesses for one example at fixed parameters."""

    loc_loss: float
    cls_loss: float
    total: float
    witness_loc: ScoredWindow | None
    witness_cls: ScoredWindow | None


@dataclass(frozen=True)
class EpochLoss:
    epoch: int
    loc_loss: float
    cls_loss: float
    total: float


@dataclass
class Gradient:
    """Subgradient with the same shapes as the model parameters."""

    weights: np.ndarray
    biases: np.ndarray


def _margin(gt: Window, config: TrainConfig) -> float:
    return float(gt.length) if config.margin_mode == "gt-length" else config.margin_value


def loc_loss(example: TrainExample, params: ModelParams, config: TrainConfig = TrainConfig()):
    """Localization hinge and its witness window, at the example's own class."""
    return _loc_loss_at(example, example.gt, params, config)


def _loc_loss_at(example, gt: Window, params, config):
    scores = score_frames(params, example.features, example.class_id)
    witness = loss_augmented_argmax(scores, gt, config.weights)
    gt_score = window_score(scores, gt, config.weights)
    return max(0.0, witness.score - gt_score), witness


def cls_loss(example: TrainExample, params: ModelParams, config: TrainConfig = TrainConfig()):
    """Classification hinge (already scaled by 1/(C-1)) and the offending window.

    Zero with a single-class model.  The inner maximization runs the plain
    top-1 window search per competing class.
    """
    return _cls_loss_at(example, example.gt, params, config)


def _cls_loss_at(example, gt: Window, params, config):
    num_classes = params.num_classes
    if num_classes < 2:
        return 0.0, None
    best: ScoredWindow | None = None
    for c in range(num_classes):
        if c == example.class_id:
            continue
        top = sms_topk(
            score_frames(params, example.features, c),
            SmsConfig(k=1, weights=config.weights),
        )
        if not top:
            continue
        cand = ScoredWindow(top[0].window, top[0].score, class_id=c)
        if best is None or cand.score > best.score:
            best = cand
    if best is None:
        return 0.0, None
    gt_score = window_score(
        score_frames(params, example.features, example.class_id), gt, config.weights
    )
    hinge = max(0.0, _margin(gt, config) + best.score - gt_score)
    return hinge / (num_classes - 1), best


def evaluate_example(
    example: TrainExample, params: ModelParams, config: TrainConfig = TrainConfig()
) -> LossReport:
    """Both losses at the example's ground truth; total = loc + lambda_cls * cls."""
    return _evaluate_at(example, example.gt, params, config)


def _evaluate_at(example, gt, params, config) -> LossReport:
    loc, w_loc = _loc_loss_at(example, gt, params, config)
    cls, w_cls = _cls_loss_at(example, gt, params, config)
    return LossReport(loc, cls, loc + config.lambda_cls * cls, w_loc, w_cls)


def _accumulate_window(grad: Gradient, feats, window: Window, class_id: int, coef: float, config) -> None:
    """Add coef * d(window score)/d(params) for one window into the gradient."""
    lam = config.weights
    s, e = window.start, window.end
    grad.weights[class_id, PART_START] += coef * lam.lambda_start * feats[s - 1]
    grad.biases[class_id, PART_START] += coef * lam.lambda_start
    if e - s >= 2:
        mid_coef = coef * lam.lambda_middle
        if config.middle_balancing:
            mid_coef /= window.length
        grad.weights[class_id, PART_MIDDLE] += mid_coef * feats[s : e - 1].sum(axis=0)
        grad.biases[class_id, PART_MIDDLE] += mid_coef * (e - s - 1)
    grad.weights[class_id, PART_END] += coef * lam.lambda_end * feats[e - 1]
    grad.biases[class_id, PART_END] += coef * lam.lambda_end


def subgradient(
    example: TrainExample, params: ModelParams, config: TrainConfig = TrainConfig()
) -> Gradient:
    """Subgradient of the example's total loss with respect to the parameters.

    Active hinges contribute +witness and -ground-truth feature sums into
    the matching class/part slots; inactive hinges contribute nothing.
    """
    report, grad = _step(example, example.gt, params, config)
    return grad


def _step(example, gt: Window, params, config) -> tuple[LossReport, Gradient]:
    report = _evaluate_at(example, gt, params, config)
    grad = Gradient(
        np.zeros_like(params.weights), np.zeros_like(params.biases)
    )
    feats = example.features
    if report.loc_loss > 0.0:
        _accumulate_window(grad, feats, report.witness_loc.window, example.class_id, 1.0, config)
        _accumulate_window(grad, feats, gt, example.class_id, -1.0, config)
    if report.cls_loss > 0.0 and report.witness_cls is not None:
        coef = config.lambda_cls / (params.num_classes - 1)
        _accumulate_window(grad, feats, report.witness_cls.window, report.witness_cls.class_id, coef, config)
        _accumulate_window(grad, feats, gt, example.class_id, -coef, config)
    return report, grad


def _jitter_window(gt: Window, rng: np.random.Generator) -> Window:
    """Resample the boundaries inside the first/last 10% of the window."""
    slack = max(1, round(0.1 * gt.length))
    start = gt.start + int(rng.integers(0, slack))
    end = gt.end - int(rng.integers(0, slack))
    return Window(start, end)


def train(
    dataset: list[TrainExample], params: ModelParams, config: TrainConfig = TrainConfig()
) -> tuple[ModelParams, list[EpochLoss]]:
    """Seeded subgradient descent over the dataset; returns new params and history.

    One update per example, examples reshuffled every epoch from the
    config seed.  History rows hold per-epoch mean losses (measured at the
    parameters each example was visited with).  Raises TrainingDiverged
    when the mean total loss exceeds 1e6 times the first epoch's.
    """
    if not dataset:
        raise ValueError("dataset is empty")
    for ex in dataset:
        if ex.features.shape[1] != params.dim:
            raise ValueError(f"{ex.id or 'example'}: feature dim {ex.features.shape[1]} != model dim {params.dim}")
        if ex.class_id >= params.num_classes:
            raise ValueError(f"{ex.id or 'example'}: class_id {ex.class_id} >= num_classes {params.num_classes}")
    params = params.copy()
    rng = np.random.default_rng(config.seed)
    history: list[EpochLoss] = []
    # Divergence guard reference: the mean loss at the *initial* parameters,
    # before any update (epoch means are measured at moving parameters and
    # could already be poisoned by an intra-epoch explosion).
    initial = sum(_evaluate_at(ex, ex.gt, params, config).total for ex in dataset) / len(dataset)
    guard_limit = 1e6 * max(initial, 1.0)
    for epoch in range(1, config.epochs + 1):
        lr = config.learning_rate / epoch if config.lr_decay else config.learning_rate
        order = rng.permutation(len(dataset))
        # Collected per example and reduced in dataset order, so the epoch
        # means do not depend on the visiting order's float summation.
        locs = np.zeros(len(dataset))
        clss = np.zeros(len(dataset))
        for idx in order:
            ex = dataset[int(idx)]
            gt = _jitter_window(ex.gt, rng) if config.boundary_jitter else ex.gt
            report, grad = _step(ex, gt, params, config)
            if lr != 0.0:
                params.weights -= lr * grad.weights
                params.biases -= lr * grad.biases
                if not (np.isfinite(params.weights).all() and np.isfinite(params.biases).all()):
                    raise TrainingDiverged(
                        f"epoch {epoch}: parameters became non-finite at example {ex.id or int(idx)}"
                    )
            locs[int(idx)] = report.loc_loss
            clss[int(idx)] = report.cls_loss
            if report.total > guard_limit:
                raise TrainingDiverged(
                    f"epoch {epoch}: loss {report.total:.6g} at example "
                    f"{ex.id or int(idx)} exceeds guard ({guard_limit:.6g})"
                )
        mean_loc = float(locs.mean())
        mean_cls = float(clss.mean())
        row = EpochLoss(epoch, mean_loc, mean_cls, mean_loc + config.lambda_cls * mean_cls)
        history.append(row)
        if not np.isfinite(row.total) or row.total > guard_limit:
            raise TrainingDiverged(
                f"epoch {epoch}: mean total loss {row.total:.6g} exceeds guard ({guard_limit:.6g})"
            )
    return params, history


def dataset_loss(
    dataset: list[TrainExample],
    params: ModelParams,
    config: TrainConfig = TrainConfig(),
    threads: int = 1,
) -> EpochLoss:
    """Mean losses over a dataset without updating parameters.

    Examples may be evaluated concurrently; the reduction always runs in
    dataset order, so the result is independent of scheduling.
    """
    if not dataset:
        raise ValueError("dataset is empty")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(lambda ex: evaluate_example(ex, params, config), dataset))
    else:
        reports = [evaluate_example(ex, params, config) for ex in dataset]
    m = len(dataset)
    return EpochLoss(
        0,
        sum(r.loc_loss for r in reports) / m,
        sum(r.cls_loss for r in reports) / m,
        sum(r.total for r in reports) / m,
    )
