"""Temporal interval detection in scored frame sequences.

Windows are searched with an O(nK) top-K structured maximal-sum sweep
over per-frame start/middle/end scores, the linear frame scorer is
trained with a max-margin structured objective, and detections are
post-processed (snippets, length normalization, duration priors, NMS)
and evaluated with IoU-matched mAP.
"""

from .core import (
    PartScores,
    PartWeights,
    ScoredWindow,
    UNIT_WEIGHTS,
    Window,
    delta,
    iou,
    window_score,
)
from .evaluation import Detection, EvalResult, average_precision, mean_ap
from .lossaug import AugmentedProblem, augment_scores, loss_augmented_argmax
from .maxsum import baseline_detect, k_max_sums, max_sum
from .model import ModelParams, init_params, load_checkpoint, save_checkpoint, score_frames
from .postprocess import (
    DurationPrior,
    PipelineConfig,
    Snippet,
    detect,
    detect_flat,
    fit_duration_prior,
    nms,
    rank_score,
    split_snippets,
)
from .sms import CandidateEntry, SmsConfig, merge_topk, sms_topk
from .synth import SynthConfig, generate_dataset, generate_sequence, signature_params
from .train import (
    EpochLoss,
    LossReport,
    TrainConfig,
    TrainExample,
    TrainingDiverged,
    cls_loss,
    evaluate_example,
    loc_loss,
    subgradient,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "PartScores",
    "PartWeights",
    "ScoredWindow",
    "UNIT_WEIGHTS",
    "Window",
    "delta",
    "iou",
    "window_score",
    "Detection",
    "EvalResult",
    "average_precision",
    "mean_ap",
    "AugmentedProblem",
    "augment_scores",
    "loss_augmented_argmax",
    "baseline_detect",
    "k_max_sums",
    "max_sum",
    "ModelParams",
    "init_params",
    "load_checkpoint",
    "save_checkpoint",
    "score_frames",
    "DurationPrior",
    "PipelineConfig",
    "Snippet",
    "detect",
    "detect_flat",
    "fit_duration_prior",
    "nms",
    "rank_score",
    "split_snippets",
    "CandidateEntry",
    "SmsConfig",
    "merge_topk",
    "sms_topk",
    "SynthConfig",
    "generate_dataset",
    "generate_sequence",
    "signature_params",
    "EpochLoss",
    "LossReport",
    "TrainConfig",
    "TrainExample",
    "TrainingDiverged",
    "cls_loss",
    "evaluate_example",
    "loc_loss",
    "subgradient",
    "train",
    "__version__",
]
