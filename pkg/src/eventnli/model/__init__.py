from .classifier import EntailmentClassifier
from .encoders import (
    DEFAULT_PRETRAINED_CHECKPOINT,
    HashingTokenizer,
    PretrainedPairEncoder,
    TinyPairEncoder,
    build_tiny_encoder,
    encoder_from_config,
)
from .losses import LossConfig, LossParts, combined_loss, nce_loss, wce_loss
from .training import (
    EpochStats,
    FoldMetrics,
    KFoldResult,
    TrainConfig,
    assign_premise_folds,
    fit,
    load_checkpoint,
    predict_labels,
    run_manifest,
    save_checkpoint,
    train_kfold,
)

__all__ = [
    "EntailmentClassifier",
    "DEFAULT_PRETRAINED_CHECKPOINT",
    "HashingTokenizer",
    "PretrainedPairEncoder",
    "TinyPairEncoder",
    "build_tiny_encoder",
    "encoder_from_config",
    "LossConfig",
    "LossParts",
    "combined_loss",
    "nce_loss",
    "wce_loss",
    "EpochStats",
    "FoldMetrics",
    "KFoldResult",
    "TrainConfig",
    "assign_premise_folds",
    "fit",
    "load_checkpoint",
    "predict_labels",
    "run_manifest",
    "save_checkpoint",
    "train_kfold",
]
