from emopipe.trainer.backends import ClassifierBackend, ReferenceBackend, cross_entropy, softmax
from emopipe.trainer.checkpoint import Checkpoint, CheckpointWarning, load_checkpoint, save_checkpoint
from emopipe.trainer.loop import (
    HISTORY_COLUMNS,
    EpochLog,
    TrainConfig,
    TrainingResult,
    evaluate,
    history_from_csv,
    history_to_csv,
    predict_scores,
    select_best,
    train,
)
from emopipe.trainer.optim import AdamW, OptimizerSettings, clip_by_global_norm
from emopipe.trainer.schedule import warmup_lr

__all__ = [
    "AdamW",
    "Checkpoint",
    "CheckpointWarning",
    "ClassifierBackend",
    "EpochLog",
    "HISTORY_COLUMNS",
    "OptimizerSettings",
    "ReferenceBackend",
    "TrainConfig",
    "TrainingResult",
    "clip_by_global_norm",
    "cross_entropy",
    "evaluate",
    "history_from_csv",
    "history_to_csv",
    "load_checkpoint",
    "predict_scores",
    "save_checkpoint",
    "select_best",
    "softmax",
    "train",
    "warmup_lr",
]
