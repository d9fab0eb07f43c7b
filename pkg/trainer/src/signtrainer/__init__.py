"""Desk-scale training bridge for landmark feature files.

Reads `.slf` feature files and TSV manifests, batches them for a toy
encoder-decoder with a single learnable input projection, and provides
overfit and pretrain-to-finetune transfer checks whose outputs are scored
through the external ``score`` command.
"""

from .checks import (
    OverfitResult,
    TransferScores,
    batch_from_samples,
    bleu4_from_files,
    exact_match_count,
    overfit_check,
    score_decodes,
    train,
    transfer_check,
)
from .data import (
    FEATURE_DIM,
    FINETUNE_MAX_FRAMES,
    PRETRAIN_MAX_FRAMES,
    Batch,
    DimensionMismatch,
    Vocab,
    build_batch,
    load_feature_batches,
    read_manifest_transcripts,
)
from .model import ToyModelConfig, ToySignTranslator, sequence_loss
from .slf import (
    BadMagic,
    FeatureClip,
    SlfReadError,
    TruncatedFile,
    VersionMismatch,
    read_clip,
    read_clip_bytes,
)
from .synthesis import SynthTask, make_overfit_task, make_task

__all__ = [
    "Batch",
    "BadMagic",
    "DimensionMismatch",
    "FEATURE_DIM",
    "FINETUNE_MAX_FRAMES",
    "FeatureClip",
    "OverfitResult",
    "PRETRAIN_MAX_FRAMES",
    "SlfReadError",
    "SynthTask",
    "ToyModelConfig",
    "ToySignTranslator",
    "TransferScores",
    "TruncatedFile",
    "VersionMismatch",
    "Vocab",
    "batch_from_samples",
    "bleu4_from_files",
    "build_batch",
    "exact_match_count",
    "load_feature_batches",
    "make_overfit_task",
    "make_task",
    "overfit_check",
    "score_decodes",
    "read_clip",
    "read_clip_bytes",
    "read_manifest_transcripts",
    "sequence_loss",
    "train",
    "transfer_check",
]
