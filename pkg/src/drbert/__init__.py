"""Desk-scale dynamic re-weighting encoder for aspect-based sentiment
analysis, built on a from-scratch reverse-mode autodiff core."""

from .autodiff import GraphError, ShapeError, Tensor
from .data import DatasetRecord, load_jsonl, synth_dataset, write_jsonl
from .gradcheck import finite_difference_check
from .metrics import Metrics, evaluate
from .model import DrBert, ModelConfig, load_checkpoint, save_checkpoint
from .optim import Adam, AdamState, adam_step
from .rng import Rng, seeded_init
from .train import TrainConfig, TrainResult, train

__all__ = [
    "Adam", "AdamState", "adam_step", "DatasetRecord", "DrBert", "GraphError",
    "Metrics", "ModelConfig", "Rng", "ShapeError", "Tensor", "TrainConfig",
    "TrainResult", "evaluate", "finite_difference_check", "load_checkpoint",
    "load_jsonl", "save_checkpoint", "seeded_init", "synth_dataset", "train",
    "write_jsonl",
]
