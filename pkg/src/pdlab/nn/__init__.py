from .checkpoint import load_checkpoint, save_checkpoint
from .losses import LossWeights, loss_blind, loss_estimation, loss_nonblind, loss_total
from .model import BlindDenoiser, ModelConfig, run_denoiser, run_estimator
from .optim import Adam
from .tensor import Tensor
from .train import TrainConfig, TrainingDiverged, TrainResult, train

__all__ = [
    "Adam",
    "BlindDenoiser",
    "LossWeights",
    "ModelConfig",
    "Tensor",
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "load_checkpoint",
    "loss_blind",
    "loss_estimation",
    "loss_nonblind",
    "loss_total",
    "run_denoiser",
    "run_estimator",
    "save_checkpoint",
    "train",
]
