"""Unsupervised adversarial rain/fog removal toolkit."""

from . import checkpoint, config, data, losses, metrics, physics, testkit, trainer
from .data import UnpairedDataset, load_image, random_crop, sample_pair, save_image
from .losses import LossReport, LossWeights
from .metrics import evaluate_dir, psnr, ssim
from .networks import (
    DegradationGenerator,
    DerainGenerator,
    FrozenFeatureExtractor,
    PatchDiscriminator,
    RainFogFeatureNet,
)
from .physics import FogSpec, PhysicsParams, StreakSpec, compose, decompose
from .trainer import TrainConfig, TrainState, build_state, fit, lr_at, smoke_config, train_step

__version__ = "0.1.0"
