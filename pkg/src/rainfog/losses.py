"""Training objectives and their weighted total.

The adversarial terms default to the least-squares form (targets 1 for
real, 0 for fake); the logistic form is available behind ``mode="log"``.
Cycle consistency defaults to L1 with an L2 variant behind
``mode="l2"``.  All reductions are plain means over every element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
import torch.nn.functional as F

ADV_MODES = ("least-squares", "log")
CYCLE_MODES = ("l1", "l2")


@dataclass
class LossWeights:
    """Weights of the four training objectives."""

    perceptual: float = 0.01
    cycle: float = 10.0
    adversarial: float = 1.0
    diverse: float = 1.0

    def validate(self):
        for name, value in vars(self).items():
            if value < 0:
                raise ValueError(f"loss weight {name} must be nonnegative, got {value}")


@dataclass
class LossReport:
    """Scalar loss components of one training step."""

    adversarial: float
    cycle: float
    perceptual: float
    diverse: float
    total: float

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in vars(self).values())


def _check_adv_mode(mode):
    if mode not in ADV_MODES:
        raise ValueError(f"unknown adversarial mode {mode!r}; expected one of {ADV_MODES}")


def adversarial_generator_loss(scores: torch.Tensor, mode: str = "least-squares") -> torch.Tensor:
    """Push discriminator scores on generated images toward the real target."""
    _check_adv_mode(mode)
    if mode == "least-squares":
        return ((scores - 1.0) ** 2).mean()
    return F.binary_cross_entropy_with_logits(scores, torch.ones_like(scores))


def adversarial_discriminator_loss(
    real_scores: torch.Tensor, fake_scores: torch.Tensor, mode: str = "least-squares"
) -> torch.Tensor:
    """Score real images toward 1 and generated ones toward 0, halves averaged."""
    _check_adv_mode(mode)
    if mode == "least-squares":
        return 0.5 * ((real_scores - 1.0) ** 2).mean() + 0.5 * (fake_scores**2).mean()
    return 0.5 * F.binary_cross_entropy_with_logits(
        real_scores, torch.ones_like(real_scores)
    ) + 0.5 * F.binary_cross_entropy_with_logits(fake_scores, torch.zeros_like(fake_scores))


def cycle_loss(x: torch.Tensor, reconstructed: torch.Tensor, mode: str = "l1") -> torch.Tensor:
    """Reconstruction penalty between an image and its round-trip translation."""
    if x.shape != reconstructed.shape:
        raise ValueError(f"shape mismatch: {tuple(x.shape)} vs {tuple(reconstructed.shape)}")
    if mode == "l1":
        return (x - reconstructed).abs().mean()
    if mode == "l2":
        return ((x - reconstructed) ** 2).mean()
    raise ValueError(f"unknown cycle mode {mode!r}; expected one of {CYCLE_MODES}")


def perceptual_loss(extractor, x: torch.Tensor, reconstructed: torch.Tensor) -> torch.Tensor:
    """Mean squared difference between frozen feature maps of the two images."""
    return ((extractor(x) - extractor(reconstructed)) ** 2).mean()


def diverse_loss(class_probs: torch.Tensor, label_index: int, eps: float = 1e-12) -> torch.Tensor:
    """Negative log-likelihood of the true degradation class.

    ``class_probs`` holds independent per-class sigmoid probabilities; the
    loss charges -log p for the true class and -log(1 - p) for every other
    class, summed over classes and averaged over the batch.
    """
    if class_probs.dim() == 1:
        class_probs = class_probs[None]
    n_classes = class_probs.shape[1]
    if not 0 <= label_index < n_classes:
        raise ValueError(f"label index {label_index} out of range for {n_classes} classes")
    target = torch.zeros_like(class_probs)
    target[:, label_index] = 1.0
    p = class_probs.clamp(eps, 1.0 - eps)
    nll = -(target * torch.log(p) + (1.0 - target) * torch.log(1.0 - p)).sum(dim=1)
    return nll.mean()


def total_loss(perceptual, cycle, adversarial, diverse, weights: LossWeights):
    """Weighted sum of the four objectives."""
    return (
        weights.perceptual * perceptual
        + weights.cycle * cycle
        + weights.adversarial * adversarial
        + weights.diverse * diverse
    )
