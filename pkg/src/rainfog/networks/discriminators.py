"""Patch discriminators.

Four 4x4 stride-2 conv stages shrink the input to 1/16 resolution; a 3x3
stride-1 head emits one raw realness score per patch (the least-squares
objective consumes unbounded scores).  The degraded-domain discriminator
adds a class branch: an 8x8 conv over the trunk followed by per-class
sigmoids, pooled to one probability vector.
"""

import torch
import torch.nn as nn

from .blocks import conv_block


class PatchDiscriminator(nn.Module):
    def __init__(self, n_classes=None, base=64):
        super().__init__()
        self.trunk = nn.Sequential(
            conv_block(3, base, 4, stride=2, padding=1, norm=False),
            conv_block(base, 2 * base, 4, stride=2, padding=1),
            conv_block(2 * base, 4 * base, 4, stride=2, padding=1),
            conv_block(4 * base, 8 * base, 4, stride=2, padding=1),
        )
        self.realness = nn.Conv2d(8 * base, 1, 3, padding=1)
        self.n_classes = n_classes
        if n_classes:
            self.classify = nn.Conv2d(8 * base, n_classes, 8, padding=4)

    def forward(self, x):
        """Realness map at 1/16 resolution; with a class branch also the class probs."""
        if x.shape[-2] % 16 or x.shape[-1] % 16:
            raise ValueError(f"spatial dims must be multiples of 16, got {tuple(x.shape[-2:])}")
        h = self.trunk(x)
        score = self.realness(h)
        if self.n_classes:
            probs = torch.sigmoid(self.classify(h)).mean(dim=(2, 3))
            return score, probs
        return score
