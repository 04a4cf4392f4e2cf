"""Degradation generator: decouples airlight/transmission/streaks and recombines them.

A four-level stride-2 pyramid encodes the concatenated [feature, clean
image] stem.  Pyramid attention blocks transfer affinity-weighted feature
content from each level down to the next resolution using patches of the
finer level as transfer kernels.  The decoder upsamples back to full
resolution and splits into three heads: a sigmoid transmission map, a tanh
streak layer, and a pooled sigmoid airlight vector.  The degraded output
image is produced by the shared physics composition, never by a private
re-implementation.
"""

from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

from .. import physics
from .blocks import conv_block


@dataclass
class DegradationEstimate:
    """Decoded degradation parameters in head units.

    ``airlight`` is (N, 3) in (0, 1) and maps to image units via 2a - 1;
    ``transmission`` is (N, 1, H, W) in (0, 1); ``streaks`` is (N, 3, H, W)
    in (-1, 1).
    """

    airlight: torch.Tensor
    transmission: torch.Tensor
    streaks: torch.Tensor

    def to_physics(self) -> physics.PhysicsParams:
        n = self.airlight.shape[0]
        return physics.PhysicsParams(
            A=(2.0 * self.airlight - 1.0).view(n, 3, 1, 1),
            T=self.transmission,
            R=self.streaks,
        )


class PyramidAttention(nn.Module):
    """Affinity-weighted patch transfer from one pyramid level to the finer one.

    The rain-fog feature is pooled to the level's resolution, projected to
    its channel count, and gated against the level with a per-location
    channel softmax.  The resulting scalar weight map modulates 3x3/stride-2
    patches unfolded from the finer level, which are overlap-added back at
    the finer resolution and spread through four dilated convolutions.
    """

    DILATIONS = (1, 2, 4, 8)

    def __init__(self, channels, prev_channels, feature_channels=3):
        super().__init__()
        self.project = nn.Conv2d(feature_channels, channels, 1)
        self.spread = nn.ModuleList(
            nn.Conv2d(prev_channels, prev_channels, 3, padding=n, dilation=n)
            for n in self.DILATIONS
        )

    def affinity(self, level, feature):
        """Channel-softmax weights (summing to 1 per location) and the projected feature."""
        pooled = F.adaptive_avg_pool2d(feature, level.shape[-2:])
        projected = self.project(pooled)
        weights = torch.softmax(level * torch.sigmoid(projected), dim=1)
        return weights, projected

    def forward(self, level, prev_level, feature):
        weights, projected = self.affinity(level, feature)
        scalar = (projected * weights).sum(dim=1, keepdim=True)
        h, w = prev_level.shape[-2:]
        patches = F.unfold(prev_level, kernel_size=3, padding=1, stride=2)
        pasted = F.fold(
            patches * scalar.flatten(2),
            output_size=(h, w),
            kernel_size=3,
            padding=1,
            stride=2,
        )
        out = self.spread[0](pasted)
        for conv in self.spread[1:]:
            out = out + conv(pasted)
        return out


def _upsample(x):
    return F.interpolate(x, scale_factor=2, mode="nearest")


class DegradationGenerator(nn.Module):
    def __init__(self, widths=(32, 64, 128, 256)):
        super().__init__()
        w1, w2, w3, w4 = widths
        self.enc1 = conv_block(6, w1, 3, stride=2, padding=1)
        self.enc2 = conv_block(w1, w2, 3, stride=2, padding=1)
        self.enc3 = conv_block(w2, w3, 3, stride=2, padding=1)
        self.enc4 = conv_block(w3, w4, 3, stride=2, padding=1)
        self.pa1 = PyramidAttention(w2, w1)
        self.pa2 = PyramidAttention(w3, w2)
        self.pa3 = PyramidAttention(w4, w3)
        self.up5 = conv_block(w4, w3, 3, padding=1)
        self.up6 = conv_block(2 * w3, w2, 3, padding=1)
        self.up7 = conv_block(2 * w2, w1, 3, padding=1)
        self.up8 = conv_block(2 * w1, w1, 3, padding=1)
        self.stem_pool = nn.AvgPool2d(2)
        self.stem_proj = nn.Conv2d(6, w1, 1)
        self.airlight_fc = nn.Linear(w4, 3)
        self.head = nn.Conv2d(w1, 4, 3, padding=1)
        self.t_out = nn.Conv2d(1, 1, 3, padding=1)
        self.r_mid = nn.Conv2d(3, 3, 3, padding=1)
        self.r_out = nn.Conv2d(3, 3, 3, padding=1)

    def encode_pyramid(self, content, feature):
        """Four stride-2 levels from the 6-channel [feature, content] stem."""
        stem = torch.cat([feature, content], dim=1)
        e1 = self.enc1(stem)
        e2 = self.enc2(e1)
        e3 = self.enc3(e2)
        e4 = self.enc4(e3)
        return stem, [e1, e2, e3, e4]

    def estimate_airlight(self, e4):
        """Global pooling over the deepest level, then fc + sigmoid -> (N, 3) in (0, 1)."""
        pooled = F.adaptive_avg_pool2d(e4, 1).flatten(1)
        return torch.sigmoid(self.airlight_fc(pooled))

    def decode_heads(self, d4):
        """Split the full-resolution decode into transmission and streak heads."""
        h = self.head(d4)
        t = torch.sigmoid(self.t_out(h[:, :1]))
        r = torch.tanh(self.r_out(self.r_mid(h[:, 1:])))
        return t, r

    def estimate(self, content, feature) -> DegradationEstimate:
        if content.shape[-2:] != feature.shape[-2:]:
            raise ValueError("content and feature must share spatial dims")
        if content.shape[-2] % 16 or content.shape[-1] % 16:
            raise ValueError(f"spatial dims must be multiples of 16, got {tuple(content.shape[-2:])}")
        stem, (e1, e2, e3, e4) = self.encode_pyramid(content, feature)
        pa3 = self.pa3(e4, e3, feature)
        pa2 = self.pa2(e3, e2, feature)
        pa1 = self.pa1(e2, e1, feature)
        d1 = torch.cat([self.up5(_upsample(e4)), pa3], dim=1)
        d2 = torch.cat([self.up6(_upsample(d1)), pa2], dim=1)
        d3 = torch.cat(
            [self.up7(_upsample(d2)) + self.stem_proj(self.stem_pool(stem)), pa1], dim=1
        )
        d4 = self.up8(_upsample(d3))
        t, r = self.decode_heads(d4)
        return DegradationEstimate(self.estimate_airlight(e4), t, r)

    def forward(self, content, feature):
        """Return (degraded image, estimate); the image is the physics composition."""
        est = self.estimate(content, feature)
        return physics.compose(content, est.to_physics()), est
