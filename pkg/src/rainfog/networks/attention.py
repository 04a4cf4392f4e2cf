"""Rain-fog feature extractor with channel and spatial attention.

Three parallel perception blocks operate on a shared 32-channel stem.
Each block runs a two-stage multi-scale trunk (3x3 and 5x5 branches,
summed then concatenated), gates channels with a squeezed global
descriptor, masks positions with a learned spatial map, and adds the block
input back.  The fused blocks are refined by residual blocks and projected
to a 3-channel feature map at the input resolution.
"""

import torch
import torch.nn as nn
import torch.nn.functional as F

from .blocks import ResidualBlock, conv_block


class ChannelGate(nn.Module):
    """Squeeze-and-excitation style channel weighting."""

    def __init__(self, channels=32, squeeze=8):
        super().__init__()
        self.fc1 = nn.Linear(channels, squeeze)
        self.fc2 = nn.Linear(squeeze, channels)

    def gate(self, x):
        g = F.adaptive_avg_pool2d(x, 1).flatten(1)
        g = torch.sigmoid(self.fc2(F.relu(self.fc1(g))))
        return g[:, :, None, None]

    def forward(self, x):
        return x * self.gate(x)


class SpatialGate(nn.Module):
    """Single-channel sigmoid mask from a three-conv reduction."""

    def __init__(self, channels=32, hidden=8):
        super().__init__()
        self.conv1 = nn.Conv2d(channels, hidden, 3, padding=1)
        self.conv2 = nn.Conv2d(hidden, hidden, 3, padding=1)
        self.conv3 = nn.Conv2d(hidden, 1, 3, padding=1)

    def mask(self, x):
        m = F.relu(self.conv1(x))
        m = F.relu(self.conv2(m))
        return torch.sigmoid(self.conv3(m))

    def forward(self, x):
        return x * self.mask(x)


class PerceptionBlock(nn.Module):
    """Multi-scale trunk + channel gate + spatial gate, residual on the input."""

    def __init__(self, channels=32):
        super().__init__()
        self.conv1 = conv_block(channels, channels, 3, padding=1)
        self.conv2 = conv_block(channels, channels, 5, padding=2)
        self.conv3 = conv_block(channels, channels, 3, padding=1)
        self.conv4 = conv_block(channels, channels, 5, padding=2)
        self.conv5 = conv_block(2 * channels, channels, 1)
        self.conv6 = conv_block(channels, channels, 3, padding=1)
        self.channel_gate = ChannelGate(channels)
        self.spatial_gate = SpatialGate(channels)

    def forward(self, x):
        ms1 = self.conv1(x) + self.conv2(x)
        ms2 = torch.cat([self.conv3(ms1), self.conv4(ms1)], dim=1)
        mul = self.conv6(self.conv5(ms2))
        return x + self.spatial_gate(self.channel_gate(mul))


class RainFogFeatureNet(nn.Module):
    """3-channel rain-fog relevance feature at the input resolution."""

    def __init__(self, channels=32, blocks=3, refine_blocks=4):
        super().__init__()
        self.stem = conv_block(3, channels, 3, padding=1)
        self.blocks = nn.ModuleList(PerceptionBlock(channels) for _ in range(blocks))
        self.refine = nn.Sequential(*[ResidualBlock(channels) for _ in range(refine_blocks)])
        self.project = nn.Conv2d(channels, 3, 3, padding=1)

    def fuse(self, stem_out, block_outs):
        """Sigmoid-weight every block output except the last, then add stem."""
        fused = block_outs[-1] + stem_out
        for out in block_outs[:-1]:
            fused = fused + torch.sigmoid(out)
        return fused

    def forward(self, x):
        fe = self.stem(x)
        outs = [block(fe) for block in self.blocks]
        return self.project(self.refine(self.fuse(fe, outs)))
