"""Derain-fog generator: encoder-decoder translator from degraded to clean images.

Two pooled encoding stages (each concatenating a shallow path with a
dense-block path), a residual bottleneck, and a decoder that concatenates
each upsampled feature with the matching shallow skip.  The final 7x7 conv
output is added to the input before tanh, so an untrained (all-zero)
network degenerates to tanh(x).
"""

import torch
import torch.nn as nn

from .blocks import DenseBlock, ResidualBlock, conv_block, deconv_block


class DerainGenerator(nn.Module):
    def __init__(self, base=64, residual_blocks=6, dense_growth=32):
        super().__init__()
        self.conv1 = nn.Sequential(nn.ReflectionPad2d(3), conv_block(3, base, 7))
        self.dense1 = DenseBlock(base, dense_growth)
        self.conv2 = conv_block(self.dense1.out_channels, base, 1)
        self.pool = nn.AvgPool2d(3, stride=2, padding=1)
        self.conv3 = conv_block(2 * base, 2 * base, 3, padding=1)
        self.dense2 = DenseBlock(2 * base, dense_growth)
        self.conv4 = conv_block(self.dense2.out_channels, 2 * base, 1)
        self.refine = nn.Sequential(*[ResidualBlock(4 * base) for _ in range(residual_blocks)])
        self.deconv5 = deconv_block(4 * base, 2 * base)
        self.conv6 = conv_block(4 * base, 2 * base, 3, padding=1)
        self.conv7 = conv_block(2 * base, 2 * base, 1)
        self.deconv8 = deconv_block(2 * base, base)
        self.conv9 = conv_block(2 * base, base, 3, padding=1)
        self.conv10 = conv_block(base, base, 1)
        self.conv11 = nn.Sequential(nn.ReflectionPad2d(3), nn.Conv2d(base, 3, 7))

    def encode(self, x):
        """Return the bottleneck input and the two full/half-resolution skips."""
        s1 = self.conv1(x)
        d1 = self.conv2(self.dense1(s1))
        enc1 = torch.cat([self.pool(d1), self.pool(s1)], dim=1)
        s2 = self.conv3(enc1)
        d2 = self.conv4(self.dense2(s2))
        enc2 = torch.cat([self.pool(s2), self.pool(d2)], dim=1)
        return enc2, s1, s2

    def decode(self, bottleneck, s1, s2, x):
        u = torch.cat([self.deconv5(bottleneck), s2], dim=1)
        u = self.conv7(self.conv6(u))
        u = torch.cat([self.deconv8(u), s1], dim=1)
        u = self.conv10(self.conv9(u))
        return torch.tanh(self.conv11(u) + x)

    def forward(self, x):
        if x.shape[-2] % 4 or x.shape[-1] % 4:
            raise ValueError(f"spatial dims must be multiples of 4, got {tuple(x.shape[-2:])}")
        enc2, s1, s2 = self.encode(x)
        return self.decode(self.refine(enc2), s1, s2, x)
