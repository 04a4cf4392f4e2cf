"""Shared convolutional building blocks.

Convolutions directly followed by instance norm carry no bias: the norm's
mean subtraction would make the bias gradient-dead.
"""

import torch
import torch.nn as nn


def conv_block(in_ch, out_ch, kernel, stride=1, padding=0, norm=True, act=True):
    layers = [nn.Conv2d(in_ch, out_ch, kernel, stride=stride, padding=padding, bias=not norm)]
    if norm:
        layers.append(nn.InstanceNorm2d(out_ch, affine=True))
    if act:
        layers.append(nn.ReLU(inplace=True))
    return nn.Sequential(*layers)


def deconv_block(in_ch, out_ch):
    """Stride-2 transposed conv doubling the spatial size exactly."""
    return nn.Sequential(
        nn.ConvTranspose2d(in_ch, out_ch, 3, stride=2, padding=1, output_padding=1, bias=False),
        nn.InstanceNorm2d(out_ch, affine=True),
        nn.ReLU(inplace=True),
    )


class DenseBlock(nn.Module):
    """Three 3x3 conv layers with growth concatenation.

    The output keeps the input channels plus every layer's growth features;
    callers compress back with a 1x1 conv.
    """

    def __init__(self, channels, growth=32, layers=3):
        super().__init__()
        self.layers = nn.ModuleList(
            conv_block(channels + i * growth, growth, 3, padding=1) for i in range(layers)
        )
        self.out_channels = channels + layers * growth

    def forward(self, x):
        feats = [x]
        for layer in self.layers:
            feats.append(layer(torch.cat(feats, dim=1)))
        return torch.cat(feats, dim=1)


class ResidualBlock(nn.Module):
    """conv-norm-relu-conv-norm with an identity skip."""

    def __init__(self, channels):
        super().__init__()
        self.body = nn.Sequential(
            conv_block(channels, channels, 3, padding=1),
            conv_block(channels, channels, 3, padding=1, act=False),
        )

    def forward(self, x):
        return x + self.body(x)
