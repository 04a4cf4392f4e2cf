"""Frozen feature extractor for the perceptual objective.

A seeded random conv stack with three pooling stages; features are taken
after the third pool.  Pretrained perceptual weights are not bundled, so
this plays the role of an injected fixed feature space: any module mapping
(N, 3, H, W) to a feature tensor can be substituted.
"""

import torch
import torch.nn as nn


class FrozenFeatureExtractor(nn.Module):
    def __init__(self, seed=0, widths=(32, 64, 128)):
        super().__init__()
        with torch.random.fork_rng():
            torch.manual_seed(seed)
            stages = []
            in_ch = 3
            for w in widths:
                stages += [
                    nn.Conv2d(in_ch, w, 3, padding=1),
                    nn.ReLU(inplace=True),
                    nn.Conv2d(w, w, 3, padding=1),
                    nn.ReLU(inplace=True),
                    nn.AvgPool2d(2),
                ]
                in_ch = w
            self.stages = nn.Sequential(*stages)
        self.requires_grad_(False)
        super().train(False)

    def train(self, mode=True):
        return super().train(False)  # permanently frozen

    def forward(self, x):
        return self.stages(x)
