from .attention import ChannelGate, PerceptionBlock, RainFogFeatureNet, SpatialGate
from .blocks import DenseBlock, ResidualBlock, conv_block, deconv_block
from .degradation import DegradationEstimate, DegradationGenerator, PyramidAttention
from .derain import DerainGenerator
from .discriminators import PatchDiscriminator
from .perceptual import FrozenFeatureExtractor

__all__ = [
    "ChannelGate",
    "DenseBlock",
    "DegradationEstimate",
    "DegradationGenerator",
    "DerainGenerator",
    "FrozenFeatureExtractor",
    "PatchDiscriminator",
    "PerceptionBlock",
    "PyramidAttention",
    "RainFogFeatureNet",
    "ResidualBlock",
    "SpatialGate",
    "conv_block",
    "deconv_block",
]
