"""The expected truncated VGG-19 feature architecture.

Everything up to and including conv4_1 (torchvision `features` indices
0..19); later blocks are never used by the Gram-texture pipeline, so
they are not exported.  Names follow the usual blockX_Y convention and
line up one-to-one with the container header entries.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class LayerSpec:
    """One layer of the truncated stack."""

    name: str
    kind: str  # conv | relu | maxpool
    index: int  # position in torchvision's vgg19().features
    in_channels: int = 0
    out_channels: int = 0

    @property
    def weight_shape(self) -> tuple:
        return (self.out_channels, self.in_channels, 3, 3)


def _block(specs):
    return tuple(LayerSpec(*s) for s in specs)


TRUNCATED_VGG19 = _block(
    [
        ("conv1_1", "conv", 0, 3, 64),
        ("relu1_1", "relu", 1),
        ("conv1_2", "conv", 2, 64, 64),
        ("relu1_2", "relu", 3),
        ("pool1", "maxpool", 4),
        ("conv2_1", "conv", 5, 64, 128),
        ("relu2_1", "relu", 6),
        ("conv2_2", "conv", 7, 128, 128),
        ("relu2_2", "relu", 8),
        ("pool2", "maxpool", 9),
        ("conv3_1", "conv", 10, 128, 256),
        ("relu3_1", "relu", 11),
        ("conv3_2", "conv", 12, 256, 256),
        ("relu3_2", "relu", 13),
        ("conv3_3", "conv", 14, 256, 256),
        ("relu3_3", "relu", 15),
        ("conv3_4", "conv", 16, 256, 256),
        ("relu3_4", "relu", 17),
        ("pool3", "maxpool", 18),
        ("conv4_1", "conv", 19, 256, 512),
    ]
)

# Gram taps: conv outputs (pre-relu), one per block.
TAP_LAYERS = ("conv1_1", "conv2_1", "conv3_1", "conv4_1")
