"""ResNet18 backbone and the learned multiplexing front end."""

import numpy as np
import torch
from torch import nn
from torchvision.models import resnet18


def build_backbone(in_channels: int, num_classes: int = 10,
                   pretrained: bool = False) -> nn.Module:
    """ResNet18 with the first conv widened to ``in_channels``.

    ``pretrained`` starts from the torchvision ImageNet weights (requires
    the weight file to be available locally or downloadable); the first
    conv is still re-initialized whenever in_channels != 3.
    """
    if pretrained:
        from torchvision.models import ResNet18_Weights
        net = resnet18(weights=ResNet18_Weights.DEFAULT)
        net.fc = nn.Linear(net.fc.in_features, num_classes)
    else:
        net = resnet18(weights=None, num_classes=num_classes)
    if in_channels != 3:
        net.conv1 = nn.Conv2d(in_channels, 64, kernel_size=7, stride=2,
                              padding=3, bias=False)
    return net


class MuxFrontEnd(nn.Module):
    """Non-negative 1x1 convolution combining L LED channels into m.

    The weight is a single (m, L) matrix shared across color planes.
    Non-negativity is a projection: callers clamp at zero after every
    optimizer step rather than reparameterizing.
    """

    def __init__(self, num_leds: int, m: int, color_channels: int = 1):
        super().__init__()
        self.num_leds = num_leds
        self.m = m
        self.color_channels = color_channels
        init = torch.rand(m, num_leds) / num_leds
        self.weight = nn.Parameter(init)

    def forward(self, x):
        n, k, h, w = x.shape
        planes = x.reshape(n, self.color_channels, self.num_leds, h, w)
        mixed = torch.einsum("ml,nplhw->npmhw", self.weight, planes)
        return mixed.reshape(n, self.color_channels * self.m, h, w)

    def clamp_(self):
        self.weight.data.clamp_(min=0.0)

    @property
    def beta(self) -> np.ndarray:
        return self.weight.detach().cpu().numpy().astype(np.float64)


class MuxClassifier(nn.Module):
    """MuxFrontEnd feeding a ResNet18 over the m combined channels."""

    def __init__(self, num_leds: int, m: int, color_channels: int = 1,
                 num_classes: int = 10, pretrained: bool = False):
        super().__init__()
        self.front = MuxFrontEnd(num_leds, m, color_channels)
        self.backbone = build_backbone(m * color_channels, num_classes, pretrained)

    def forward(self, x):
        return self.backbone(self.front(x))
