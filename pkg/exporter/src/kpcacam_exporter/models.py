"""Model zoo for the exporter.

Each entry yields a torch module plus a flat, ordered layer plan: the
sequence of (name, leaf module) pairs the tracer walks when emitting the
graph. The toy CNN is fully deterministic (hand-set weights) and is the
corpus generator for CI; vgg16 exports the standard torchvision
architecture (randomly initialized unless torchvision weights are
supplied by the caller's environment).
"""

import numpy as np
import torch
from torch import nn

TOY_NUM_CLASSES = 5
TOY_INPUT_SHAPE = (3, 32, 32)
TOY_CLASS_COLORS = np.array([
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [1.0, 1.0, 0.0],
    [1.0, 0.0, 1.0],
])


class ExportError(Exception):
    pass


def _toy_weights():
    rng = np.random.default_rng(202)
    w1 = np.zeros((8, 3, 3, 3))
    for c in range(3):
        w1[c, c, 1, 1] = 1.0
    w1[3:] = 0.05 * rng.normal(size=(5, 3, 3, 3))

    w2 = np.zeros((8, 8, 3, 3))
    for c in range(8):
        w2[c, c, 1, 1] = 1.0
    w2 += 0.02 * rng.normal(size=w2.shape)

    # color-signature readout: each class rewards its own channels,
    # normalized so multi-channel colors don't outscore single-channel ones
    w_fc = np.zeros((TOY_NUM_CLASSES, 8))
    active = TOY_CLASS_COLORS.sum(axis=1, keepdims=True)
    w_fc[:, :3] = np.where(TOY_CLASS_COLORS > 0.5, 4.0 / active, -4.0)
    return w1, w2, w_fc


def build_toy_model():
    conv1 = nn.Conv2d(3, 8, 3, padding=1)
    conv2 = nn.Conv2d(8, 8, 3, padding=1)
    fc = nn.Linear(8, TOY_NUM_CLASSES)
    w1, w2, w_fc = _toy_weights()
    with torch.no_grad():
        conv1.weight.copy_(torch.from_numpy(w1))
        conv1.bias.zero_()
        conv2.weight.copy_(torch.from_numpy(w2))
        conv2.bias.zero_()
        fc.weight.copy_(torch.from_numpy(w_fc))
        fc.bias.zero_()
    model = nn.Sequential()
    model.add_module("conv1", conv1)
    model.add_module("relu1", nn.ReLU())
    model.add_module("pool1", nn.MaxPool2d(2))
    model.add_module("conv2", conv2)
    model.add_module("last_conv", nn.ReLU())
    model.add_module("gap", nn.AdaptiveAvgPool2d(1))
    model.add_module("flatten", nn.Flatten(1))
    model.add_module("fc", fc)
    model.eval()
    plan = list(model.named_children())
    return model, TOY_INPUT_SHAPE, TOY_NUM_CLASSES, plan


def build_vgg16():
    from torchvision.models import vgg16

    model = vgg16(weights=None)
    model.eval()
    plan = [(f"features.{k}", m) for k, m in model.features.named_children()]
    plan.append(("avgpool", model.avgpool))
    plan.append(("flatten", nn.Flatten(1)))
    plan += [(f"classifier.{k}", m) for k, m in model.classifier.named_children()]
    return model, (3, 224, 224), 1000, plan


_BUILDERS = {"toy": build_toy_model, "vgg16": build_vgg16}

# architectures that need operators outside the exported graph subset
_UNSUPPORTED = {
    "resnet50": "residual Add topology is not expressible as a flat layer plan",
    "densenet161": "dense Concat topology is not expressible as a flat layer plan",
}


def build_model(name):
    if name in _UNSUPPORTED:
        raise ExportError(
            f"model {name!r} is not supported: {_UNSUPPORTED[name]}; "
            f"supported models: {sorted(_BUILDERS)}"
        )
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ExportError(
            f"unknown model {name!r}; supported models: {sorted(_BUILDERS)}"
        ) from None
    return builder()


def list_layers(name):
    _, _, _, plan = build_model(name)
    return [layer_name for layer_name, _ in plan]
