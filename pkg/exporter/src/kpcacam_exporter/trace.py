"""Flat-plan tracer: walk a model's layer plan, emit an ONNX graph with
the requested activation layer declared as a second graph output."""

import numpy as np
import torch
from torch import nn

from .models import ExportError, build_model
from .onnx_write import (
    attr_int,
    attr_ints,
    model_proto,
    node_proto,
    tensor_proto,
    value_info,
)

LOGITS_NAME = "logits"


def _pair(v):
    return (v, v) if isinstance(v, int) else tuple(v)


def _layer_shapes(plan, input_shape):
    """Forward a zero image through the plan, recording each output shape."""
    shapes = {}
    x = torch.zeros((1,) + tuple(input_shape))
    with torch.no_grad():
        for name, module in plan:
            x = module(x)
            shapes[name] = tuple(x.shape)
    return shapes


def _emit_layer(name, module, in_name, in_shape):
    """Translate one leaf module into (nodes, initializers)."""
    if isinstance(module, nn.Conv2d):
        if module.groups != 1 or _pair(module.dilation) != (1, 1):
            raise ExportError(f"layer {name!r}: grouped/dilated Conv2d unsupported")
        ph, pw = _pair(module.padding)
        weight = module.weight.detach().numpy()
        bias = (module.bias.detach().numpy() if module.bias is not None
                else np.zeros(weight.shape[0]))
        nodes = [node_proto("Conv", [in_name, f"{name}.w", f"{name}.b"], [name], (
            attr_ints("kernel_shape", list(_pair(module.kernel_size))),
            attr_ints("pads", [ph, pw, ph, pw]),
            attr_ints("strides", list(_pair(module.stride))),
        ))]
        inits = [tensor_proto(f"{name}.w", weight), tensor_proto(f"{name}.b", bias)]
        return nodes, inits
    if isinstance(module, nn.ReLU):
        return [node_proto("Relu", [in_name], [name])], []
    if isinstance(module, nn.MaxPool2d):
        ph, pw = _pair(module.padding)
        return [node_proto("MaxPool", [in_name], [name], (
            attr_ints("kernel_shape", list(_pair(module.kernel_size))),
            attr_ints("strides", list(_pair(module.stride or module.kernel_size))),
            attr_ints("pads", [ph, pw, ph, pw]),
        ))], []
    if isinstance(module, nn.AvgPool2d):
        ph, pw = _pair(module.padding)
        return [node_proto("AveragePool", [in_name], [name], (
            attr_ints("kernel_shape", list(_pair(module.kernel_size))),
            attr_ints("strides", list(_pair(module.stride or module.kernel_size))),
            attr_ints("pads", [ph, pw, ph, pw]),
        ))], []
    if isinstance(module, nn.AdaptiveAvgPool2d):
        out_hw = _pair(module.output_size)
        in_hw = tuple(in_shape[2:])
        if out_hw == (1, 1):
            return [node_proto("GlobalAveragePool", [in_name], [name])], []
        if out_hw == in_hw:
            return [node_proto("Identity", [in_name], [name])], []
        if all(i % o == 0 for i, o in zip(in_hw, out_hw)):
            k = [i // o for i, o in zip(in_hw, out_hw)]
            return [node_proto("AveragePool", [in_name], [name], (
                attr_ints("kernel_shape", k), attr_ints("strides", k),
            ))], []
        raise ExportError(
            f"layer {name!r}: adaptive pool {in_hw} -> {out_hw} has no "
            "fixed-kernel equivalent"
        )
    if isinstance(module, nn.Dropout):
        return [node_proto("Identity", [in_name], [name])], []
    if isinstance(module, nn.Flatten):
        return [node_proto("Flatten", [in_name], [name],
                           (attr_int("axis", module.start_dim),))], []
    if isinstance(module, nn.Linear):
        weight = module.weight.detach().numpy()
        bias = (module.bias.detach().numpy() if module.bias is not None
                else np.zeros(weight.shape[0]))
        nodes = [node_proto("Gemm", [in_name, f"{name}.w", f"{name}.b"], [name],
                            (attr_int("transB", 1),))]
        inits = [tensor_proto(f"{name}.w", weight), tensor_proto(f"{name}.b", bias)]
        return nodes, inits
    raise ExportError(
        f"layer {name!r}: module type {type(module).__name__} unsupported"
    )


def export_model(model_name, layer_name, out_path):
    """Write an ONNX graph with outputs (logits, <layer_name> activations).

    Returns a summary dict: input_shape, num_classes,
    activation_layer_name, activation_shape (C, H, W).
    """
    _, input_shape, num_classes, plan = build_model(model_name)
    names = [n for n, _ in plan]
    if layer_name not in names:
        raise ExportError(
            f"unknown layer {layer_name!r} in model {model_name!r}; "
            f"candidates: {names}"
        )
    if layer_name == names[-1]:
        raise ExportError(
            f"layer {layer_name!r} is the classifier output, not an "
            "activation layer"
        )
    shapes = _layer_shapes(plan, input_shape)
    act_shape = shapes[layer_name]
    if len(act_shape) != 4:
        raise ExportError(
            f"layer {layer_name!r} output shape {act_shape} is not a "
            "(N, C, H, W) activation tensor"
        )

    nodes = []
    initializers = []
    in_name, in_shape = "input", (1,) + tuple(input_shape)
    for name, module in plan:
        layer_nodes, layer_inits = _emit_layer(name, module, in_name, in_shape)
        nodes += layer_nodes
        initializers += layer_inits
        in_name, in_shape = name, shapes[name]
    # alias the final layer's tensor to a stable logits name
    nodes.append(node_proto("Identity", [in_name], [LOGITS_NAME]))

    inputs = [value_info("input", (1,) + tuple(input_shape))]
    outputs = [
        value_info(LOGITS_NAME, (1, num_classes)),
        value_info(layer_name, act_shape),
    ]
    with open(out_path, "wb") as fh:
        fh.write(model_proto(nodes, initializers, inputs, outputs,
                             graph_name=model_name))
    return {
        "model": model_name,
        "input_shape": list(input_shape),
        "num_classes": num_classes,
        "activation_layer_name": layer_name,
        "activation_shape": list(act_shape[1:]),
    }
