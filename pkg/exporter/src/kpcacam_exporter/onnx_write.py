"""Minimal ONNX protobuf wire-format encoder.

Covers only what the exported CNNs need: float tensors, int/float
attributes, nodes, value_info, and the surrounding model message.
"""

import struct

import numpy as np


def _varint(value):
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def _varint_signed(value):
    return _varint(value & 0xFFFFFFFFFFFFFFFF)


def _tag(field, wire):
    return _varint((field << 3) | wire)


def _ld(field, payload):
    if isinstance(payload, str):
        payload = payload.encode()
    return _tag(field, 2) + _varint(len(payload)) + payload


def tensor_proto(name, arr):
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    buf = b"".join(_tag(1, 0) + _varint(d) for d in arr.shape)
    buf += _tag(2, 0) + _varint(1)  # data_type = FLOAT
    buf += _ld(8, name)
    buf += _ld(9, arr.tobytes())
    return buf


def attr_int(name, value):
    return _ld(1, name) + _tag(3, 0) + _varint_signed(value) + _tag(20, 0) + _varint(2)


def attr_ints(name, values):
    body = _ld(1, name)
    for v in values:
        body += _tag(8, 0) + _varint_signed(v)
    return body + _tag(20, 0) + _varint(7)


def attr_float(name, value):
    return (_ld(1, name) + _tag(2, 5) + struct.pack("<f", value)
            + _tag(20, 0) + _varint(1))


def node_proto(op, inputs, outputs, attrs=(), name=""):
    buf = b"".join(_ld(1, i) for i in inputs)
    buf += b"".join(_ld(2, o) for o in outputs)
    buf += _ld(3, name or outputs[0])
    buf += _ld(4, op)
    buf += b"".join(_ld(5, a) for a in attrs)
    return buf


def value_info(name, shape):
    dims = b"".join(_ld(1, _tag(1, 0) + _varint(d)) for d in shape)
    tensor_type = _tag(1, 0) + _varint(1) + _ld(2, dims)  # elem_type, shape
    return _ld(1, name) + _ld(2, _ld(1, tensor_type))


def model_proto(nodes, initializers, inputs, outputs, graph_name="export"):
    graph = b"".join(_ld(1, n) for n in nodes)
    graph += _ld(2, graph_name)
    graph += b"".join(_ld(5, t) for t in initializers)
    graph += b"".join(_ld(11, vi) for vi in inputs)
    graph += b"".join(_ld(12, vi) for vi in outputs)
    model = _tag(1, 0) + _varint(7)  # ir_version
    model += _ld(2, "kpcacam-exporter")
    model += _ld(8, _ld(1, "") + _tag(2, 0) + _varint(13))  # opset 13
    model += _ld(7, graph)
    return model
