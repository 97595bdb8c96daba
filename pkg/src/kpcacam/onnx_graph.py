"""Self-contained ONNX model reader and numpy graph executor.

Parses the protobuf wire format directly (no protobuf runtime needed)
and evaluates the small op vocabulary CNN classifiers are built from.
Models are expected to be topologically sorted, single-batch, float32.
"""

import struct

import numpy as np

from .errors import BackendError

# --- protobuf wire-format primitives ---------------------------------------


def _read_varint(buf, pos):
    result = 0
    shift = 0
    while True:
        byte = buf[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7
        if shift > 70:
            raise BackendError("malformed varint in ONNX file")


def _signed(value):
    return value - (1 << 64) if value >= (1 << 63) else value


def _fields(buf):
    """Yield (field_number, wire_type, value) triples of one message."""
    pos = 0
    end = len(buf)
    while pos < end:
        key, pos = _read_varint(buf, pos)
        field, wire = key >> 3, key & 0x07
        if wire == 0:
            value, pos = _read_varint(buf, pos)
        elif wire == 1:
            value = buf[pos:pos + 8]
            pos += 8
        elif wire == 2:
            length, pos = _read_varint(buf, pos)
            value = buf[pos:pos + length]
            pos += length
        elif wire == 5:
            value = buf[pos:pos + 4]
            pos += 4
        else:
            raise BackendError(f"unsupported protobuf wire type {wire}")
        yield field, wire, value


def _packed_varints(value, wire):
    if wire == 0:
        return [_signed(value)]
    out = []
    pos = 0
    while pos < len(value):
        v, pos = _read_varint(value, pos)
        out.append(_signed(v))
    return out


# --- ONNX message decoding ---------------------------------------------------

_TENSOR_DTYPES = {1: "<f4", 6: "<i4", 7: "<i8", 11: "<f8"}


def _decode_tensor(buf):
    dims, dtype, raw, name = [], None, None, ""
    float_data, int64_data, int32_data = [], [], []
    for field, wire, value in _fields(buf):
        if field == 1:
            dims.extend(_packed_varints(value, wire))
        elif field == 2:
            dtype = value
        elif field == 4:
            if wire == 5:
                float_data.append(struct.unpack("<f", value)[0])
            else:
                float_data.extend(
                    struct.unpack(f"<{len(value) // 4}f", value)
                )
        elif field == 5:
            int32_data.extend(_packed_varints(value, wire))
        elif field == 7:
            int64_data.extend(_packed_varints(value, wire))
        elif field == 8:
            name = value.decode()
        elif field == 9:
            raw = value
    if dtype not in _TENSOR_DTYPES:
        raise BackendError(f"tensor {name!r}: unsupported ONNX data type {dtype}")
    np_dtype = np.dtype(_TENSOR_DTYPES[dtype])
    if raw is not None:
        arr = np.frombuffer(raw, dtype=np_dtype)
    elif float_data:
        arr = np.array(float_data, dtype=np_dtype)
    elif int64_data or int32_data:
        arr = np.array(int64_data or int32_data, dtype=np_dtype)
    else:
        arr = np.zeros(0, dtype=np_dtype)
    return name, arr.reshape(dims).astype(np.float64)


def _decode_attribute(buf):
    name, value = "", None
    for field, wire, raw in _fields(buf):
        if field == 1:
            name = raw.decode()
        elif field == 2:
            value = struct.unpack("<f", raw)[0]
        elif field == 3:
            value = _signed(raw)
        elif field == 4:
            value = raw.decode()
        elif field == 5:
            value = _decode_tensor(raw)[1]
        elif field == 7:
            lst = value if isinstance(value, list) else []
            if wire == 5:
                lst.append(struct.unpack("<f", raw)[0])
            else:
                lst.extend(struct.unpack(f"<{len(raw) // 4}f", raw))
            value = lst
        elif field == 8:
            value = (value if isinstance(value, list) else []) + _packed_varints(raw, wire)
    return name, value


def _decode_node(buf):
    node = {"inputs": [], "outputs": [], "op": "", "name": "", "attrs": {}}
    for field, _, value in _fields(buf):
        if field == 1:
            node["inputs"].append(value.decode())
        elif field == 2:
            node["outputs"].append(value.decode())
        elif field == 3:
            node["name"] = value.decode()
        elif field == 4:
            node["op"] = value.decode()
        elif field == 5:
            aname, avalue = _decode_attribute(value)
            node["attrs"][aname] = avalue
    return node


def _decode_value_info(buf):
    for field, _, value in _fields(buf):
        if field == 1:
            return value.decode()
    return ""


class OnnxGraph:
    """Decoded ONNX graph: nodes in file (topological) order plus
    initializer arrays and declared input/output names."""

    def __init__(self, nodes, initializers, inputs, outputs):
        self.nodes = nodes
        self.initializers = initializers
        self.inputs = inputs
        self.outputs = outputs


def load_model(path):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise BackendError(f"cannot read ONNX model {path}: {exc}") from exc
    graph_buf = None
    for field, _, value in _fields(data):
        if field == 7:
            graph_buf = value
    if graph_buf is None:
        raise BackendError(f"{path}: no graph found in ONNX model")

    nodes, initializers, inputs, outputs = [], {}, [], []
    for field, _, value in _fields(graph_buf):
        if field == 1:
            nodes.append(_decode_node(value))
        elif field == 5:
            name, arr = _decode_tensor(value)
            initializers[name] = arr
        elif field == 11:
            inputs.append(_decode_value_info(value))
        elif field == 12:
            outputs.append(_decode_value_info(value))
    return OnnxGraph(nodes, initializers, inputs, outputs)


# --- numpy op kernels --------------------------------------------------------


def _conv2d(x, w, b, pads, strides):
    cin, hin, win = x.shape
    cout, _, kh, kw = w.shape
    pt, pl, pb, pr = pads
    xp = np.pad(x, ((0, 0), (pt, pb), (pl, pr)))
    sh, sw = strides
    hout = (xp.shape[1] - kh) // sh + 1
    wout = (xp.shape[2] - kw) // sw + 1
    # im2col
    cols = np.empty((cin * kh * kw, hout * wout))
    idx = 0
    for c in range(cin):
        for i in range(kh):
            for j in range(kw):
                patch = xp[c, i:i + hout * sh:sh, j:j + wout * sw:sw]
                cols[idx] = patch.ravel()
                idx += 1
    out = w.reshape(cout, -1) @ cols
    if b is not None:
        out += b[:, None]
    return out.reshape(cout, hout, wout)


def _pool2d(x, kernel, strides, pads, reducer):
    cin, hin, win = x.shape
    kh, kw = kernel
    pt, pl, pb, pr = pads
    fill = -np.inf if reducer is np.max else 0.0
    xp = np.pad(x, ((0, 0), (pt, pb), (pl, pr)), constant_values=fill)
    sh, sw = strides
    hout = (xp.shape[1] - kh) // sh + 1
    wout = (xp.shape[2] - kw) // sw + 1
    out = np.empty((cin, hout, wout))
    for i in range(hout):
        for j in range(wout):
            window = xp[:, i * sh:i * sh + kh, j * sw:j * sw + kw]
            out[:, i, j] = reducer(window, axis=(1, 2))
    return out


def _batch(x):
    """Strip/re-add the leading batch-1 axis around spatial ops."""
    return x[0] if x.ndim == 4 else x


class OnnxExecutor:
    """Evaluates a loaded graph on one (C, H, W) input image."""

    def __init__(self, graph):
        self.graph = graph
        unsupported = {n["op"] for n in graph.nodes} - set(_OPS)
        if unsupported:
            raise BackendError(f"unsupported ONNX ops: {sorted(unsupported)}")

    def run(self, image_chw):
        values = dict(self.graph.initializers)
        feed_names = [n for n in self.graph.inputs if n not in values]
        if len(feed_names) != 1:
            raise BackendError(f"expected one graph input, found {feed_names}")
        values[feed_names[0]] = np.asarray(image_chw, dtype=np.float64)[None]
        for node in self.graph.nodes:
            args = [values[name] for name in node["inputs"] if name]
            results = _OPS[node["op"]](node, args)
            for name, val in zip(node["outputs"], results):
                values[name] = val
        out = {}
        for name in self.graph.outputs:
            if name not in values:
                raise BackendError(f"graph output {name!r} was never produced")
            out[name] = values[name]
        return out


def _op_conv(node, args):
    x = _batch(args[0])
    w = args[1]
    b = args[2] if len(args) > 2 else None
    attrs = node["attrs"]
    if attrs.get("group", 1) != 1:
        raise BackendError("grouped convolution is not supported")
    if any(d != 1 for d in attrs.get("dilations", [1, 1])):
        raise BackendError("dilated convolution is not supported")
    pads = attrs.get("pads", [0, 0, 0, 0])
    strides = attrs.get("strides", [1, 1])
    return [_conv2d(x, w, b, pads, strides)[None]]


def _op_maxpool(node, args):
    attrs = node["attrs"]
    kernel = attrs["kernel_shape"]
    return [_pool2d(
        _batch(args[0]), kernel,
        attrs.get("strides", kernel), attrs.get("pads", [0, 0, 0, 0]),
        np.max,
    )[None]]


def _op_avgpool(node, args):
    attrs = node["attrs"]
    kernel = attrs["kernel_shape"]
    return [_pool2d(
        _batch(args[0]), kernel,
        attrs.get("strides", kernel), attrs.get("pads", [0, 0, 0, 0]),
        np.mean,
    )[None]]


def _op_global_avgpool(node, args):
    x = _batch(args[0])
    return [x.mean(axis=(1, 2))[None, :, None, None]]


def _op_gemm(node, args):
    attrs = node["attrs"]
    a, b = args[0], args[1]
    if attrs.get("transA", 0):
        a = a.T
    if attrs.get("transB", 0):
        b = b.T
    y = attrs.get("alpha", 1.0) * (a @ b)
    if len(args) > 2:
        y = y + attrs.get("beta", 1.0) * args[2]
    return [y]


def _op_flatten(node, args):
    axis = node["attrs"].get("axis", 1)
    x = args[0]
    lead = int(np.prod(x.shape[:axis])) if axis else 1
    return [x.reshape(lead, -1)]


def _op_reshape(node, args):
    shape = [int(s) for s in args[1].ravel()]
    x = args[0]
    shape = [x.shape[i] if s == 0 else s for i, s in enumerate(shape)]
    return [x.reshape(shape)]


def _op_softmax(node, args):
    x = args[0]
    axis = node["attrs"].get("axis", -1)
    z = x - x.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return [e / e.sum(axis=axis, keepdims=True)]


_OPS = {
    "Conv": _op_conv,
    "Relu": lambda node, args: [np.maximum(args[0], 0.0)],
    "MaxPool": _op_maxpool,
    "AveragePool": _op_avgpool,
    "GlobalAveragePool": _op_global_avgpool,
    "Gemm": _op_gemm,
    "MatMul": lambda node, args: [args[0] @ args[1]],
    "Add": lambda node, args: [args[0] + args[1]],
    "Flatten": _op_flatten,
    "Reshape": _op_reshape,
    "Identity": lambda node, args: [args[0]],
    "Softmax": _op_softmax,
}
