"""Inference backends: precomputed fixture corpora and the ONNX executor.

A backend answers two questions about an image: the class logits and
the activation tensor of the configured convolutional layer. Fixture
backends replay exporter dumps bitwise; the ONNX backend evaluates the
graph live (needed by the occlusion metric, which predicts on images
that never existed at export time).
"""

import hashlib
import json
import os

import numpy as np

from .errors import BackendError, ConfigError, InputError
from .npyio import load_npy
from .onnx_graph import OnnxExecutor, load_model
from .tensor import BoundingBox, ImageTensor

MANIFEST_KEYS = ("image_ids", "num_classes", "input_shape", "activation_layer_name")


def softmax(logits):
    """Exponent-shifted softmax; safe for extreme logits."""
    logits = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(logits)):
        raise InputError("logits contain non-finite values")
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def topk(logits, k):
    """Indices of the k largest logits, descending, ties to the lower index."""
    logits = np.asarray(logits, dtype=np.float64)
    if not 1 <= k <= logits.size:
        raise InputError(f"k must be in [1, {logits.size}], got {k}")
    order = np.argsort(-logits, kind="stable")
    return [int(i) for i in order[:k]]


def load_manifest(fixture_dir):
    path = os.path.join(fixture_dir, "manifest.json")
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read fixture manifest {path}: {exc}") from exc
    missing = [key for key in MANIFEST_KEYS if key not in manifest]
    if missing:
        raise ConfigError(f"manifest {path} is missing keys {missing}")
    if len(manifest["input_shape"]) != 3:
        raise ConfigError("manifest input_shape must be (channels, height, width)")
    return manifest


def manifest_hash(fixture_dir):
    path = os.path.join(fixture_dir, "manifest.json")
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _image_key(data):
    return hashlib.sha256(np.ascontiguousarray(data).tobytes()).hexdigest()


class FixtureBackend:
    """Replays a fixture corpus: predict/extract return the stored arrays
    bitwise for images belonging to the corpus."""

    def __init__(self, fixture_dir):
        self.fixture_dir = fixture_dir
        self.manifest = load_manifest(fixture_dir)
        self.image_ids = list(self.manifest["image_ids"])
        self.num_classes = int(self.manifest["num_classes"])
        self.input_shape = tuple(self.manifest["input_shape"])
        self.activation_layer_name = self.manifest["activation_layer_name"]
        self.value_range = tuple(self.manifest.get("value_range", (0.0, 1.0)))
        self._by_key = {}
        for image_id in self.image_ids:
            record_dir = os.path.join(fixture_dir, image_id)
            for fname in ("image.npy", "activations.npy", "logits.npy", "gt.json"):
                if not os.path.exists(os.path.join(record_dir, fname)):
                    raise ConfigError(f"fixture {image_id} is missing {fname}")

    def _path(self, image_id, fname):
        return os.path.join(self.fixture_dir, image_id, fname)

    def image(self, image_id):
        data = load_npy(self._path(image_id, "image.npy"))
        self._by_key.setdefault(_image_key(data), image_id)
        return ImageTensor(data, self.value_range)

    def logits(self, image_id):
        return load_npy(self._path(image_id, "logits.npy")).ravel()

    def activations(self, image_id):
        return load_npy(self._path(image_id, "activations.npy"))

    def ground_truth(self, image_id):
        with open(self._path(image_id, "gt.json")) as fh:
            gt = json.load(fh)
        boxes = [BoundingBox(*(int(v) for v in box)).validate() for box in gt["boxes"]]
        return int(gt["class_index"]), boxes

    def _lookup(self, image):
        key = _image_key(image.data)
        if key not in self._by_key:
            # populate lazily; corpora are small
            for image_id in self.image_ids:
                self.image(image_id)
        if key not in self._by_key:
            raise BackendError("image is not part of the fixture corpus")
        return self._by_key[key]

    def predict(self, image):
        self._check_shape(image)
        return self.logits(self._lookup(image))

    def extract_activations(self, image):
        self._check_shape(image)
        return self.activations(self._lookup(image))

    def _check_shape(self, image):
        if tuple(image.shape) != self.input_shape:
            raise InputError(
                f"image shape {tuple(image.shape)} != backend input {self.input_shape}"
            )


class OnnxBackend:
    """Runs an exported ONNX graph with the activation layer declared as a
    second graph output."""

    def __init__(self, model_path, num_classes, input_shape, activation_layer_name):
        self.graph = load_model(model_path)
        self.executor = OnnxExecutor(self.graph)
        self.num_classes = int(num_classes)
        self.input_shape = tuple(input_shape)
        self.activation_layer_name = activation_layer_name
        if activation_layer_name not in self.graph.outputs:
            raise ConfigError(
                f"activation layer {activation_layer_name!r} is not a graph "
                f"output (outputs: {self.graph.outputs})"
            )
        logit_outputs = [n for n in self.graph.outputs if n != activation_layer_name]
        if len(logit_outputs) != 1:
            raise ConfigError(
                f"expected exactly one logits output, got {logit_outputs}"
            )
        self.logits_name = logit_outputs[0]

    @classmethod
    def from_fixture_manifest(cls, model_path, fixture_dir):
        manifest = load_manifest(fixture_dir)
        return cls(
            model_path,
            manifest["num_classes"],
            manifest["input_shape"],
            manifest["activation_layer_name"],
        )

    def _run(self, image):
        if tuple(image.shape) != self.input_shape:
            raise InputError(
                f"image shape {tuple(image.shape)} != model input {self.input_shape}"
            )
        return self.executor.run(image.data)

    def predict(self, image):
        logits = self._run(image)[self.logits_name].ravel()
        if logits.size != self.num_classes:
            raise BackendError(
                f"model produced {logits.size} logits, expected {self.num_classes}"
            )
        return logits

    def extract_activations(self, image):
        act = self._run(image)[self.activation_layer_name]
        return act[0] if act.ndim == 4 else act
