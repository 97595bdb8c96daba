"""Dense tensor containers and grid utilities shared by the whole pipeline.

Arrays are plain float64 numpy arrays; the helpers here validate the
shapes/finiteness contracts and implement the two grid operations every
CAM needs: align-corners bilinear resize and min-max normalization.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InputError


class BoundingBox(NamedTuple):
    """Axis-aligned pixel rectangle, [x_min, x_max) x [y_min, y_max)."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def validate(self):
        if not (0 <= self.x_min < self.x_max and 0 <= self.y_min < self.y_max):
            raise InputError(f"degenerate bounding box {self}")
        return self

    @property
    def area(self):
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)


@dataclass(frozen=True)
class ImageTensor:
    """Channel-first image with its recorded value range (lo, hi)."""

    data: np.ndarray          # (channels, height, width)
    value_range: tuple = (0.0, 1.0)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3 or data.shape[0] not in (1, 3):
            raise InputError(f"image must be (1|3, h, w), got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise InputError("image contains non-finite values")
        object.__setattr__(self, "data", data)

    @property
    def shape(self):
        return self.data.shape


def as_activations(arr):
    """Validate and return a (C, H, W) float64 activation tensor."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 3 or min(arr.shape) < 1:
        raise InputError(f"activations must be rank-3 with positive dims, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("activations contain non-finite values")
    return arr


def bilinear_resize(heatmap, target):
    """Align-corners bilinear resize of a 2-D map to (h, w).

    Corner pixels of the output equal corner pixels of the input whenever
    the input has at least 2 samples per axis.
    """
    heatmap = np.asarray(heatmap, dtype=np.float64)
    if heatmap.ndim != 2:
        raise InputError(f"expected a 2-D map, got shape {heatmap.shape}")
    src_h, src_w = heatmap.shape
    out_h, out_w = int(target[0]), int(target[1])
    if out_h < 1 or out_w < 1:
        raise InputError(f"invalid target size {target}")
    if (out_h, out_w) == (src_h, src_w):
        return heatmap.copy()

    ys = _sample_coords(src_h, out_h)
    xs = _sample_coords(src_w, out_w)
    y0 = np.clip(np.floor(ys).astype(np.intp), 0, src_h - 1)
    x0 = np.clip(np.floor(xs).astype(np.intp), 0, src_w - 1)
    y1 = np.minimum(y0 + 1, src_h - 1)
    x1 = np.minimum(x0 + 1, src_w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]

    top = heatmap[np.ix_(y0, x0)] * (1 - wx) + heatmap[np.ix_(y0, x1)] * wx
    bot = heatmap[np.ix_(y1, x0)] * (1 - wx) + heatmap[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bot * wy


def _sample_coords(src, dst):
    if dst == 1 or src == 1:
        return np.zeros(dst)
    return np.arange(dst) * ((src - 1) / (dst - 1))


def minmax_normalize(heatmap):
    """Rescale to [0, 1]; a constant map collapses to all zeros."""
    heatmap = np.asarray(heatmap, dtype=np.float64)
    lo = heatmap.min()
    hi = heatmap.max()
    if hi == lo:
        return np.zeros_like(heatmap)
    return (heatmap - lo) / (hi - lo)
