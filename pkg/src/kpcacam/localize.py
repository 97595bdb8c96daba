"""Weakly-supervised localization protocol.

Heatmap -> 15%-of-max binarization -> largest 8-connected component ->
tight bounding box -> IoU against ground truth -> loc1/loc5 aggregation
over the correctly-classified subsets.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import InputError
from .tensor import BoundingBox

EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


@dataclass(frozen=True)
class LocalizationRecord:
    image_id: str
    gt_box: BoundingBox
    gt_class: int
    pred_box: BoundingBox | None
    iou: float | None
    top1_correct: bool
    top5_correct: bool

    def __post_init__(self):
        if (self.pred_box is None) != (self.iou is None):
            raise InputError("iou must be present exactly when pred_box is")
        if self.top1_correct and not self.top5_correct:
            raise InputError("top1_correct implies top5_correct")


def binarize(heatmap, frac=0.15):
    """Pixels at or above frac * max(map); an all-zero map selects nothing."""
    heatmap = np.asarray(heatmap, dtype=np.float64)
    if not 0.0 < frac < 1.0:
        raise InputError(f"threshold fraction must be in (0, 1), got {frac}")
    peak = heatmap.max()
    if peak <= 0.0:
        return np.zeros(heatmap.shape, dtype=bool)
    return heatmap >= frac * peak


def largest_component_box(mask):
    """Tight box of the biggest 8-connected component, or None if empty.

    Ties on pixel count go to the component whose first pixel comes
    earliest in row-major order (scipy labels in that scan order).
    """
    mask = np.asarray(mask, dtype=bool)
    labels, count = ndimage.label(mask, structure=EIGHT_CONNECTED)
    if count == 0:
        return None
    sizes = ndimage.sum_labels(mask, labels, index=np.arange(1, count + 1))
    best = int(np.argmax(sizes)) + 1  # argmax keeps the lowest label on ties
    ys, xs = np.nonzero(labels == best)
    return BoundingBox(int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1)


def iou(a, b):
    """Intersection-over-union of two pixel boxes (inclusive-exclusive)."""
    a.validate()
    b.validate()
    ix = max(0, min(a.x_max, b.x_max) - max(a.x_min, b.x_min))
    iy = max(0, min(a.y_max, b.y_max) - max(a.y_min, b.y_min))
    inter = ix * iy
    union = a.area + b.area - inter
    return inter / union


def best_iou(pred, gt_boxes):
    """Score against the ground-truth box with maximal IoU (multi-box images)."""
    return max(iou(pred, g) for g in gt_boxes)


def localization_accuracy(records, iou_threshold=0.5):
    """(loc1, loc5) over the top-1- and top-5-correct subsets respectively.

    A hit needs IoU >= iou_threshold. An empty denominator yields None
    for that metric.
    """
    records = list(records)
    if not records:
        raise InputError("no localization records")

    def rate(selected):
        if not selected:
            return None
        hits = sum(
            1 for r in selected if r.iou is not None and r.iou >= iou_threshold
        )
        return hits / len(selected)

    loc1 = rate([r for r in records if r.top1_correct])
    loc5 = rate([r for r in records if r.top5_correct])
    return loc1, loc5
