"""ROAD Most-Relevant-First occlusion metric.

The heatmap's top fraction of pixels is removed by noisy linear
imputation (each removed pixel becomes a weighted average of its 8
neighbors plus small Gaussian noise; removed neighbors couple the
equations into one diagonally dominant linear system, solved by
Gauss-Seidel). The metric is the softmax-confidence change, in
percentage points, after re-running inference on the imputed image.
"""

import zlib
from dataclasses import dataclass

import numpy as np

from ._native import gauss_seidel_solve
from .errors import ConvergenceError, InputError
from .tensor import ImageTensor

# base stencil weights before boundary renormalization
AXIAL_WEIGHT = 1.0 / 6.0
DIAGONAL_WEIGHT = 1.0 / 12.0
_OFFSETS = (
    (-1, 0, AXIAL_WEIGHT), (1, 0, AXIAL_WEIGHT),
    (0, -1, AXIAL_WEIGHT), (0, 1, AXIAL_WEIGHT),
    (-1, -1, DIAGONAL_WEIGHT), (-1, 1, DIAGONAL_WEIGHT),
    (1, -1, DIAGONAL_WEIGHT), (1, 1, DIAGONAL_WEIGHT),
)


@dataclass(frozen=True)
class MorfConfig:
    fraction: float = 0.25
    noise_std_frac: float = 0.01
    seed: int = 0
    solver_tol: float = 1e-6
    solver_max_iter: int = 10000

    def __post_init__(self):
        if not 0.0 < self.fraction < 1.0:
            raise InputError(f"fraction must be in (0, 1), got {self.fraction}")
        if self.noise_std_frac < 0.0:
            raise InputError("noise_std_frac must be >= 0")


@dataclass(frozen=True)
class RoadResult:
    image_id: str
    class_index: int
    p_original: float
    p_masked: float

    @property
    def delta_pct(self):
        return 100.0 * (self.p_masked - self.p_original)


def select_morf_pixels(heatmap, fraction):
    """Flat indices of the floor(fraction*h*w) highest-valued pixels,
    ties broken by row-major position."""
    heatmap = np.asarray(heatmap, dtype=np.float64)
    k = int(fraction * heatmap.size)
    if k <= 0:
        return np.empty(0, dtype=np.intp)
    order = np.argsort(-heatmap.ravel(), kind="stable")
    return order[:k]


def _noise_rng(seed, image_id, channel):
    ss = np.random.SeedSequence([int(seed), zlib.crc32(image_id.encode()), channel])
    return np.random.default_rng(ss)


def noisy_linear_imputation(image, masked, cfg, image_id=""):
    """Replace the masked pixels of an image by the stencil-average system
    solution; unmasked pixels are untouched. Deterministic for a fixed
    (image, mask, seed, image_id)."""
    if not isinstance(image, ImageTensor):
        image = ImageTensor(np.asarray(image))
    channels, h, w = image.shape
    masked = np.asarray(masked, dtype=np.intp)
    if masked.size == 0:
        return ImageTensor(image.data.copy(), image.value_range)
    if masked.min() < 0 or masked.max() >= h * w:
        raise InputError("masked pixel index out of range")
    if masked.size >= h * w:
        raise InputError("cannot mask every pixel")

    n = masked.size
    var_of = -np.ones(h * w, dtype=np.int64)
    order = np.sort(masked)  # row-major solve order, for determinism
    var_of[order] = np.arange(n)

    nbr = -np.ones((n, 8), dtype=np.int64)
    wgt = np.zeros((n, 8), dtype=np.float64)
    # per variable: constant part from unmasked neighbors (per channel later)
    const_idx = [[] for _ in range(n)]
    const_w = [[] for _ in range(n)]
    for i, flat in enumerate(order):
        r, c = divmod(int(flat), w)
        total = 0.0
        entries = []
        for dr, dc, base in _OFFSETS:
            rr, cc = r + dr, c + dc
            if 0 <= rr < h and 0 <= cc < w:
                entries.append((rr * w + cc, base))
                total += base
        for k, (q, base) in enumerate(entries):
            weight = base / total
            if var_of[q] >= 0:
                nbr[i, k] = var_of[q]
                wgt[i, k] = weight
            else:
                const_idx[i].append(q)
                const_w[i].append(weight)

    out = image.data.copy()
    for ch in range(channels):
        plane = out[ch].ravel()
        ch_range = float(plane.max() - plane.min())
        scale = ch_range if ch_range > 0.0 else max(1.0, float(np.max(np.abs(plane))))
        rng = _noise_rng(cfg.seed, image_id, ch)
        noise = rng.normal(0.0, cfg.noise_std_frac * ch_range, size=n)

        b = noise.copy()
        for i in range(n):
            if const_idx[i]:
                b[i] += float(np.dot(plane[const_idx[i]], const_w[i]))
        x = b.copy()
        tol_abs = cfg.solver_tol * scale
        _, resid = gauss_seidel_solve(x, b, nbr, wgt, tol_abs, cfg.solver_max_iter)
        if resid > tol_abs:
            raise ConvergenceError(
                f"imputation solver stalled at residual {resid:.3e} "
                f"(tolerance {tol_abs:.3e})",
                residual=resid,
            )
        plane[order] = x
    return ImageTensor(out, image.value_range)


def morf_confidence_drop(backend, image, heatmap, class_index, cfg, image_id=""):
    """Confidence delta (percentage points) after removing the heatmap's
    top fraction of pixels and re-running inference."""
    from .backend import softmax  # local import to keep modules acyclic

    if not isinstance(image, ImageTensor):
        image = ImageTensor(np.asarray(image))
    heatmap = np.asarray(heatmap, dtype=np.float64)
    if heatmap.shape != image.shape[1:]:
        raise InputError(
            f"heatmap shape {heatmap.shape} does not match image {image.shape[1:]}"
        )
    p_original = float(softmax(backend.predict(image))[class_index])
    masked = select_morf_pixels(heatmap, cfg.fraction)
    imputed = noisy_linear_imputation(image, masked, cfg, image_id=image_id)
    p_masked = float(softmax(backend.predict(imputed))[class_index])
    return RoadResult(image_id, int(class_index), p_original, p_masked)
