"""Pairwise kernel matrices over flattened feature maps.

Feature vectors are the per-location channel columns of an activation
tensor; the kernel matrix is HW x HW. Double-centering is applied by
default so that the linear kernel reproduces ordinary PCA.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError
from .tensor import as_activations

KERNEL_FAMILIES = ("rbf", "sigmoid", "linear")

# gamma defaults quoted per family when the caller leaves it unset
DEFAULT_GAMMA = {"rbf": 0.001, "sigmoid": 0.1}


@dataclass(frozen=True)
class KernelConfig:
    family: str = "sigmoid"
    gamma: float | None = None
    r: float = 0.0
    center: bool = True

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise ConfigError(f"unknown kernel family {self.family!r}")
        if self.family != "linear":
            if self.gamma is None:
                object.__setattr__(self, "gamma", DEFAULT_GAMMA[self.family])
            if not self.gamma > 0:
                raise ConfigError(f"gamma must be positive, got {self.gamma}")


def feature_rows(activations):
    """Flatten a (C, H, W) tensor into an HW x C matrix, rows in row-major
    spatial order: row h*W + w holds the channel vector at (h, w)."""
    act = as_activations(activations)
    c, h, w = act.shape
    return act.reshape(c, h * w).T.copy()


def kernel_matrix(features, cfg):
    """Pairwise kernel evaluations K[i, j] = k(F[i], F[j]).

    Symmetry is enforced by construction (upper triangle mirrored);
    the RBF diagonal is exactly 1.
    """
    F = np.asarray(features, dtype=np.float64)
    if F.ndim != 2 or F.shape[0] < 1 or F.shape[1] < 1:
        raise InputError(f"feature matrix must be 2-D and nonempty, got {F.shape}")
    if not np.all(np.isfinite(F)):
        raise InputError("feature matrix contains non-finite values")

    G = F @ F.T
    if cfg.family == "linear":
        K = G
    elif cfg.family == "rbf":
        sq = np.diag(G)
        d2 = sq[:, None] + sq[None, :] - 2.0 * G
        np.maximum(d2, 0.0, out=d2)
        K = np.exp(-cfg.gamma * d2)
        np.fill_diagonal(K, 1.0)
    else:  # sigmoid
        K = np.tanh(cfg.gamma * G + cfg.r)
    # mirror the upper triangle so symmetry is exact, not just approximate
    K = np.triu(K) + np.triu(K, 1).T
    return K


def center_kernel(K):
    """Double centering K' = K - 1n K - K 1n + 1n K 1n (1n = ones/n).

    Every row and column of the result sums to zero; symmetric input
    stays symmetric.
    """
    K = np.asarray(K, dtype=np.float64)
    n = K.shape[0]
    row_means = K.mean(axis=1, keepdims=True)
    col_means = K.mean(axis=0, keepdims=True)
    total = K.mean()
    Kc = K - row_means - col_means + total
    return 0.5 * (Kc + Kc.T)
