"""Eigen-CAM and KPCA-CAM heatmap construction.

Both methods reduce the HW x C feature matrix of a convolutional layer
to a single HW projection vector: Eigen-CAM projects onto the first
principal component of the (column-centered) features, KPCA-CAM
projects the kernel matrix onto its first eigenvector. The projection
is reshaped to H x W, optionally upsampled, then min-max normalized.
"""

from dataclasses import dataclass

import numpy as np

from .eigen import sign_correct, top_eigenpair
from .errors import ConfigError
from .kernels import KernelConfig, center_kernel, feature_rows, kernel_matrix
from .tensor import as_activations, bilinear_resize, minmax_normalize

CAM_METHODS = ("eigen_cam", "kpca_cam")


@dataclass(frozen=True)
class CamConfig:
    method: str = "eigen_cam"
    kernel: KernelConfig | None = None
    output_size: tuple | None = None

    def __post_init__(self):
        if self.method not in CAM_METHODS:
            raise ConfigError(f"unknown CAM method {self.method!r}")
        if self.method == "kpca_cam" and self.kernel is None:
            raise ConfigError("kpca_cam requires a kernel config")
        if self.method == "eigen_cam" and self.kernel is not None:
            raise ConfigError("eigen_cam takes no kernel config")


def project_first_component(features):
    """Eigen-CAM core: scores of each location on the first principal
    component of the column-centered features, sign-corrected."""
    F = np.asarray(features, dtype=np.float64)
    Fc = F - F.mean(axis=0, keepdims=True)
    cov = Fc.T @ Fc  # C x C: cheaper than the HW x HW Gram when HW > C
    if float(np.linalg.norm(cov)) == 0.0:
        return np.zeros(F.shape[0])
    u1 = top_eigenpair(cov).vector
    return sign_correct(Fc @ u1)


def kpca_project(features, kernel_cfg):
    """KPCA-CAM core: L = K v1, with K the (optionally centered) kernel
    matrix of the feature rows and v1 its dominant eigenvector."""
    K = kernel_matrix(features, kernel_cfg)
    if kernel_cfg.center:
        K = center_kernel(K)
    if float(np.linalg.norm(K)) == 0.0:
        return np.zeros(K.shape[0])
    v1 = top_eigenpair(K).vector
    return sign_correct(K @ v1)


def compute_cam(activations, cfg):
    """Full heatmap pipeline; the result lies in [0, 1] (all zeros if the
    projection is constant). Takes no class label by construction."""
    act = as_activations(activations)
    _, h, w = act.shape
    F = feature_rows(act)
    if cfg.method == "eigen_cam":
        proj = project_first_component(F)
    else:
        proj = kpca_project(F, cfg.kernel)
    heat = proj.reshape(h, w)
    if cfg.output_size is not None:
        heat = bilinear_resize(heat, cfg.output_size)
    return minmax_normalize(heat)
