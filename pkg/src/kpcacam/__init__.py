"""KPCA-CAM / Eigen-CAM toolkit with localization and MoRF evaluation."""

from ._native import HAVE_NATIVE
from .cam import CamConfig, compute_cam, kpca_project, project_first_component
from .eigen import EigenBasis, EigenPair, full_symmetric_eig, top_eigenpair
from .kernels import KernelConfig, center_kernel, feature_rows, kernel_matrix
from .localize import (
    LocalizationRecord,
    binarize,
    iou,
    largest_component_box,
    localization_accuracy,
)
from .npyio import load_npy, save_npy
from .road import (
    MorfConfig,
    RoadResult,
    morf_confidence_drop,
    noisy_linear_imputation,
    select_morf_pixels,
)
from .tensor import BoundingBox, ImageTensor, bilinear_resize, minmax_normalize

__version__ = "0.1.0"
