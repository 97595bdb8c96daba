"""Offline exporter producing ONNX models and fixture corpora for kpcacam."""

from .corpus import export_fixtures
from .models import ExportError, build_model, list_layers
from .trace import export_model

__all__ = ["ExportError", "build_model", "export_fixtures", "export_model",
           "list_layers"]

__version__ = "0.1.0"
