"""ATPF fixture exporter: real model activations and conformance fixtures."""

from .atpf import ExportShapeError, write_atpf
from .conformance import export_synthetic_check, synthetic_fixture
from .extract import ExportRequest, export_fixture, extract_tensors, load_model_and_processor

__all__ = [
    "ExportRequest",
    "ExportShapeError",
    "export_fixture",
    "export_synthetic_check",
    "extract_tensors",
    "load_model_and_processor",
    "synthetic_fixture",
    "write_atpf",
]
