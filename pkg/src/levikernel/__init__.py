"""Numerical construction and verification of heat kernels for non-symmetric
jump operators with exponentially tempered jumping kernels."""

from .scale import BoundFunctions, ScaleFunction, beta_fn
from .model import FreezeKernel, KappaSpec, ModelSpec, load_model

__version__ = "0.1.0"

__all__ = [
    "BoundFunctions",
    "ScaleFunction",
    "beta_fn",
    "ModelSpec",
    "KappaSpec",
    "FreezeKernel",
    "load_model",
    "__version__",
]
