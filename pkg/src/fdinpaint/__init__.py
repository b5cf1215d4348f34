"""Exemplar-based inpainting with finite-difference structure matching."""

from .core import InpaintMask, PatchSpec, RasterImage, load_image, load_mask, save_image
from .engine import DeadlockError, EmptyTrainingSetError, EngineConfig, inpaint, inpaint_rgb

__version__ = "0.1.0"

__all__ = [
    "DeadlockError",
    "EmptyTrainingSetError",
    "EngineConfig",
    "InpaintMask",
    "PatchSpec",
    "RasterImage",
    "inpaint",
    "inpaint_rgb",
    "load_image",
    "load_mask",
    "save_image",
]
