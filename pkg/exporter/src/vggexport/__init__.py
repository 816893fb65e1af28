"""Export a truncated VGG-19 into the stylesym weights container."""

from .arch import TAP_LAYERS, TRUNCATED_VGG19
from .export import ExportError, export, load_source_tensors
from .probe import forward_captures, probe_image, reference_activations, write_reference

__all__ = [
    "ExportError",
    "TAP_LAYERS",
    "TRUNCATED_VGG19",
    "export",
    "forward_captures",
    "load_source_tensors",
    "probe_image",
    "reference_activations",
    "write_reference",
]
