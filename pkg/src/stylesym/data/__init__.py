"""Corpus plumbing: images, manifests, the builtin movement table, synthetic data."""

from .images import (
    ImageTensor,
    load_image,
    resize_bilinear,
    save_pgm,
    save_png,
    save_ppm,
    to_grayscale,
)
from .manifest import CorpusManifest, ManifestEntry, load_manifest, write_manifest
from .movements import ArtistMovementTable, builtin_movements
from .synth import (
    SynthStyleCorpus,
    synth_rotation_corpus,
    synth_style_corpus,
    write_style_corpus,
)

__all__ = [
    "ArtistMovementTable",
    "CorpusManifest",
    "ImageTensor",
    "ManifestEntry",
    "SynthStyleCorpus",
    "builtin_movements",
    "load_image",
    "load_manifest",
    "resize_bilinear",
    "save_pgm",
    "save_png",
    "save_ppm",
    "synth_rotation_corpus",
    "synth_style_corpus",
    "to_grayscale",
    "write_manifest",
    "write_style_corpus",
]
