"""Stylometry toolkit: symmetry-generator and texture signatures for corpora of images."""

__version__ = "0.1.0"
