"""Forward-only convolutional features, Gram signatures, Gram distance.

The extractor is a plain layer list (conv / relu / maxpool) evaluated in
float64 numpy.  Weights arrive through a portable container format
(``header.json`` + ``weights.bin``, or a single length-prefixed file)
documented in docs/formats.md, or from the builtin seeded-random
fallback extractor, so the whole pipeline runs without external files.

Gram matrices are normalized by N_l * H_l * W_l so the selected layers
contribute on comparable scales; the artist signature is the per-layer
element-wise mean over the artist's paintings, and the distance between
signatures is the sum of squared Frobenius differences.
"""

from __future__ import annotations

import hashlib
import json
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .data.images import ImageTensor
from .errors import ContainerError, DataError, NumericError

#: Conventional selection for VGG-19-style containers.
VGG_SELECTION = ("conv1_1", "conv2_1", "conv3_1", "conv4_1")
#: Selection for the builtin fallback extractor.
FALLBACK_SELECTION = ("conv1", "conv2", "conv3", "conv4")

_FORMAT_TAG = "stylesym-weights-v1"


@dataclass
class ConvLayer:
    name: str
    weights: np.ndarray  # (out, in, kh, kw)
    bias: np.ndarray     # (out,)
    stride: int = 1
    padding: int = 1

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 4:
            raise ContainerError(f"conv {self.name!r}: weights must be 4-D")
        if b.shape != (w.shape[0],):
            raise ContainerError(f"conv {self.name!r}: bias shape {b.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise NumericError(f"conv {self.name!r}: non-finite parameters")
        if self.stride < 1 or self.padding < 0:
            raise ContainerError(f"conv {self.name!r}: bad stride/padding")
        self.weights, self.bias = w, b


@dataclass(frozen=True)
class ReluLayer:
    name: str


@dataclass(frozen=True)
class MaxPoolLayer:
    """Fixed 2x2 window, stride 2."""

    name: str


Layer = Union[ConvLayer, ReluLayer, MaxPoolLayer]


@dataclass
class ConvExtractor:
    layers: list

    def __post_init__(self):
        names = set()
        channels = None
        for layer in self.layers:
            if layer.name in names:
                raise ContainerError(f"duplicate layer name {layer.name!r}")
            names.add(layer.name)
            if isinstance(layer, ConvLayer):
                if channels is not None and layer.weights.shape[1] != channels:
                    raise ContainerError(
                        f"conv {layer.name!r}: expects {layer.weights.shape[1]} "
                        f"input channels but receives {channels}"
                    )
                channels = layer.weights.shape[0]
        if channels is None:
            raise ContainerError("extractor has no conv layers")

    @property
    def input_channels(self) -> int:
        for layer in self.layers:
            if isinstance(layer, ConvLayer):
                return layer.weights.shape[1]
        raise ContainerError("extractor has no conv layers")

    def layer_names(self) -> tuple:
        return tuple(layer.name for layer in self.layers)


# ---------------------------------------------------------------------------
# Forward pass
# ---------------------------------------------------------------------------


def conv2d(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int, padding: int):
    """Direct cross-correlation; x (C,H,W), w (O,C,kh,kw) -> (O,H',W')."""
    c, h, wd = x.shape
    o, ci, kh, kw = w.shape
    if ci != c:
        raise DataError(f"conv expects {ci} channels, got {c}")
    if padding:
        x = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    windows = np.lib.stride_tricks.sliding_window_view(x, (kh, kw), axis=(1, 2))
    windows = windows[:, ::stride, ::stride]
    _, oh, ow, _, _ = windows.shape
    cols = windows.transpose(1, 2, 0, 3, 4).reshape(oh * ow, c * kh * kw)
    out = cols @ w.reshape(o, -1).T + b
    return out.T.reshape(o, oh, ow)


def _maxpool2(x: np.ndarray) -> np.ndarray:
    c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    if h2 < 1 or w2 < 1:
        raise DataError(f"feature map {x.shape[1:]} too small for 2x2 pooling")
    return x[:, : h2 * 2, : w2 * 2].reshape(c, h2, 2, w2, 2).max(axis=(2, 4))


def forward_features(ex: ConvExtractor, img: ImageTensor, selection) -> dict:
    """Run the extractor, capturing maps at each selected layer name.

    Args:
        ex: the extractor.
        img: input image; channel count must match the first conv.
        selection: iterable of layer names to capture.

    Returns:
        dict name -> (N_l, H_l, W_l) float64 array, in selection order.
    """
    selection = tuple(selection)
    known = set(ex.layer_names())
    for name in selection:
        if name not in known:
            raise DataError(f"unknown layer in selection: {name!r}")
    if img.channels != ex.input_channels:
        raise DataError(
            f"extractor expects {ex.input_channels} input channels, "
            f"image has {img.channels}"
        )
    x = img.pixels
    captured = {}
    wanted = set(selection)
    for layer in ex.layers:
        if isinstance(layer, ConvLayer):
            x = conv2d(x, layer.weights, layer.bias, layer.stride, layer.padding)
        elif isinstance(layer, ReluLayer):
            x = np.maximum(x, 0.0)
        else:
            x = _maxpool2(x)
        if layer.name in wanted:
            captured[layer.name] = x.copy()
        if len(captured) == len(wanted):
            break
    return {name: captured[name] for name in selection}


# ---------------------------------------------------------------------------
# Gram signatures
# ---------------------------------------------------------------------------


def gram(fmap: np.ndarray) -> np.ndarray:
    """Channel-by-channel inner products, normalized by N_l * H_l * W_l."""
    f = np.asarray(fmap, dtype=np.float64)
    if f.ndim != 3 or f.shape[0] < 1:
        raise DataError(f"feature map must be (N, H, W), got {f.shape}")
    n, h, w = f.shape
    mat = f.reshape(n, h * w)
    return (mat @ mat.T) / float(n * h * w)


@dataclass
class GramSignature:
    """Per-layer normalized Gram matrices under a fixed selection."""

    layers: dict
    selection: tuple = field(default=())

    def __post_init__(self):
        self.selection = tuple(self.selection) or tuple(self.layers)
        if set(self.selection) != set(self.layers):
            raise DataError("signature selection does not match its layers")


def signature(ex: ConvExtractor, img: ImageTensor, selection) -> GramSignature:
    """Feature maps -> per-layer Grams in one call."""
    maps = forward_features(ex, img, selection)
    return GramSignature(
        layers={name: gram(f) for name, f in maps.items()},
        selection=tuple(selection),
    )


def artist_average_gram(signatures) -> GramSignature:
    """Element-wise mean of an artist's signatures, layer by layer."""
    signatures = list(signatures)
    if not signatures:
        raise DataError("artist has no signatures to average")
    selection = signatures[0].selection
    for s in signatures[1:]:
        if s.selection != selection:
            raise DataError("signatures have differing layer selections")
    layers = {}
    for name in selection:
        shapes = {s.layers[name].shape for s in signatures}
        if len(shapes) != 1:
            raise DataError(f"layer {name!r}: inconsistent Gram shapes {shapes}")
        layers[name] = np.mean([s.layers[name] for s in signatures], axis=0)
    return GramSignature(layers=layers, selection=selection)


def gram_distance(a: GramSignature, b: GramSignature) -> float:
    """Sum over selected layers of squared Frobenius differences."""
    if a.selection != b.selection:
        raise DataError(
            f"selection mismatch: {a.selection} vs {b.selection}"
        )
    total = 0.0
    for name in a.selection:
        ga, gb = a.layers[name], b.layers[name]
        if ga.shape != gb.shape:
            raise DataError(f"layer {name!r}: shape mismatch {ga.shape} vs {gb.shape}")
        diff = ga - gb
        total += float(np.sum(diff * diff))
    return total


# ---------------------------------------------------------------------------
# Fallback extractor
# ---------------------------------------------------------------------------


def random_extractor(seed: int = 7, in_channels: int = 3) -> ConvExtractor:
    """Deterministic 4-stage extractor (8/16/32/64 channels).

    Each stage is conv3x3 (He-scaled seeded weights, zero bias, padding 1)
    -> relu -> maxpool 2x2.  Useful wherever real pretrained weights are
    unavailable; everything downstream only needs fixed, shared filters.
    """
    rng = np.random.default_rng(seed)
    layers = []
    channels = in_channels
    for stage, out_ch in enumerate((8, 16, 32, 64), start=1):
        fan_in = channels * 9
        w = rng.standard_normal((out_ch, channels, 3, 3)) * np.sqrt(2.0 / fan_in)
        layers.append(ConvLayer(name=f"conv{stage}", weights=w, bias=np.zeros(out_ch)))
        layers.append(ReluLayer(name=f"relu{stage}"))
        layers.append(MaxPoolLayer(name=f"pool{stage}"))
        channels = out_ch
    return ConvExtractor(layers=layers)


# ---------------------------------------------------------------------------
# Weights container
# ---------------------------------------------------------------------------


def _layer_blob(layer: ConvLayer) -> bytes:
    w = np.ascontiguousarray(layer.weights, dtype="<f4").tobytes()
    b = np.ascontiguousarray(layer.bias, dtype="<f4").tobytes()
    return w + b


def save_extractor(ex: ConvExtractor, path, single_file: bool = False) -> None:
    """Write the container format (directory or single-file flavour).

    Conv parameters are serialized as little-endian float32: weights in
    (out, in, kh, kw) order followed by the bias.  The header records a
    sha256 per layer region and a CRC32 of the whole blob.
    """
    blob_parts = []
    entries = []
    offset = 0
    for layer in ex.layers:
        if isinstance(layer, ConvLayer):
            region = _layer_blob(layer)
            entry = {
                "name": layer.name,
                "kind": "conv",
                "shape": list(layer.weights.shape),
                "dtype": "f32",
                "stride": layer.stride,
                "padding": layer.padding,
                "byte_offset": offset,
                "byte_len": len(region),
                "sha256": hashlib.sha256(region).hexdigest(),
            }
            blob_parts.append(region)
            offset += len(region)
        else:
            kind = "relu" if isinstance(layer, ReluLayer) else "maxpool"
            entry = {
                "name": layer.name,
                "kind": kind,
                "shape": [],
                "dtype": "f32",
                "byte_offset": offset,
                "byte_len": 0,
                "sha256": hashlib.sha256(b"").hexdigest(),
            }
        entries.append(entry)
    blob = b"".join(blob_parts)
    header = {
        "format": _FORMAT_TAG,
        "layers": entries,
        "trailer_crc32": zlib.crc32(blob),
    }
    header_bytes = (json.dumps(header, sort_keys=True, indent=2) + "\n").encode()
    p = Path(path)
    if single_file:
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_bytes(struct.pack("<Q", len(header_bytes)) + header_bytes + blob)
    else:
        p.mkdir(parents=True, exist_ok=True)
        (p / "header.json").write_bytes(header_bytes)
        (p / "weights.bin").write_bytes(blob)


def _read_container(path: Path):
    if path.is_dir():
        header_path = path / "header.json"
        blob_path = path / "weights.bin"
        if not header_path.is_file():
            raise ContainerError(f"missing header.json in {path}")
        if not blob_path.is_file():
            raise ContainerError(f"missing weights.bin in {path}")
        return header_path.read_bytes(), blob_path.read_bytes()
    if path.is_file():
        data = path.read_bytes()
        if len(data) < 8:
            raise ContainerError(f"{path}: truncated container")
        (hlen,) = struct.unpack_from("<Q", data, 0)
        if 8 + hlen > len(data):
            raise ContainerError(f"{path}: header length {hlen} exceeds file")
        return data[8 : 8 + hlen], data[8 + hlen :]
    raise ContainerError(f"container not found: {path}")


def load_extractor(path) -> ConvExtractor:
    """Load and validate a weights container.

    Raises ContainerError naming the offending layer on byte-count or
    checksum disagreements; the blob CRC is verified first.
    """
    p = Path(path)
    header_bytes, blob = _read_container(p)
    try:
        header = json.loads(header_bytes)
    except json.JSONDecodeError as exc:
        raise ContainerError(f"{p}: malformed header JSON: {exc}") from None
    if header.get("format") != _FORMAT_TAG:
        raise ContainerError(f"{p}: unknown container format {header.get('format')!r}")
    if header.get("trailer_crc32") != zlib.crc32(blob):
        raise ContainerError(f"{p}: weights blob CRC mismatch")
    layers = []
    for entry in header.get("layers", []):
        name = entry.get("name", "?")
        kind = entry.get("kind")
        off, length = entry.get("byte_offset", 0), entry.get("byte_len", 0)
        region = blob[off : off + length]
        if len(region) != length:
            raise ContainerError(f"{p}: layer {name!r}: blob truncated")
        if hashlib.sha256(region).hexdigest() != entry.get("sha256"):
            raise ContainerError(f"{p}: layer {name!r}: sha256 mismatch")
        if kind == "conv":
            shape = tuple(entry.get("shape", ()))
            if len(shape) != 4:
                raise ContainerError(f"{p}: layer {name!r}: bad shape {shape}")
            if entry.get("dtype") != "f32":
                raise ContainerError(
                    f"{p}: layer {name!r}: unsupported dtype {entry.get('dtype')!r}"
                )
            n_w = int(np.prod(shape))
            expected = 4 * (n_w + shape[0])
            if length != expected:
                raise ContainerError(
                    f"{p}: layer {name!r}: byte count {length} does not match "
                    f"shape {shape} (expected {expected})"
                )
            w = np.frombuffer(region, dtype="<f4", count=n_w).reshape(shape)
            b = np.frombuffer(region, dtype="<f4", count=shape[0], offset=4 * n_w)
            layers.append(
                ConvLayer(
                    name=name,
                    weights=w.astype(np.float64),
                    bias=b.astype(np.float64),
                    stride=int(entry.get("stride", 1)),
                    padding=int(entry.get("padding", 1)),
                )
            )
        elif kind == "relu":
            layers.append(ReluLayer(name=name))
        elif kind == "maxpool":
            layers.append(MaxPoolLayer(name=name))
        else:
            raise ContainerError(f"{p}: layer {name!r}: unknown kind {kind!r}")
    return ConvExtractor(layers=layers)
