"""Checkpoint loading, shape validation, and container writing.

The container bytes are produced here from scratch, following the
format documented in the consumer's docs/formats.md
("stylesym-weights-v1"), so the two implementations stay independently
checkable: this side writes, the consumer validates and reads.
"""

from __future__ import annotations

import hashlib
import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .arch import TRUNCATED_VGG19

FORMAT_TAG = "stylesym-weights-v1"
CHECKPOINT_URL = "https://download.pytorch.org/models/vgg19-dcbb9e9d.pth"
_MODELS = ("vgg19",)


class ExportError(Exception):
    """Anything that prevents producing a valid container."""


def _download_help(reason: str) -> str:
    return (
        f"{reason}\n"
        f"Download the torchvision VGG-19 checkpoint manually:\n"
        f"    curl -o vgg19.pth {CHECKPOINT_URL}\n"
        f"then rerun with --checkpoint vgg19.pth"
    )


def load_source_tensors(model_id: str, checkpoint=None) -> dict:
    """Fetch the conv parameters for every exported layer.

    Args:
        model_id: only "vgg19" is supported.
        checkpoint: optional local .pth state dict; without it the
            pretrained weights are fetched through torchvision, which
            needs network access.

    Returns:
        dict layer name -> (weight, bias) float32 numpy arrays, shapes
        already validated against the expected architecture.

    Raises:
        ExportError: unknown model, unreadable/missing checkpoint (with
            download instructions), missing keys, or shape mismatches.
    """
    import torch

    if model_id not in _MODELS:
        raise ExportError(f"unsupported model {model_id!r}; supported: {_MODELS}")
    if checkpoint is not None:
        path = Path(checkpoint)
        if not path.is_file():
            raise ExportError(
                _download_help(f"checkpoint not found: {path}")
            )
        state = torch.load(path, map_location="cpu", weights_only=True)
        if isinstance(state, dict) and "state_dict" in state:
            state = state["state_dict"]
    else:
        try:
            from torchvision.models import VGG19_Weights, vgg19

            model = vgg19(weights=VGG19_Weights.IMAGENET1K_V1)
            state = model.state_dict()
        except Exception as exc:  # urllib errors, hash mismatch, ...
            raise ExportError(
                _download_help(f"could not fetch pretrained vgg19 ({exc})")
            ) from None

    tensors = {}
    for spec in TRUNCATED_VGG19:
        if spec.kind != "conv":
            continue
        pair = []
        for part in ("weight", "bias"):
            value = None
            for key in (f"features.{spec.index}.{part}", f"{spec.index}.{part}"):
                if key in state:
                    value = state[key]
                    break
            if value is None:
                raise ExportError(
                    f"checkpoint is missing features.{spec.index}.{part} "
                    f"({spec.name})"
                )
            pair.append(np.asarray(value.detach().cpu().numpy(), dtype="<f4"))
        w, b = pair
        if w.shape != spec.weight_shape:
            raise ExportError(
                f"shape mismatch for {spec.name}: weight is {tuple(w.shape)}, "
                f"expected VGG-19 gives {spec.weight_shape}"
            )
        if b.shape != (spec.out_channels,):
            raise ExportError(
                f"shape mismatch for {spec.name}: bias is {tuple(b.shape)}, "
                f"expected ({spec.out_channels},)"
            )
        tensors[spec.name] = (w, b)
    return tensors


def _container_payload(tensors: dict) -> tuple:
    """Assemble (header dict, blob bytes) for the validated tensors."""
    entries = []
    blob_parts = []
    offset = 0
    for spec in TRUNCATED_VGG19:
        if spec.kind == "conv":
            w, b = tensors[spec.name]
            region = w.tobytes() + b.tobytes()
            entry = {
                "name": spec.name,
                "kind": "conv",
                "shape": list(spec.weight_shape),
                "dtype": "f32",
                "stride": 1,
                "padding": 1,
                "byte_offset": offset,
                "byte_len": len(region),
                "sha256": hashlib.sha256(region).hexdigest(),
            }
            blob_parts.append(region)
            offset += len(region)
        else:
            entry = {
                "name": spec.name,
                "kind": spec.kind,
                "shape": [],
                "dtype": "f32",
                "byte_offset": offset,
                "byte_len": 0,
                "sha256": hashlib.sha256(b"").hexdigest(),
            }
        entries.append(entry)
    blob = b"".join(blob_parts)
    header = {
        "format": FORMAT_TAG,
        "layers": entries,
        "trailer_crc32": zlib.crc32(blob),
    }
    return header, blob


def export(model_id: str, out_dir, checkpoint=None, single_file: bool = False) -> Path:
    """Write the container plus an export manifest; returns the container path.

    The directory flavour produces header.json + weights.bin; the
    single-file flavour is `<out_dir>/weights.container` (u64 header
    length, header JSON, blob).  Output bytes depend only on the source
    tensors, so re-exports are byte-identical.
    """
    tensors = load_source_tensors(model_id, checkpoint=checkpoint)
    header, blob = _container_payload(tensors)
    header_bytes = (json.dumps(header, sort_keys=True, indent=2) + "\n").encode()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if single_file:
        container = out / "weights.container"
        container.write_bytes(struct.pack("<Q", len(header_bytes)) + header_bytes + blob)
    else:
        container = out
        (out / "header.json").write_bytes(header_bytes)
        (out / "weights.bin").write_bytes(blob)
    manifest = {
        "source": model_id if checkpoint is None else f"{model_id}:{Path(checkpoint).name}",
        "format": FORMAT_TAG,
        "layers": [
            {k: e[k] for k in ("name", "kind", "shape", "sha256")}
            for e in header["layers"]
        ],
    }
    (out / "export_manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    )
    return container


def read_container(path) -> tuple:
    """Read back a container (either flavour) and verify its checksums.

    Returns (header dict, blob bytes).  This reader exists so `probe`
    can run on any container, including ones produced elsewhere.
    """
    p = Path(path)
    if p.is_dir():
        header_bytes = (p / "header.json").read_bytes()
        blob = (p / "weights.bin").read_bytes()
    else:
        raw = p.read_bytes()
        if len(raw) < 8:
            raise ExportError(f"{p}: truncated container")
        (header_len,) = struct.unpack_from("<Q", raw)
        header_bytes = raw[8 : 8 + header_len]
        blob = raw[8 + header_len :]
    try:
        header = json.loads(header_bytes)
    except json.JSONDecodeError as exc:
        raise ExportError(f"{p}: malformed header JSON: {exc}") from None
    if header.get("format") != FORMAT_TAG:
        raise ExportError(f"{p}: unknown container format {header.get('format')!r}")
    if header.get("trailer_crc32") != zlib.crc32(blob):
        raise ExportError(f"{p}: weights blob CRC mismatch")
    for entry in header.get("layers", []):
        region = blob[entry["byte_offset"] : entry["byte_offset"] + entry["byte_len"]]
        if hashlib.sha256(region).hexdigest() != entry.get("sha256"):
            raise ExportError(f"{p}: layer {entry.get('name')!r}: sha256 mismatch")
    return header, blob
