"""Deterministic probe image and reference activations.

The probe is a synthetic 224x224 RGB gradient (red ramps left to right,
green top to bottom, blue is their mean), so validation against another
implementation needs no dataset.  Activations are computed with this
package's own torch forward pass and recorded per tap layer as shape,
mean, max, and the first 8 values in flat C order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .arch import TAP_LAYERS
from .export import ExportError, read_container

PROBE_SIZE = 224


def probe_image(size: int = PROBE_SIZE) -> np.ndarray:
    """(3, size, size) float64 gradient image in [0, 1].

    R[y, x] = x / (size-1), G[y, x] = y / (size-1), B = (R + G) / 2.
    At the default size that is R = x/223, G = y/223, B = (x+y)/446.
    """
    if size < 2:
        raise ExportError(f"probe size must be >= 2, got {size}")
    ramp = np.arange(size, dtype=np.float64) / (size - 1)
    r = np.tile(ramp, (size, 1))
    g = r.T
    return np.stack([r, g, (r + g) / 2.0])


def _torch_modules(header: dict, blob: bytes):
    import torch

    modules = []
    for entry in header["layers"]:
        kind = entry["kind"]
        if kind == "conv":
            shape = tuple(entry["shape"])
            n_w = int(np.prod(shape))
            region = blob[entry["byte_offset"] : entry["byte_offset"] + entry["byte_len"]]
            w = np.frombuffer(region, dtype="<f4", count=n_w).reshape(shape)
            b = np.frombuffer(region, dtype="<f4", count=shape[0], offset=4 * n_w)
            conv = torch.nn.Conv2d(
                shape[1],
                shape[0],
                kernel_size=shape[2:],
                stride=entry.get("stride", 1),
                padding=entry.get("padding", 1),
            )
            with torch.no_grad():
                conv.weight.copy_(torch.from_numpy(w.copy()))
                conv.bias.copy_(torch.from_numpy(b.copy()))
            modules.append((entry["name"], conv))
        elif kind == "relu":
            modules.append((entry["name"], torch.nn.ReLU()))
        elif kind == "maxpool":
            modules.append((entry["name"], torch.nn.MaxPool2d(2, 2)))
        else:
            raise ExportError(f"unknown layer kind {kind!r} in container")
    return modules


def forward_captures(container, selection=TAP_LAYERS, size: int = PROBE_SIZE) -> dict:
    """Run the probe through the container's stack; capture named maps.

    Returns dict name -> (C, H, W) float32 array, in selection order.
    """
    import torch

    header, blob = read_container(container)
    modules = _torch_modules(header, blob)
    known = {name for name, _ in modules}
    selection = tuple(selection)
    for name in selection:
        if name not in known:
            raise ExportError(f"unknown layer in selection: {name!r}")
    x = torch.from_numpy(probe_image(size).astype(np.float32)).unsqueeze(0)
    captured = {}
    wanted = set(selection)
    with torch.no_grad():
        for name, module in modules:
            x = module(x)
            if name in wanted:
                captured[name] = x[0].numpy().copy()
            if len(captured) == len(wanted):
                break
    return {name: captured[name] for name in selection}


def reference_activations(container, selection=TAP_LAYERS, size: int = PROBE_SIZE) -> dict:
    """Stats payload for each selected layer (shape/mean/max/first 8)."""
    captures = forward_captures(container, selection=selection, size=size)
    layers = {}
    for name, act in captures.items():
        flat = act.ravel()
        layers[name] = {
            "shape": list(act.shape),
            "mean": float(flat.mean()),
            "max": float(flat.max()),
            "first8": [float(v) for v in flat[:8]],
        }
    return {
        "container_format": "stylesym-weights-v1",
        "probe": {
            "size": size,
            "red": "x / (size-1)",
            "green": "y / (size-1)",
            "blue": "(x + y) / (2*(size-1))",
        },
        "layers": layers,
    }


def write_reference(container, out_path, selection=TAP_LAYERS, size: int = PROBE_SIZE) -> Path:
    """Serialize `reference_activations` as reproducible JSON."""
    payload = reference_activations(container, selection=selection, size=size)
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return out
