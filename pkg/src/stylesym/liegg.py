"""Symmetry-generator extraction from a trained scorer, plus flow rendering.

The scorer's zero level set encodes class membership; a first-order
expansion of invariance along an algebra direction h gives, per sample,
``<grad f(x), h . x> = 0``.  Stacking one row per sample over a basis of
candidate directions yields the polarization matrix E; symmetries are
the right-singular vectors of E with the smallest singular values.

Two algebra parametrizations:

* `PixelLinear(n)` -- the full GL(n) pixel-space algebra spanned by the
  elementary matrices E_ij, D = n^2 columns.
* `Affine2D()` -- six coordinate-space generators (translate-x,
  translate-y, scale-x, scale-y, rotation, shear) acting on the image
  through its spatial gradient in normalized [-1, 1]^2 coordinates.

Sign convention: (h . x)(p) = -grad x(p) . (M_a p~), i.e. the transport
of the image under the coordinate flow; `generator_flow` renders the
matching pullback exp(-t M).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .data.images import ImageTensor
from .errors import DataError, NumericError
from .numerics import matrix_exp, svd

AFFINE_BASIS_NAMES = (
    "translate_x",
    "translate_y",
    "scale_x",
    "scale_y",
    "rotation",
    "shear",
)

# 2x3 matrices mapping homogeneous (px, py, 1) to a coordinate velocity.
_AFFINE_BASIS = np.array(
    [
        [[0.0, 0.0, 1.0], [0.0, 0.0, 0.0]],  # translate-x
        [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]],  # translate-y
        [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]],  # scale-x
        [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0]],  # scale-y
        [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0]],  # rotation
        [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]],  # shear
    ]
)


@dataclass(frozen=True)
class PixelLinear:
    """Pixel-space GL(n) algebra; input is a flat n-vector."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DataError(f"PixelLinear needs n >= 1, got {self.n}")
        if self.n > 256:
            raise DataError(
                f"PixelLinear capped at n <= 256 inputs, got {self.n}"
            )

    @property
    def dim(self) -> int:
        return self.n * self.n


@dataclass(frozen=True)
class Affine2D:
    """Six-dimensional affine coordinate algebra on [-1, 1]^2."""

    @property
    def dim(self) -> int:
        return 6


AlgebraParam = Union[PixelLinear, Affine2D]


def affine_basis_matrix(index: int) -> np.ndarray:
    """3x3 homogeneous generator for one affine basis element (last row 0)."""
    if not 0 <= index < 6:
        raise DataError(f"affine basis index out of range: {index}")
    m = np.zeros((3, 3))
    m[:2] = _AFFINE_BASIS[index]
    return m


def normalized_grid(height: int, width: int):
    """Half-pixel-centered normalized coordinates; py grows downward."""
    px = (2.0 * (np.arange(width) + 0.5) - width) / width
    py = (2.0 * (np.arange(height) + 0.5) - height) / height
    return px, py


def _as_plane(img) -> np.ndarray:
    if isinstance(img, ImageTensor):
        if img.channels != 1:
            raise DataError("affine action expects a grayscale image")
        return img.plane(0)
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise DataError(f"expected a 2-D image plane, got shape {arr.shape}")
    return arr


def _image_velocity_fields(plane: np.ndarray):
    """Spatial gradient and coordinate grids shared by the 6 basis actions."""
    h, w = plane.shape
    px, py = normalized_grid(h, w)
    gy, gx = np.gradient(plane, 2.0 / h, 2.0 / w)
    return gx, gy, px[np.newaxis, :], py[:, np.newaxis]


def _affine_action(plane: np.ndarray, index: int) -> np.ndarray:
    gx, gy, px, py = _image_velocity_fields(plane)
    m = _AFFINE_BASIS[index]
    vx = m[0, 0] * px + m[0, 1] * py + m[0, 2]
    vy = m[1, 0] * px + m[1, 1] * py + m[1, 2]
    return -(gx * vx + gy * vy)


def basis_action(param: AlgebraParam, basis_index: int, img) -> np.ndarray:
    """Perturbation field (h_a . x) flattened to a vector.

    Args:
        param: algebra parametrization.
        basis_index: which basis element, 0 <= index < param.dim.
        img: flat n-vector for PixelLinear; 2-D grayscale plane (or
            1-channel ImageTensor) for Affine2D.

    Returns:
        1-D float array of the same length as the flattened input.
    """
    if isinstance(param, PixelLinear):
        if not 0 <= basis_index < param.dim:
            raise DataError(f"basis index out of range: {basis_index}")
        x = np.asarray(img, dtype=np.float64).ravel()
        if x.size != param.n:
            raise DataError(
                f"PixelLinear({param.n}) got input of length {x.size}"
            )
        i, j = divmod(basis_index, param.n)
        out = np.zeros(param.n)
        out[i] = x[j]
        return out
    if isinstance(param, Affine2D):
        if not 0 <= basis_index < 6:
            raise DataError(f"basis index out of range: {basis_index}")
        return _affine_action(_as_plane(img), basis_index).ravel()
    raise DataError(f"unknown algebra parametrization: {param!r}")


def polarization(
    gradient_fn,
    samples,
    param: AlgebraParam,
    normalize_rows: bool = True,
) -> np.ndarray:
    """Assemble the polarization matrix E: one row per sample.

    Args:
        gradient_fn: maps a flat input vector to d(scorer)/d(input).
        samples: iterable of inputs (flat vectors for PixelLinear, 2-D
            planes or grayscale ImageTensors for Affine2D).
        param: algebra parametrization (fixes the column count D).
        normalize_rows: scale each row to unit length (zero rows kept);
            keeps a few high-gradient samples from dominating the SVD.

    Returns:
        (n_samples, D) float64 matrix, entries finite.
    """
    samples = list(samples)
    if not samples:
        raise DataError("polarization needs at least one sample")
    rows = []
    for sample in samples:
        if isinstance(param, PixelLinear):
            x = np.asarray(sample, dtype=np.float64).ravel()
            if x.size != param.n:
                raise DataError(
                    f"PixelLinear({param.n}) got sample of length {x.size}"
                )
            grad = np.asarray(gradient_fn(x), dtype=np.float64).ravel()
            # <grad, E_ij x> = grad_i * x_j: the outer product, vectorized.
            row = np.outer(grad, x).ravel()
        else:
            plane = _as_plane(sample)
            grad = np.asarray(
                gradient_fn(plane.ravel()), dtype=np.float64
            ).reshape(plane.shape)
            gx, gy, px, py = _image_velocity_fields(plane)
            gdotx = np.sum(grad * gx)
            gdoty = np.sum(grad * gy)
            gdotxx = np.sum(grad * gx * px)
            gdotyy = np.sum(grad * gy * py)
            gdotxy = np.sum(grad * gx * py)
            gdotyx = np.sum(grad * gy * px)
            row = -np.array(
                [
                    gdotx,                # translate-x
                    gdoty,                # translate-y
                    gdotxx,               # scale-x
                    gdotyy,               # scale-y
                    -gdotxy + gdotyx,     # rotation
                    gdotxy + gdotyx,      # shear
                ]
            )
        if not np.all(np.isfinite(row)):
            raise NumericError("polarization row has non-finite entries")
        if normalize_rows:
            norm = np.linalg.norm(row)
            if norm > 0:
                row = row / norm
        rows.append(row)
    return np.vstack(rows)


@dataclass
class GeneratorSet:
    """k orthonormal algebra directions with their singular values.

    `vectors` has shape (k, D), rows unit norm and mutually orthogonal;
    `singular_values` is ascending (most symmetric direction first).
    `spectrum` keeps the full singular spectrum for reporting.
    """

    vectors: np.ndarray
    singular_values: np.ndarray
    spectrum: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        if v.ndim != 2:
            raise NumericError("generator vectors must be 2-D (k, D)")
        k = v.shape[0]
        norms = np.linalg.norm(v, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-10:
            raise NumericError("generator vectors must be unit norm")
        gram = v @ v.T - np.eye(k)
        if k > 1 and np.max(np.abs(gram)) > 1e-8:
            raise NumericError("generator vectors must be mutually orthogonal")
        if np.any(np.diff(np.asarray(self.singular_values)) < 0):
            raise NumericError("singular values must be ascending")
        self.vectors = v

    @property
    def k(self) -> int:
        return self.vectors.shape[0]

    @property
    def ambient(self) -> int:
        return self.vectors.shape[1]


def extract_generators(e: np.ndarray, k: int = 4) -> GeneratorSet:
    """Smallest-k right-singular directions of the polarization matrix.

    The invariance system E h = 0 is homogeneous, so symmetries live in
    the near-null space: the singular vectors with the *smallest*
    singular values.  The full spectrum is retained so the opposite
    ordering stays inspectable.

    Args:
        e: (rows, D) polarization matrix.
        k: how many directions to keep; k <= min(rows, D).

    Returns:
        GeneratorSet with vectors ordered by ascending singular value.
    """
    e = np.asarray(e, dtype=np.float64)
    if e.ndim != 2:
        raise NumericError(f"polarization matrix must be 2-D, got {e.shape}")
    rows, d = e.shape
    if k < 1:
        raise NumericError(f"k must be >= 1, got {k}")
    if k > d:
        raise NumericError(f"k={k} exceeds basis size D={d}")
    if k > min(rows, d):
        raise NumericError(
            f"k={k} exceeds min(rows={rows}, D={d}); add more samples"
        )
    res = svd(e)
    s = res.singular_values  # descending
    vt = res.vt
    smallest = vt[::-1][:k]  # ascending singular value order
    values = s[::-1][:k]
    return GeneratorSet(
        vectors=smallest, singular_values=values, spectrum=s.copy()
    )


# ---------------------------------------------------------------------------
# Flow rendering
# ---------------------------------------------------------------------------


def _bilinear_sample(plane: np.ndarray, cols: np.ndarray, rows: np.ndarray):
    """Sample `plane` at float pixel coordinates with zero padding."""
    h, w = plane.shape
    c0 = np.floor(cols).astype(np.int64)
    r0 = np.floor(rows).astype(np.int64)
    fc = cols - c0
    fr = rows - r0
    out = np.zeros(plane.shape)
    for dr in (0, 1):
        for dc in (0, 1):
            rr = r0 + dr
            cc = c0 + dc
            weight = (fr if dr else 1.0 - fr) * (fc if dc else 1.0 - fc)
            mask = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
            vals = np.zeros(plane.shape)
            vals[mask] = plane[rr[mask], cc[mask]]
            out += weight * vals
    return out


def generator_flow(img, gen, t: float):
    """Warp an image along an affine generator's one-parameter flow.

    The 3x3 homogeneous generator M (last row zero) is assembled from
    the 6 coefficients; each output pixel samples the source at
    ``exp(-t M) p~`` with bilinear interpolation and zero padding.  When
    the exponential is exactly the identity (t = 0, or a zero
    generator), the input is returned bit-exactly.

    Args:
        img: ImageTensor (each channel is warped with the same map) or a
            single 2-D plane.
        gen: 6-vector of affine basis coefficients (a PixelLinear-sized
            vector is rejected).
        t: flow parameter; positive t transports content along +M.

    Returns:
        Same kind as the input (ImageTensor in, ImageTensor out).
    """
    coeffs = np.asarray(gen, dtype=np.float64).ravel()
    if coeffs.size != 6:
        raise DataError(
            f"flow rendering needs a 6-coefficient affine generator, got "
            f"length {coeffs.size} (pixel-space generators have no image-"
            f"scale flow)"
        )
    wrap = isinstance(img, ImageTensor)
    planes = img.pixels if wrap else _as_plane(img)[np.newaxis]
    m = np.zeros((3, 3))
    m[:2] = np.tensordot(coeffs, _AFFINE_BASIS, axes=(0, 0))
    a = matrix_exp(m, -float(t))
    if np.array_equal(a, np.eye(3)):
        out = planes.copy()
        return ImageTensor(out) if wrap else out[0]

    _, h, w = planes.shape
    px, py = normalized_grid(h, w)
    pxg = np.broadcast_to(px[np.newaxis, :], (h, w))
    pyg = np.broadcast_to(py[:, np.newaxis], (h, w))
    sx = a[0, 0] * pxg + a[0, 1] * pyg + a[0, 2]
    sy = a[1, 0] * pxg + a[1, 1] * pyg + a[1, 2]
    cols = (sx + 1.0) * w / 2.0 - 0.5
    rows = (sy + 1.0) * h / 2.0 - 0.5
    out = np.stack([_bilinear_sample(plane, cols, rows) for plane in planes])
    if wrap:
        return ImageTensor(np.clip(out, 0.0, 1.0))
    return out[0]


# ---------------------------------------------------------------------------
# Generator CSV
# ---------------------------------------------------------------------------


def write_generator_csv(sets: dict, path) -> None:
    """Write per-artist generator sets; columns c_0..c_{D-1}.

    All sets must share one ambient dimension.  Artists are written in
    mapping order, ranks ascending by singular value.
    """
    sets = dict(sets)
    if not sets:
        raise DataError("no generator sets to write")
    dims = {gs.ambient for gs in sets.values()}
    if len(dims) != 1:
        raise DataError(f"mixed ambient dimensions: {sorted(dims)}")
    d = dims.pop()
    header = ["artist", "rank", "singular_value"] + [f"c_{i}" for i in range(d)]
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for artist, gs in sets.items():
            for rank in range(gs.k):
                row = [artist, str(rank), repr(float(gs.singular_values[rank]))]
                row += [repr(float(c)) for c in gs.vectors[rank]]
                writer.writerow(row)


def read_generator_csv(path) -> dict:
    """Load generator sets written by `write_generator_csv`."""
    p = Path(path)
    if not p.is_file():
        raise DataError(f"generator CSV not found: {p}")
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:3] != ["artist", "rank", "singular_value"]:
            raise DataError(f"{p}: bad generator CSV header")
        d = len(header) - 3
        rows_by_artist = {}
        for row in reader:
            if not row:
                continue
            if len(row) != 3 + d:
                raise DataError(f"{p}: row width {len(row)} != {3 + d}")
            artist = row[0]
            rows_by_artist.setdefault(artist, []).append(
                (int(row[1]), float(row[2]), np.array([float(v) for v in row[3:]]))
            )
    out = {}
    for artist, rows in rows_by_artist.items():
        rows.sort(key=lambda r: r[0])
        vectors = np.vstack([r[2] for r in rows])
        values = np.array([r[1] for r in rows])
        out[artist] = GeneratorSet(
            vectors=vectors, singular_values=values, spectrum=values.copy()
        )
    return out
