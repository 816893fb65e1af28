"""Style distances: Grassmann metric on generator subspaces + Gram texture.

An artist's symmetry fingerprint is the subspace spanned by their
generator rows; pairs of fingerprints are compared with the Grassmann
geodesic distance sqrt(sum theta_i^2) over principal angles.  Texture
uses gram_distance from the texture module.  Both pairwise matrices are
rescaled so their largest off-diagonal entry is 1, then blended with a
single weight lam in [0, 1].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, NumericError
from .numerics import orthonormal_basis, principal_angles
from .texture import gram_distance


@dataclass(frozen=True)
class DistanceMatrix:
    """Labeled symmetric distance matrix with a zero diagonal."""

    labels: tuple
    values: np.ndarray

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        object.__setattr__(self, "labels", labels)
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DataError(f"distance matrix must be square, got {v.shape}")
        if len(labels) != v.shape[0]:
            raise DataError(
                f"{len(labels)} labels for a {v.shape[0]}x{v.shape[1]} matrix"
            )
        if len(set(labels)) != len(labels):
            raise DataError("distance matrix labels are not unique")
        if not np.all(np.isfinite(v)):
            raise DataError("distance matrix has non-finite entries")
        if v.min() < -1e-12:
            raise DataError(f"negative distance {v.min()!r}")
        if np.max(np.abs(v - v.T)) > 1e-9:
            raise DataError("distance matrix is not symmetric")
        if np.max(np.abs(np.diag(v))) > 1e-9:
            raise DataError("distance matrix diagonal is not zero")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return len(self.labels)

    def offdiag(self) -> np.ndarray:
        """Upper-triangle entries as a flat vector (row-major order)."""
        iu = np.triu_indices(self.n, k=1)
        return self.values[iu]


def grassmann_distance(gen_a: np.ndarray, gen_b: np.ndarray) -> float:
    """Geodesic distance between the row spans of two generator stacks.

    Args:
        gen_a, gen_b: (k, D) arrays; rows span each subspace.

    Returns:
        sqrt(sum of squared principal angles).  Exactly zero for
        identical inputs, and exchanging the arguments cannot change
        the result (operands are ordered canonically first).
    """
    a = np.asarray(gen_a, dtype=np.float64)
    b = np.asarray(gen_b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise DataError("generator stacks must be 2-D (k, D) arrays")
    if a.shape[1] != b.shape[1]:
        raise DataError(f"ambient dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    if np.array_equal(a, b):
        return 0.0
    if a.tobytes() > b.tobytes():  # fixed operand order => exact symmetry
        a, b = b, a
    qa = orthonormal_basis(a.T)
    qb = orthonormal_basis(b.T)
    theta = principal_angles(qa, qb)
    return float(np.sqrt(np.sum(theta * theta)))


def pairwise_distances(labels, items, metric) -> DistanceMatrix:
    """Apply `metric` to every unordered pair; mirror into a full matrix."""
    labels = tuple(labels)
    items = list(items)
    if len(labels) != len(items):
        raise DataError(f"{len(labels)} labels for {len(items)} items")
    n = len(items)
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = float(metric(items[i], items[j]))
            values[i, j] = values[j, i] = d
    return DistanceMatrix(labels=labels, values=values)


def symmetry_distances(labels, generator_stacks) -> DistanceMatrix:
    return pairwise_distances(labels, generator_stacks, grassmann_distance)


def texture_distances(labels, signatures) -> DistanceMatrix:
    return pairwise_distances(labels, signatures, gram_distance)


def normalize_offdiag(dm: DistanceMatrix) -> DistanceMatrix:
    """Rescale so the largest off-diagonal entry is exactly 1."""
    if dm.n < 2:
        raise DataError("need at least two labels to normalize")
    peak = float(dm.offdiag().max())
    if peak <= 0.0:
        raise NumericError("all off-diagonal distances are zero; cannot normalize")
    return DistanceMatrix(labels=dm.labels, values=dm.values / peak)


def combine(sym: DistanceMatrix, tex: DistanceMatrix, lam: float) -> DistanceMatrix:
    """Blend normalized symmetry and texture distances: lam*sym + (1-lam)*tex.

    Both inputs are normalized first.  lam=1 returns the normalized
    symmetry matrix unchanged, lam=0 the normalized texture matrix.
    """
    lam = float(lam)
    if not (0.0 <= lam <= 1.0):
        raise ConfigError(f"blend weight must lie in [0, 1], got {lam!r}")
    if sym.labels != tex.labels:
        raise DataError("symmetry and texture matrices label different artists")
    sym_n = normalize_offdiag(sym)
    tex_n = normalize_offdiag(tex)
    if lam == 0.0:
        return tex_n
    if lam == 1.0:
        return sym_n
    values = lam * sym_n.values + (1.0 - lam) * tex_n.values
    return DistanceMatrix(labels=sym.labels, values=values)


# ---------------------------------------------------------------------------
# CSV round-trip
# ---------------------------------------------------------------------------


def write_distance_csv(path, dm: DistanceMatrix) -> None:
    """Square CSV with `label` corner cell; floats written via repr."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", *dm.labels])
        for label, row in zip(dm.labels, dm.values):
            writer.writerow([label, *[repr(float(x)) for x in row]])


def read_distance_csv(path) -> DistanceMatrix:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"distance file not found: {p}")
    with open(p, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:1] != ["label"]:
        raise DataError(f"{p}: expected header starting with 'label'")
    labels = tuple(rows[0][1:])
    n = len(labels)
    if len(rows) != n + 1:
        raise DataError(f"{p}: expected {n} data rows, found {len(rows) - 1}")
    values = np.zeros((n, n))
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != n + 1:
            raise DataError(f"{p}: line {i + 1}: expected {n + 1} cells")
        if row[0] != labels[i - 1]:
            raise DataError(
                f"{p}: line {i + 1}: row label {row[0]!r} does not match "
                f"column label {labels[i - 1]!r}"
            )
        try:
            values[i - 1] = [float(x) for x in row[1:]]
        except ValueError as exc:
            raise DataError(f"{p}: line {i + 1}: {exc}") from None
    return DistanceMatrix(labels=labels, values=values)
