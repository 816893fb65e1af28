"""Mantel permutation test between two labeled distance matrices."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError, DataError, NumericError
from ..styledist import DistanceMatrix


@dataclass(frozen=True)
class MantelResult:
    r: float
    p_value: float
    permutations: int
    seed: int

    def __post_init__(self):
        if not -1.0 - 1e-12 <= self.r <= 1.0 + 1e-12:
            raise NumericError(f"correlation {self.r!r} outside [-1, 1]")
        if not 0.0 < self.p_value <= 1.0:
            raise NumericError(f"p-value {self.p_value!r} outside (0, 1]")


def _pearson(u: np.ndarray, v: np.ndarray) -> float:
    # identical vectors correlate at exactly 1, with no rounding noise
    if np.array_equal(u, v):
        return 1.0
    uc = u - u.mean()
    vc = v - v.mean()
    return float((uc @ vc) / np.sqrt((uc @ uc) * (vc @ vc)))


def mantel(
    d1: DistanceMatrix,
    d2: DistanceMatrix,
    permutations: int = 1000,
    seed: int = 0,
) -> MantelResult:
    """Correlate strict upper triangles; permutation null on the second matrix.

    The null distribution permutes rows and columns of d2 simultaneously
    (relabeling its points), keeping symmetry and the zero diagonal
    intact.  One-sided test: p = (#{r_perm >= r_obs} + 1) / (B + 1).

    Raises:
        DataError: label mismatch or fewer than 3 points.
        NumericError: constant upper triangle (correlation undefined).
        ConfigError: non-positive permutation count.
    """
    if permutations < 1:
        raise ConfigError(f"permutation count must be >= 1, got {permutations}")
    if d1.labels != d2.labels:
        raise DataError("matrices label different points (or different order)")
    n = d1.n
    if n < 3:
        raise DataError(f"mantel needs at least 3 points, got {n}")
    u = d1.offdiag()
    v = d2.offdiag()
    if np.ptp(u) == 0.0 or np.ptp(v) == 0.0:
        raise NumericError("zero-variance upper triangle; correlation undefined")
    r_obs = _pearson(u, v)
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, k=1)
    exceed = 0
    for _ in range(permutations):
        perm = rng.permutation(n)
        v_perm = d2.values[np.ix_(perm, perm)][iu]
        if _pearson(u, v_perm) >= r_obs:
            exceed += 1
    p = (exceed + 1) / (permutations + 1)
    return MantelResult(r=r_obs, p_value=p, permutations=permutations, seed=seed)


def write_mantel_json(path, result: MantelResult, ground_truth_kind: str) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "r": result.r,
        "p": result.p_value,
        "permutations": result.permutations,
        "seed": result.seed,
        "ground_truth_kind": ground_truth_kind,
    }
    p.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
