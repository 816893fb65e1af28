"""Bootstrap clade confidence by within-artist painting resampling.

Each trial redraws every artist's paintings with replacement (keeping
all artists present), rebuilds generators from the resampled
polarization rows and the texture signature from the resampled Grams,
recomputes the blended distance matrix, and reclusters.  Trained
networks are fixed; only painting-level features are resampled.  A
reference clade's confidence is the fraction of trials whose dendrogram
contains the identical leaf set.

Trial t uses its own rng seeded with seed + t, so results do not depend
on scheduling and a thread pool can evaluate trials concurrently.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError, DataError
from ..liegg import extract_generators
from ..styledist import DistanceMatrix, combine, symmetry_distances, texture_distances
from ..texture import artist_average_gram
from .cluster import Dendrogram, average_linkage, clade_set, clades


@dataclass(frozen=True)
class ArtistFeatures:
    """Painting-level features for one artist, aligned by painting index."""

    label: str
    polarization: np.ndarray  # (n_paintings, D)
    signatures: tuple         # one GramSignature per painting

    def __post_init__(self):
        pol = np.asarray(self.polarization, dtype=np.float64)
        if pol.ndim != 2:
            raise DataError(f"artist {self.label!r}: polarization must be 2-D")
        if pol.shape[0] < 1:
            raise DataError(f"artist {self.label!r} has zero paintings")
        if len(self.signatures) != pol.shape[0]:
            raise DataError(
                f"artist {self.label!r}: {len(self.signatures)} signatures for "
                f"{pol.shape[0]} polarization rows"
            )
        object.__setattr__(self, "polarization", pol)
        object.__setattr__(self, "signatures", tuple(self.signatures))


@dataclass(frozen=True)
class CladeConfidence:
    leaves: tuple
    proportion: float


@dataclass(frozen=True)
class BootstrapReport:
    clades: tuple  # CladeConfidence in reference merge order
    threshold: float
    trials: int
    seed: int

    def supported(self) -> tuple:
        return tuple(c for c in self.clades if c.proportion >= self.threshold)


def features_distance_matrix(
    features,
    lam: float = 0.5,
    generator_count: int = 3,
    resample_rng=None,
) -> DistanceMatrix:
    """Blended artist distance matrix from painting-level features.

    With `resample_rng` set, every artist's paintings are redrawn with
    replacement (same count) before generators and signatures are
    rebuilt; polarization rows and Grams share the same draw.
    """
    features = list(features)
    labels, stacks, averages = [], [], []
    for f in features:
        count = f.polarization.shape[0]
        if resample_rng is None:
            idx = np.arange(count)
        else:
            idx = resample_rng.integers(0, count, size=count)
        labels.append(f.label)
        stacks.append(extract_generators(f.polarization[idx], generator_count).vectors)
        averages.append(artist_average_gram([f.signatures[i] for i in idx]))
    sym = symmetry_distances(labels, stacks)
    tex = texture_distances(labels, averages)
    return combine(sym, tex, lam)


def bootstrap_confidence(
    features,
    trials: int = 1000,
    seed: int = 0,
    lam: float = 0.5,
    generator_count: int = 3,
    threshold: float = 0.95,
    jobs: int = 1,
):
    """Run the resampling trials; returns (reference dendrogram, report)."""
    if trials < 1:
        raise ConfigError(f"bootstrap needs at least one trial, got {trials}")
    features = list(features)
    reference = average_linkage(
        features_distance_matrix(features, lam=lam, generator_count=generator_count)
    )
    ref_clades = clades(reference, include_root=False)

    def run_trial(t: int) -> frozenset:
        rng = np.random.default_rng(seed + t)
        dm = features_distance_matrix(
            features, lam=lam, generator_count=generator_count, resample_rng=rng
        )
        return clade_set(average_linkage(dm))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            observed = list(pool.map(run_trial, range(trials)))
    else:
        observed = [run_trial(t) for t in range(trials)]
    report = BootstrapReport(
        clades=tuple(
            CladeConfidence(
                leaves=c,
                proportion=sum(c in trial for trial in observed) / trials,
            )
            for c in ref_clades
        ),
        threshold=threshold,
        trials=trials,
        seed=seed,
    )
    return reference, report


def write_bootstrap_json(path, report: BootstrapReport) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "clades": [
            {"leaves": list(c.leaves), "proportion": c.proportion}
            for c in report.clades
        ],
        "threshold": report.threshold,
        "b": report.trials,
        "seed": report.seed,
    }
    p.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
