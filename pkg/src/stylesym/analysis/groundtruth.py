"""Movement-based ground-truth similarity and distance matrices.

Three nested rule sets over artist movements:

* ``basic``    — same movement scores 1, everything else 0;
* ``standard`` — adds 0.5 for the historically adjacent pairs
  Renaissance/Northern Renaissance and Impressionism/Post-Impressionism;
* ``detailed`` — further adds 0.25 for Baroque/Renaissance,
  Abstract Art/Expressionism and Pop Art/Abstract Art.

Same-movement pairs score 1 under every kind, which keeps the three
matrices element-wise non-decreasing from basic to detailed.  Distances
are 1 - similarity.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..styledist import DistanceMatrix

GROUND_TRUTH_KINDS = ("basic", "standard", "detailed")

_HALF_PAIRS = (
    frozenset({"Renaissance", "Northern Renaissance"}),
    frozenset({"Impressionism", "Post-Impressionism"}),
)
_QUARTER_PAIRS = (
    frozenset({"Baroque", "Renaissance"}),
    frozenset({"Abstract Art", "Expressionism"}),
    frozenset({"Pop Art", "Abstract Art"}),
)


def _pair_similarity(kind: str, move_a: str, move_b: str) -> float:
    if move_a == move_b:
        return 1.0
    pair = frozenset({move_a, move_b})
    if kind in ("standard", "detailed") and pair in _HALF_PAIRS:
        return 0.5
    if kind == "detailed" and pair in _QUARTER_PAIRS:
        return 0.25
    return 0.0


def ground_truth_similarity(kind: str, labels, table) -> np.ndarray:
    """Similarity matrix S over `labels` (diagonal 1, symmetric)."""
    kind = str(kind).lower()
    if kind not in GROUND_TRUTH_KINDS:
        raise ConfigError(
            f"unknown ground-truth kind {kind!r}; choose from {GROUND_TRUTH_KINDS}"
        )
    labels = tuple(labels)
    movements = [table.movement_of(label) for label in labels]
    n = len(labels)
    s = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            s[i, j] = s[j, i] = _pair_similarity(kind, movements[i], movements[j])
    return s


def ground_truth_distance(kind: str, labels, table) -> DistanceMatrix:
    """D = 1 - S as a validated DistanceMatrix."""
    s = ground_truth_similarity(kind, labels, table)
    return DistanceMatrix(labels=tuple(labels), values=1.0 - s)
