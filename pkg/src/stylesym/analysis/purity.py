"""Nearest-neighbor movement purity of a distance matrix."""

from __future__ import annotations

import numpy as np

from ..styledist import DistanceMatrix


def nn_purity(d: DistanceMatrix, table) -> float:
    """Fraction of artists whose nearest neighbor shares their movement.

    The neighbor is the off-diagonal minimum of the artist's row; exact
    ties count as a match if ANY tied neighbor shares the movement.

    Args:
        d: artist-level distance matrix.
        table: artist -> movement lookup; unknown labels raise DataError.
    """
    movements = [table.movement_of(label) for label in d.labels]
    hits = 0
    for i in range(d.n):
        row = d.values[i].copy()
        row[i] = np.inf
        nearest = row.min()
        tied = np.flatnonzero(row == nearest)
        if any(movements[j] == movements[i] for j in tied):
            hits += 1
    return hits / d.n
