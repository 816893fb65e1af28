"""Clustering, purity, bootstrap confidence, ground truth, Mantel test."""

from .bootstrap import (
    ArtistFeatures,
    BootstrapReport,
    CladeConfidence,
    bootstrap_confidence,
    features_distance_matrix,
    write_bootstrap_json,
)
from .cluster import (
    Dendrogram,
    average_linkage,
    clade_set,
    clades,
    export_newick,
    parse_newick,
    render_svg,
    write_newick,
    write_svg,
)
from .groundtruth import (
    GROUND_TRUTH_KINDS,
    ground_truth_distance,
    ground_truth_similarity,
)
from .mantel import MantelResult, mantel, write_mantel_json
from .purity import nn_purity

__all__ = [
    "ArtistFeatures",
    "BootstrapReport",
    "CladeConfidence",
    "Dendrogram",
    "GROUND_TRUTH_KINDS",
    "MantelResult",
    "average_linkage",
    "bootstrap_confidence",
    "clade_set",
    "clades",
    "export_newick",
    "features_distance_matrix",
    "ground_truth_distance",
    "ground_truth_similarity",
    "mantel",
    "nn_purity",
    "parse_newick",
    "render_svg",
    "write_bootstrap_json",
    "write_mantel_json",
    "write_newick",
    "write_svg",
]
