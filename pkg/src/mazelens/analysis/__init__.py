from .actions import (
    ACTIONS,
    DEFAULT_ACTION_TABLE,
    ActionTable,
    action_distribution,
    action_distribution_map,
)
from .cluster import ClusteringCancelled, agglomerative, kmeans, kmeans_fit, zscore
from .pixels import (
    Classification,
    ClassInfo,
    PixelDataset,
    canonical_json_bytes,
    classification_from_labels,
    flatten_activations,
    from_document,
    reassign_points,
    to_document,
)
from .projection import (
    PcaResult,
    ProjectionState,
    grand_tour_step,
    jacobi_eigh,
    pca,
    project,
    tour_velocities,
)
from .saliency import SaliencyMap, parse_target, saliency_for

__all__ = [
    "ACTIONS",
    "ActionTable",
    "Classification",
    "ClassInfo",
    "ClusteringCancelled",
    "DEFAULT_ACTION_TABLE",
    "PcaResult",
    "PixelDataset",
    "ProjectionState",
    "SaliencyMap",
    "action_distribution",
    "action_distribution_map",
    "agglomerative",
    "canonical_json_bytes",
    "classification_from_labels",
    "flatten_activations",
    "from_document",
    "grand_tour_step",
    "jacobi_eigh",
    "kmeans",
    "kmeans_fit",
    "parse_target",
    "pca",
    "project",
    "reassign_points",
    "saliency_for",
    "to_document",
    "zscore",
]
