"""Point clustering for pixel datasets: seeded k-means and average-link
agglomerative merging.

Both produce Classifications with freshly numbered dense class ids
(classes ordered by their smallest member point). Long runs accept a
``should_stop`` callback and a ``progress`` callback so the service can
run them on a worker, poll progress and cancel without leaving partial
state behind.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import ParameterError
from .pixels import Classification, PixelDataset, classification_from_labels


class ClusteringCancelled(Exception):
    pass


def _maybe_stop(should_stop) -> None:
    if should_stop is not None and should_stop():
        raise ClusteringCancelled()


def _sq_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # (n, k) squared Euclidean via the expanded product; clamp tiny
    # negative round-off so sqrt and argmin stay sane
    d2 = (
        (points * points).sum(axis=1)[:, None]
        - 2.0 * points @ centroids.T
        + (centroids * centroids).sum(axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def zscore(points: np.ndarray) -> np.ndarray:
    """Per-channel standardization. Distances default to raw channel
    space; this is the opt-in alternative. Constant channels pass
    through unscaled."""
    pts = np.asarray(points, dtype=np.float64)
    mean = pts.mean(axis=0)
    std = pts.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return (pts - mean) / std


def kmeans_fit(
    points: np.ndarray,
    k: int,
    seed: int = 0,
    max_iters: int = 100,
    tol: float = 1e-4,
    should_stop: Callable[[], bool] | None = None,
    progress: Callable[[float], None] | None = None,
):
    """Lloyd iterations from a k-means++ start.

    Returns (labels, centroids, inertia_history). Inertia is recorded
    after each assign+update cycle and is non-increasing. Clusters that
    empty out are re-seeded from the point farthest from its centroid
    (deterministic; ties pick the lowest point index).
    """
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    if not 1 <= k <= n:
        raise ParameterError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)

    # k-means++ seeding
    centroids = np.empty((k, pts.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centroids[0] = pts[first]
    closest = _sq_distances(pts, centroids[:1])[:, 0]
    for i in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            # all remaining mass on already-chosen points: spread uniformly
            pick = int(rng.integers(n))
        else:
            pick = int(rng.choice(n, p=closest / total))
        centroids[i] = pts[pick]
        closest = np.minimum(closest, _sq_distances(pts, centroids[i : i + 1])[:, 0])

    labels = np.zeros(n, dtype=np.int64)
    history: list[float] = []
    prev = np.inf
    for it in range(max_iters):
        _maybe_stop(should_stop)
        d2 = _sq_distances(pts, centroids)
        labels = d2.argmin(axis=1)
        point_d2 = d2[np.arange(n), labels]

        # re-seed empty clusters from the farthest point of any
        # multi-member cluster (pigeonhole guarantees one exists), so a
        # re-seed can never empty its source cluster
        while True:
            counts = np.bincount(labels, minlength=k)
            empty = np.flatnonzero(counts == 0)
            if empty.size == 0:
                break
            cid = int(empty[0])
            eligible = counts[labels] >= 2
            far = int(np.where(eligible, point_d2, -1.0).argmax())
            centroids[cid] = pts[far]
            labels[far] = cid
            point_d2[far] = 0.0

        for cid in range(k):
            centroids[cid] = pts[labels == cid].mean(axis=0)

        inertia = float(
            ((pts - centroids[labels]) ** 2).sum()
        )
        history.append(inertia)
        if progress is not None:
            progress((it + 1) / max_iters)
        if prev - inertia < tol:
            break
        prev = inertia
    return labels, centroids, history


def kmeans(
    dataset: PixelDataset,
    k: int,
    seed: int = 0,
    max_iters: int = 100,
    tol: float = 1e-4,
    standardize: bool = False,
    should_stop: Callable[[], bool] | None = None,
    progress: Callable[[float], None] | None = None,
) -> Classification:
    pts = zscore(dataset.points) if standardize else dataset.points
    labels, _, _ = kmeans_fit(pts, k, seed, max_iters, tol, should_stop, progress)
    return classification_from_labels(dataset, labels)


def agglomerative_merges(
    points: np.ndarray,
    should_stop: Callable[[], bool] | None = None,
    progress: Callable[[float], None] | None = None,
) -> list[tuple[int, int, float]]:
    """Full average-linkage merge sequence.

    Returns n-1 merges as (i, j, distance) with i < j, where i and j are
    the smallest original point indices of the two merged clusters; the
    surviving cluster keeps slot i. Equal distances break ties toward the
    smallest (i, j) pair. Merge distances are non-decreasing (average
    linkage is reducible).
    """
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    if n == 0:
        raise ParameterError("cannot cluster an empty dataset")
    if n == 1:
        return []
    d2 = _sq_distances(pts, pts)
    dist = np.sqrt(np.maximum(d2, 0.0))
    np.fill_diagonal(dist, np.inf)
    sizes = np.ones(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)

    # cached per-row nearest neighbor; rebuilt lazily after merges
    nn = dist.argmin(axis=1)
    nn_d = dist[np.arange(n), nn]

    merges: list[tuple[int, int, float]] = []
    for step in range(n - 1):
        _maybe_stop(should_stop)
        masked = np.where(active, nn_d, np.inf)
        i = int(masked.argmin())  # earliest index wins ties
        j = int(nn[i])
        d = float(dist[i, j])
        a, b = (i, j) if i < j else (j, i)
        merges.append((a, b, d))

        # Lance-Williams average-linkage update, survivor in slot a
        w_a, w_b = sizes[a], sizes[b]
        row = (w_a * dist[a] + w_b * dist[b]) / (w_a + w_b)
        dist[a, :] = row
        dist[:, a] = row
        dist[a, a] = np.inf
        dist[b, :] = np.inf
        dist[:, b] = np.inf
        sizes[a] = w_a + w_b
        active[b] = False

        if active.sum() <= 1:
            break
        stale = active & ((nn == a) | (nn == b))
        stale[a] = True
        for r in np.flatnonzero(stale):
            nn[r] = int(dist[r].argmin())
            nn_d[r] = dist[r, nn[r]]
        if progress is not None:
            progress((step + 1) / (n - 1))
    return merges


def _labels_from_merges(n: int, merges: list[tuple[int, int, float]]) -> np.ndarray:
    parent = np.arange(n)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, _ in merges:
        parent[find(b)] = find(a)
    roots = np.array([find(x) for x in range(n)])
    # dense ids ordered by smallest member index
    order: dict[int, int] = {}
    for x in range(n):
        r = int(roots[x])
        if r not in order:
            order[r] = len(order)
    return np.array([order[int(r)] for r in roots], dtype=np.int64)


def agglomerative(
    dataset: PixelDataset,
    linkage: str = "average",
    threshold: float | None = None,
    count: int | None = None,
    standardize: bool = False,
    should_stop: Callable[[], bool] | None = None,
    progress: Callable[[float], None] | None = None,
) -> Classification:
    """Bottom-up merging on Euclidean distances, cut either at a distance
    threshold (merges applied while distance < threshold, so threshold 0
    keeps every point a singleton) or at a target cluster count."""
    if linkage != "average":
        raise ParameterError(f"unsupported linkage {linkage!r}; only 'average'")
    if (threshold is None) == (count is None):
        raise ParameterError("give exactly one of threshold or count")
    if threshold is not None and threshold < 0:
        raise ParameterError(f"threshold must be >= 0, got {threshold}")
    n = dataset.n
    if count is not None and not 1 <= count <= n:
        raise ParameterError(f"count must be in [1, {n}], got {count}")

    pts = zscore(dataset.points) if standardize else dataset.points
    merges = agglomerative_merges(pts, should_stop, progress)
    if count is not None:
        applied = merges[: n - count]
    else:
        applied = [m for m in merges if m[2] < threshold]
    labels = _labels_from_merges(n, applied)
    return classification_from_labels(dataset, labels)
