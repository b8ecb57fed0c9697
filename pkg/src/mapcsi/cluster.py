"""Clustering and classification of candidate user locations.

The estimator looks at the whole candidate set once: a single point or a
tight set (every point within ``d_th`` of the centroid) is its own estimate;
otherwise the cluster count is picked by maximising the mean silhouette over
``k = 2..k_max`` and the estimate is the centroid of the most populated
k-means cluster.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .envmap import Point2

DEFAULT_D_TH = 2.0
DEFAULT_K_MAX = 3
KMEANS_RESTARTS = 10
KMEANS_MAX_ITER = 100
KMEANS_TOL = 1e-9


@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    cost: float
    cost_history: list[float] = field(default_factory=list, repr=False)


def _canonical(labels: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Renumber clusters by first appearance in point order."""
    _, first = np.unique(labels, return_index=True)
    old = labels[np.sort(first)]
    remap = np.empty(len(centroids), dtype=int)
    remap[old] = np.arange(len(old))
    return remap[labels], centroids[old]


def _lloyd(x: np.ndarray, centers: np.ndarray) -> KMeansResult:
    k = len(centers)
    rows = np.arange(len(x))
    history = []
    for _ in range(KMEANS_MAX_ITER):
        d2 = cdist(x, centers, "sqeuclidean")
        labels = np.argmin(d2, axis=1)
        for j in range(k):
            if not np.any(labels == j):
                # hand an empty cluster the worst-served point of a cluster that can spare one
                spare = np.bincount(labels, minlength=k)[labels] > 1
                far = int(np.argmax(np.where(spare, d2[rows, labels], -1.0)))
                labels[far] = j
        new = np.array([x[labels == j].mean(axis=0) for j in range(k)])
        shift = float(np.max(np.hypot(*(new - centers).T)))
        centers = new
        history.append(float(((x - centers[labels]) ** 2).sum()))
        if shift < KMEANS_TOL:
            break
    return _hartigan(x, labels, history)


def _hartigan(x: np.ndarray, labels: np.ndarray, history: list[float]) -> KMeansResult:
    """Single-point transfers that strictly lower the cost; escapes some Lloyd fixed points."""
    k = int(labels.max()) + 1
    labels = labels.copy()
    sizes = np.bincount(labels, minlength=k).astype(float)
    centers = np.array([x[labels == j].mean(axis=0) for j in range(k)])
    # moves must beat float noise on the data scale, else coincident points can cycle
    tol = 1e-12 * max(1.0, float(((x - x.mean(axis=0)) ** 2).sum()))
    changed = False
    for _ in range(KMEANS_MAX_ITER):
        moved = False
        for i in range(len(x)):
            a = labels[i]
            if sizes[a] == 1:
                continue
            d2 = ((centers - x[i]) ** 2).sum(axis=1)
            gain = sizes / (sizes + 1) * d2
            gain[a] = sizes[a] / (sizes[a] - 1) * d2[a]
            b = int(np.argmin(gain))
            if gain[a] - gain[b] <= tol:
                continue
            labels[i] = b
            sizes[a] -= 1
            sizes[b] += 1
            centers[a] = x[labels == a].mean(axis=0)
            centers[b] = x[labels == b].mean(axis=0)
            moved = changed = True
        if not moved:
            break
    if changed:
        history = history + [float(((x - centers[labels]) ** 2).sum())]
    return KMeansResult(labels, centers, history[-1], history)


def kmeans(points, k: int, seed: int = 0) -> KMeansResult:
    """Lloyd's k-means with farthest-point seeding and ``KMEANS_RESTARTS`` restarts.

    Each restart draws a random first center from ``seed`` and adds the rest
    greedily by maximum distance to the chosen centers. Lloyd's fixed point is
    then polished by single-point transfers. The lowest-cost run
    wins; its clusters are numbered by first appearance in ``points``.
    """
    x = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(x)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must lie in [1, {n}]")
    rng = np.random.default_rng(seed)
    best: KMeansResult | None = None
    for _ in range(KMEANS_RESTARTS):
        chosen = [int(rng.integers(n))]
        dmin = np.hypot(*(x - x[chosen[0]]).T)
        while len(chosen) < k:
            nxt = int(np.argmax(dmin))
            chosen.append(nxt)
            dmin = np.minimum(dmin, np.hypot(*(x - x[nxt]).T))
        res = _lloyd(x, x[chosen].copy())
        if best is None or res.cost < best.cost:
            best = res
    labels, centroids = _canonical(best.labels, best.centroids)
    return KMeansResult(labels, centroids, best.cost, best.cost_history)


def silhouette_samples(points, labels) -> np.ndarray:
    """Per-point silhouette ``(b - a) / max(a, b)``; points in singleton clusters score 0."""
    x = np.asarray(points, dtype=float).reshape(-1, 2)
    labels = np.asarray(labels)
    ids = np.unique(labels)
    if len(ids) < 2:
        raise ValueError("silhouette needs at least two clusters")
    dist = cdist(x, x)
    s = np.zeros(len(x))
    for i in range(len(x)):
        own = labels == labels[i]
        n_own = own.sum()
        if n_own == 1:
            continue
        a = dist[i, own].sum() / (n_own - 1)
        b = min(dist[i, labels == c].mean() for c in ids if c != labels[i])
        m = max(a, b)
        s[i] = (b - a) / m if m > 0 else 0.0
    return s


def silhouette_mean(points, labels, k: int) -> float:
    labels = np.asarray(labels)
    counts = np.bincount(labels, minlength=k)
    if len(counts) != k or np.any(counts == 0):
        raise ValueError(f"every one of the {k} clusters must be non-empty")
    return float(silhouette_samples(points, labels).mean())


def select_k(points, k_max: int = DEFAULT_K_MAX, seed: int = 0):
    """Cluster count in ``2..k_max`` with the largest mean silhouette.

    Returns ``(k_e, labels, scores)`` where ``scores`` maps each evaluated k
    to its mean silhouette. Ties go to the smaller k. Values of k exceeding
    the number of distinct points are skipped.
    """
    x = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(x) < 2:
        raise ValueError("need at least two points")
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    n_distinct = len(np.unique(x, axis=0))
    scores: dict[int, float] = {}
    best_k, best_labels = None, None
    for k in range(2, min(k_max, len(x), n_distinct) + 1):
        km = kmeans(x, k, seed)
        scores[k] = silhouette_mean(x, km.labels, k)
        if best_k is None or scores[k] > scores[best_k]:
            best_k, best_labels = k, km.labels
    if best_k is None:
        return 1, np.zeros(len(x), dtype=int), scores
    return best_k, best_labels, scores


@dataclass
class ClusterResult:
    k_e: int
    labels: np.ndarray
    estimate: Point2
    mean_silhouette: dict[int, float] = field(default_factory=dict)


def estimate_location(points, d_th: float = DEFAULT_D_TH, k_max: int = DEFAULT_K_MAX,
                      seed: int = 0, weights=None) -> ClusterResult:
    """Pick the user location from a candidate set.

    ``weights`` (e.g. ray strengths) only break ties between equally
    populated clusters; without them the lowest cluster id wins.
    """
    x = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(x)
    if n == 0:
        raise ValueError("empty candidate set")
    if n == 1:
        return ClusterResult(1, np.zeros(1, dtype=int), Point2(float(x[0, 0]), float(x[0, 1])))

    centroid = x.mean(axis=0)
    spread = np.hypot(*(x - centroid).T)
    if spread.max() < d_th:
        return ClusterResult(1, np.zeros(n, dtype=int), Point2(float(centroid[0]), float(centroid[1])))

    k_e, _, scores = select_k(x, k_max, seed)
    if k_e == 1:
        return ClusterResult(1, np.zeros(n, dtype=int), Point2(float(centroid[0]), float(centroid[1])), scores)
    km = kmeans(x, k_e, seed)
    counts = np.bincount(km.labels, minlength=k_e)
    tied = np.flatnonzero(counts == counts.max())
    pick = int(tied[0])
    if weights is not None and len(tied) > 1:
        w = np.asarray(weights, dtype=float)
        totals = np.array([w[km.labels == c].sum() for c in tied])
        pick = int(tied[np.argmax(totals)])
    c = x[km.labels == pick].mean(axis=0)
    return ClusterResult(k_e, km.labels, Point2(float(c[0]), float(c[1])), scores)
