"""Independent reference implementations used only by the tests."""

import itertools
import math

import numpy as np


def march_rays(origin, aods, budgets, walls, step=1e-3):
    """Ray-march many rays in fixed steps, mirroring any step that crosses a wall.

    ``walls`` is a list of ``((ax, ay), (bx, by))`` reflective segments. A
    crossing is detected by a change of side between the two ends of a step
    while the crossing lies within the segment extent; the overshoot is then
    mirrored back, which preserves the traveled length.
    """
    aods = np.asarray(aods, dtype=float)
    pos = np.tile(np.asarray(origin, dtype=float), (len(aods), 1))
    d = np.column_stack([np.cos(aods), -np.sin(aods)])
    remaining = np.asarray(budgets, dtype=float).copy()
    walls = [(np.asarray(a, float), np.asarray(b, float)) for a, b in walls]
    while np.any(remaining > 0):
        h = np.minimum(step, remaining)[:, None]
        new = pos + h * d
        for a, b in walls:
            t = b - a
            n = np.array([-t[1], t[0]]) / np.hypot(*t)
            s_old = (pos - a) @ n
            s_new = (new - a) @ n
            cross = s_old * s_new < 0
            if not cross.any():
                continue
            frac = s_old / np.where(cross, s_old - s_new, 1.0)
            hitp = pos + frac[:, None] * (new - pos)
            u = ((hitp - a) @ t) / (t @ t)
            cross &= (u >= 0) & (u <= 1)
            new[cross] -= 2 * s_new[cross, None] * n
            d[cross] -= 2 * (d[cross] @ n)[:, None] * n
        pos = new
        remaining = remaining - h[:, 0]
    return pos


def silhouette_bruteforce(points, labels):
    """Mean silhouette with explicit loops; singleton-cluster points score 0."""
    pts = [tuple(p) for p in points]
    labels = list(labels)
    ids = sorted(set(labels))
    total = 0.0
    for i, p in enumerate(pts):
        own = [j for j in range(len(pts)) if labels[j] == labels[i] and j != i]
        if not own:
            continue
        a = sum(math.dist(p, pts[j]) for j in own) / len(own)
        b = math.inf
        for c in ids:
            if c == labels[i]:
                continue
            members = [j for j in range(len(pts)) if labels[j] == c]
            b = min(b, sum(math.dist(p, pts[j]) for j in members) / len(members))
        m = max(a, b)
        total += (b - a) / m if m > 0 else 0.0
    return total / len(pts)


def _partitions(n, k):
    """Restricted-growth labelings of n items into exactly k blocks."""
    for labels in itertools.product(range(k), repeat=n):
        if labels[0] != 0:
            continue
        seen = 0
        ok = True
        for lab in labels:
            if lab > seen:
                ok = False
                break
            if lab == seen:
                seen += 1
        if ok and seen == k:
            yield labels


def _wcss(points, labels, k):
    pts = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    return sum(((pts[labels == c] - pts[labels == c].mean(axis=0)) ** 2).sum() for c in range(k))


def exhaustive_estimate(points, d_th, k_max):
    """Clustering decision by exhaustive search over partitions.

    For each k the minimum within-cluster-sum-of-squares partition stands in
    for k-means; k is chosen by the brute-force mean silhouette (smallest k on
    ties) and the estimate is the centroid of the largest cluster, ties going
    to the cluster that appears first.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n == 1:
        return 1, tuple(pts[0])
    centroid = pts.mean(axis=0)
    if np.max(np.hypot(*(pts - centroid).T)) < d_th:
        return 1, tuple(centroid)
    best = None
    for k in range(2, min(k_max, n) + 1):
        part = min(_partitions(n, k), key=lambda lab: _wcss(pts, lab, k))
        s = silhouette_bruteforce(pts, part)
        if best is None or s > best[0]:
            best = (s, k, part)
    _, k, part = best
    part = np.asarray(part)
    counts = np.bincount(part, minlength=k)
    pick = int(np.flatnonzero(counts == counts.max())[0])
    return k, tuple(pts[part == pick].mean(axis=0))
