"""Relaxed metric spaces, weighted point sets, and exact clustering cost.

Distances are either powered Euclidean, d(x, y) = ||x - y||_2^p (a relaxed
metric with rho = 2^(p-1) for p > 1), or read from a precomputed symmetric
matrix. All reductions use numpy's pairwise summation in a fixed order, so
results do not depend on how the work is partitioned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Cap on elements per temporary buffer in the distance kernels (~32 MB float64).
_CHUNK_ELEMS = 1 << 22


@dataclass(frozen=True)
class MetricSpace:
    """A relaxed metric: symmetric, d(x,x)=0, and d(x,y) <= rho*(d(x,z)+d(z,y))."""

    kind: str  # "euclidean" or "matrix"
    power: float = 2.0
    rho: float = 2.0
    matrix: np.ndarray | None = field(default=None, repr=False)

    @staticmethod
    def euclidean(power: float = 2.0) -> "MetricSpace":
        """Powered Euclidean distance ||x-y||^power; power=2 is squared Euclidean."""
        if power <= 0:
            raise ValueError("power must be positive")
        rho = 1.0 if power <= 1.0 else 2.0 ** (power - 1.0)
        return MetricSpace(kind="euclidean", power=float(power), rho=rho)

    @staticmethod
    def from_matrix(
        matrix: np.ndarray,
        rho: float = 1.0,
        check_triples: int = 1000,
        seed: int = 0,
    ) -> "MetricSpace":
        """Distance matrix space; points are row/column indices.

        Symmetry and the rho-relaxed triangle inequality are validated on a
        random sample of triples (exhaustive validation is O(n^3)).
        """
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("distance matrix must be square")
        if rho < 1.0:
            raise ValueError("rho must be >= 1")
        if np.any(m < 0):
            raise ValueError("distances must be nonnegative")
        if np.any(np.abs(np.diag(m)) > 0):
            raise ValueError("distance matrix must have zero diagonal")
        if not np.array_equal(m, m.T):
            raise ValueError("distance matrix must be symmetric")
        n = m.shape[0]
        if n >= 3 and check_triples > 0:
            rng = np.random.default_rng(seed)
            idx = rng.integers(0, n, size=(check_triples, 3))
            dxy = m[idx[:, 0], idx[:, 1]]
            via = m[idx[:, 0], idx[:, 2]] + m[idx[:, 2], idx[:, 1]]
            if np.any(dxy > rho * via * (1.0 + 1e-9)):
                raise ValueError(f"matrix violates the rho={rho} relaxed triangle inequality")
        return MetricSpace(kind="matrix", power=float("nan"), rho=float(rho), matrix=m)


@dataclass
class WeightedPointSet:
    """Points with positive weights. For matrix spaces, points are indices."""

    points: np.ndarray
    weights: np.ndarray

    def __init__(self, points: np.ndarray, weights: np.ndarray | None = None):
        points = np.asarray(points)
        if points.ndim == 1 and points.dtype.kind in "iu":
            pass  # index-based points for matrix spaces
        elif points.ndim == 2:
            points = np.asarray(points, dtype=np.float64)
        else:
            raise ValueError("points must be an (n, d) array, or 1-d integer indices")
        if weights is None:
            weights = np.ones(points.shape[0])
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (points.shape[0],):
            raise ValueError("weights must be one per point")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        if points.shape[0] < 1:
            raise ValueError("need at least one point")
        self.points = points
        self.weights = weights

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass
class CentroidSet:
    """An ordered set of centroids; exact duplicates are dropped on construction."""

    points: np.ndarray

    def __init__(self, points: np.ndarray):
        points = np.asarray(points)
        if points.dtype.kind in "iu" and points.ndim == 1:
            pass  # index-based centroids for matrix spaces
        else:
            points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if points.shape[0] < 1:
            raise ValueError("need at least one centroid")
        self.points = _dedup_rows(points)

    @property
    def k(self) -> int:
        return self.points.shape[0]


@dataclass
class Assignment:
    """Nearest-centroid ownership; ties go to the lowest centroid index."""

    owner: np.ndarray
    dist: np.ndarray


def _dedup_rows(points: np.ndarray) -> np.ndarray:
    if points.ndim == 1:
        _, first = np.unique(points, return_index=True)
    else:
        _, first = np.unique(points, axis=0, return_index=True)
    if first.size == points.shape[0]:
        return points
    return points[np.sort(first)]


def as_points(x) -> np.ndarray:
    """Normalize a CentroidSet / WeightedPointSet / array-like to an array."""
    if isinstance(x, CentroidSet):
        return x.points
    if isinstance(x, WeightedPointSet):
        return x.points
    arr = np.asarray(x)
    if arr.dtype.kind in "iu" and arr.ndim == 1:
        return arr
    return np.atleast_2d(np.asarray(arr, dtype=np.float64))


def distance(space: MetricSpace, x, y) -> float:
    """Distance between two points (or two indices for matrix spaces)."""
    if space.kind == "matrix":
        return float(space.matrix[int(x), int(y)])
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    sq = float(((x - y) ** 2).sum())
    if space.power == 2.0:
        return sq
    return sq ** (space.power / 2.0)


def pairwise(space: MetricSpace, X, Q) -> np.ndarray:
    """Full (n, k) matrix of distances from each point to each centroid."""
    X = as_points(X)
    Q = as_points(Q)
    if space.kind == "matrix":
        return space.matrix[np.ix_(X, Q)]
    if X.shape[1] != Q.shape[1]:
        raise ValueError(f"dimension mismatch: points d={X.shape[1]}, centroids d={Q.shape[1]}")
    n, d = X.shape
    k = Q.shape[0]
    out = np.empty((n, k))
    step = max(1, _CHUNK_ELEMS // max(d, 1))
    for start in range(0, n, step):
        block = X[start : start + step]
        for j in range(k):
            diff = block - Q[j]
            np.square(diff, out=diff)
            out[start : start + step, j] = diff.sum(axis=1)
    if space.power != 2.0:
        out **= space.power / 2.0
    return out


def nearest(space: MetricSpace, X, Q) -> tuple[np.ndarray, np.ndarray]:
    """Per-point (owner index, distance) to the nearest centroid.

    Runs a running minimum over centroids so memory stays O(n) even for
    large k; strict improvement keeps the lowest index on ties.
    """
    X = as_points(X)
    Q = as_points(Q)
    if space.kind == "matrix":
        mat = space.matrix[np.ix_(X, Q)]
        owner = np.argmin(mat, axis=1)
        return owner, mat[np.arange(X.shape[0]), owner]
    if X.shape[1] != Q.shape[1]:
        raise ValueError(f"dimension mismatch: points d={X.shape[1]}, centroids d={Q.shape[1]}")
    n, d = X.shape
    dist = np.full(n, np.inf)
    owner = np.zeros(n, dtype=np.intp)
    step = max(1, _CHUNK_ELEMS // max(d, 1))
    for start in range(0, n, step):
        stop = min(n, start + step)
        block = X[start:stop]
        best = dist[start:stop]
        who = owner[start:stop]
        for j in range(Q.shape[0]):
            diff = block - Q[j]
            np.square(diff, out=diff)
            dj = diff.sum(axis=1)
            better = dj < best
            best[better] = dj[better]
            who[better] = j
    if space.power != 2.0:
        dist **= space.power / 2.0
    return owner, dist


def assign(space: MetricSpace, X, Q) -> Assignment:
    """Assign every point to its nearest centroid (lowest index on ties)."""
    owner, dist = nearest(space, X, Q)
    return Assignment(owner=owner, dist=dist)


def cost(space: MetricSpace, X, weights, Q) -> float:
    """Clustering cost: the weighted sum of point-to-nearest-centroid distances."""
    X = as_points(X)
    _, dist = nearest(space, X, Q)
    if weights is None:
        return float(np.sum(dist))
    weights = np.asarray(weights, dtype=np.float64)
    return float(np.sum(weights * dist))
