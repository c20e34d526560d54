"""Default base clusterer: best-of-restarts kmeans++ plus weighted Lloyd.

Works only in squared Euclidean space, where the weighted mean minimizes
each cell's cost. Other spaces must plug in their own base clusterer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CentroidSet, MetricSpace, as_points, nearest
from .errors import UnsupportedSpaceError
from .kmeanspp import run_trace


@dataclass
class BaseClustererConfig:
    k: int
    restarts: int = 5
    lloyd_iters: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.lloyd_iters < 0:
            raise ValueError("lloyd_iters must be >= 0")


def _require_sq_euclidean(space: MetricSpace):
    if space.kind != "euclidean" or space.power != 2.0:
        raise UnsupportedSpaceError(
            "centroid averaging needs squared Euclidean distance"
        )


def lloyd_step(space: MetricSpace, X, w, Q) -> np.ndarray:
    """One Lloyd iteration: each centroid moves to its cell's weighted mean.

    A centroid whose cell is empty is re-seeded at the point currently
    farthest from its owner (successive farthest points when several cells
    are empty), so the centroid count never shrinks.
    """
    _require_sq_euclidean(space)
    X = as_points(X)
    Q = as_points(Q)
    w = np.ones(X.shape[0]) if w is None else np.asarray(w, dtype=np.float64)
    k = Q.shape[0]
    owner, dist = nearest(space, X, Q)
    wsum = np.bincount(owner, weights=w, minlength=k)
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, owner, X * w[:, None])
    new = np.empty_like(sums)
    nonempty = wsum > 0
    new[nonempty] = sums[nonempty] / wsum[nonempty, None]
    empty = np.flatnonzero(~nonempty)
    if empty.size:
        farthest = np.argsort(-dist)[: empty.size]
        new[empty] = X[farthest]
    return new


def base_cluster(space: MetricSpace, X, w, cfg: BaseClustererConfig) -> CentroidSet:
    """Best of cfg.restarts kmeans++ inits, refined by cfg.lloyd_iters steps."""
    _require_sq_euclidean(space)
    X = as_points(X)
    w = np.ones(X.shape[0]) if w is None else np.asarray(w, dtype=np.float64)
    k = min(cfg.k, X.shape[0])
    seeds = np.random.SeedSequence(cfg.seed).generate_state(cfg.restarts)
    best = None
    best_cost = np.inf
    for s in seeds:
        trace = run_trace(space, X, w, k, int(s))
        v = float(trace.prefix_costs[-1])
        if v < best_cost:
            best, best_cost = trace.centroids, v
    Q = np.asarray(best, dtype=np.float64)
    for _ in range(cfg.lloyd_iters):
        Q2 = lloyd_step(space, X, w, Q)
        if np.array_equal(Q2, Q):
            break
        Q = Q2
    return CentroidSet(Q)


def make_base(cfg: BaseClustererConfig):
    """Adapt a config to the wrapper's base-clusterer interface."""

    def base(space: MetricSpace, X, w) -> CentroidSet:
        return base_cluster(space, X, w, cfg)

    return base
