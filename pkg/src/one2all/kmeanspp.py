"""Weighted kmeans++ (D²) seeding that keeps the whole centroid trace.

Every downstream stage consumes the same trace: the prefix costs v_i pick
the sweet spot, the final assignment feeds the sampling probabilities, and
the first k centroids seed the base clusterer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .core import MetricSpace, as_points, pairwise


@dataclass
class KmeansPPTrace:
    """Centroids m_1..m_ell with v_i = cost of the first i of them."""

    space: MetricSpace = field(repr=False)
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    centroid_indices: np.ndarray
    centroids: np.ndarray = field(repr=False)
    prefix_costs: np.ndarray
    owner: np.ndarray = field(repr=False)  # final-prefix assignment
    dist: np.ndarray = field(repr=False)
    seed: int
    truncated: bool = False

    @property
    def ell(self) -> int:
        return int(self.centroid_indices.shape[0])

    def prefix(self, i: int) -> np.ndarray:
        """Centroids of the length-i prefix, 1 <= i <= ell."""
        if not 1 <= i <= self.ell:
            raise IndexError(f"prefix length {i} outside 1..{self.ell}")
        return self.centroids[:i]


def _draw_index(rng: np.random.Generator, mass: np.ndarray) -> int:
    """One categorical draw proportional to mass (one uniform, prefix sums)."""
    cum = np.cumsum(mass)
    r = rng.random() * cum[-1]
    idx = int(np.searchsorted(cum, r, side="right"))
    idx = min(idx, mass.shape[0] - 1)
    while mass[idx] == 0.0:  # fp edge: never land on a zero-mass point
        idx -= 1
    return idx


def run_trace(space: MetricSpace, X, w, ell: int, seed: int) -> KmeansPPTrace:
    """D² seeding: m_1 ~ w_x, then m_i ~ w_x * d(x, prefix).

    Maintains per-point distance to the prefix incrementally (one distance
    column per iteration). If residual mass hits zero before ell centroids
    (all points coincide with centroids) the trace truncates and says so.
    """
    X = as_points(X)
    n = X.shape[0]
    w = np.ones(n) if w is None else np.asarray(w, dtype=np.float64)
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if ell > n:
        raise ValueError(f"ell={ell} exceeds n={n}")
    rng = np.random.default_rng(seed)

    chosen: list[int] = [_draw_index(rng, w)]
    dist = pairwise(space, X, X[chosen[-1] : chosen[-1] + 1])[:, 0]
    owner = np.zeros(n, dtype=np.intp)
    costs = [float(np.sum(w * dist))]
    truncated = False
    for i in range(1, ell):
        mass = w * dist
        if not np.any(mass > 0.0):
            truncated = True
            break
        s = _draw_index(rng, mass)
        chosen.append(s)
        dnew = pairwise(space, X, X[s : s + 1])[:, 0]
        better = dnew < dist
        dist[better] = dnew[better]
        owner[better] = i
        costs.append(float(np.sum(w * dist)))

    idx = np.asarray(chosen, dtype=np.intp)
    return KmeansPPTrace(
        space=space,
        points=X,
        weights=w,
        centroid_indices=idx,
        centroids=X[idx],
        prefix_costs=np.asarray(costs),
        owner=owner,
        dist=dist,
        seed=seed,
        truncated=truncated,
    )


def replay(trace: KmeansPPTrace) -> Iterator[tuple[int, np.ndarray, np.ndarray, float]]:
    """Yield (i, owner, dist, v_i) for every prefix i = 1..ell.

    Recomputes each centroid's distance column once, so a full replay costs
    the same O(ell * n) as building the trace. The yielded arrays are reused
    between iterations; copy them if they must outlive the loop step.
    """
    X = trace.points
    n = X.shape[0]
    dist = np.full(n, np.inf)
    owner = np.zeros(n, dtype=np.intp)
    for i, s in enumerate(trace.centroid_indices):
        dnew = pairwise(trace.space, X, X[s : s + 1])[:, 0]
        better = dnew < dist
        dist[better] = dnew[better]
        owner[better] = i
        yield i + 1, owner, dist, float(trace.prefix_costs[i])
