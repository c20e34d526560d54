"""one2all base probabilities, cluster weighted medians, sweet-spot search.

A single centroid set M yields per-point probabilities pi that dominate the
pps base probabilities of every query Q whose cost is at least V(M), at
total mass (sample-size overhead) |pi|_1 <= 8 rho^2 |M| + 2 rho. Scanning
kmeans++ prefixes M_i for the cheapest candidate picks the "sweet spot".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import CentroidSet, MetricSpace, as_points, cost, nearest
from .kmeanspp import KmeansPPTrace, replay
from .sampling import pps_base


def weighted_median(values, weights) -> float:
    """Smallest input value v with sum_{x<=v} w >= W/2 and sum_{x>=v} w >= W/2."""
    values = np.asarray(values, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if values.size == 0:
        raise ValueError("weighted_median of empty input")
    if values.shape != weights.shape:
        raise ValueError("values and weights must have equal length")
    if np.any(weights <= 0):
        raise ValueError("weights must be positive")
    uniq, inv = np.unique(values, return_inverse=True)
    mass = np.bincount(inv, weights=weights)
    below = np.cumsum(mass)           # sum over values <= uniq[i]
    above = below[-1] - below + mass  # sum over values >= uniq[i]
    half = below[-1] / 2.0
    i = int(np.searchsorted(below, half, side="left"))
    if above[i] < half:  # cannot happen for a valid weighted median
        raise AssertionError("no value satisfies both median inequalities")
    return float(uniq[i])


@dataclass
class One2AllProbabilities:
    """pi per point, plus the per-cluster quantities used to build it."""

    pi: np.ndarray
    M: np.ndarray = field(repr=False)  # centroids kept after empty-cell drop
    cost_m: float = 0.0
    cluster_weights: np.ndarray | None = None
    medians: np.ndarray | None = None
    rho: float = 1.0
    dropped_empty_cells: int = 0
    owner: np.ndarray | None = field(default=None, repr=False)
    dist: np.ndarray | None = field(default=None, repr=False)

    @property
    def overhead(self) -> float:
        return float(np.sum(self.pi))


def _cell_medians(owner: np.ndarray, dist: np.ndarray, w: np.ndarray, k: int) -> np.ndarray:
    med = np.empty(k)
    order = np.argsort(owner, kind="stable")
    bounds = np.searchsorted(owner[order], np.arange(k + 1))
    for j in range(k):
        cell = order[bounds[j] : bounds[j + 1]]
        med[j] = weighted_median(dist[cell], w[cell])
    return med


def probs_from_assignment(
    w: np.ndarray,
    owner: np.ndarray,
    dist: np.ndarray,
    rho: float,
    k: int,
    M: np.ndarray,
    with_medians: bool = True,
) -> One2AllProbabilities:
    """Build pi from a precomputed nearest-centroid assignment.

    Centroids owning no points are dropped first (they change neither the
    assignment nor the cost); the count is kept as a diagnostic.
    """
    counts = np.bincount(owner, minlength=k)
    keep = counts > 0
    dropped = int(k - keep.sum())
    if dropped:
        remap = np.cumsum(keep) - 1
        owner = remap[owner]
        M = M[keep]
        k -= dropped
    cost_m = float(np.sum(w * dist))
    cluster_w = np.bincount(owner, weights=w, minlength=k)
    if cost_m > 0.0:
        term1 = (2.0 * rho / cost_m) * w * dist
    else:
        term1 = 0.0  # V(M)=0: only the within-cluster term remains
    term2 = 8.0 * rho**2 * w / cluster_w[owner]
    pi = np.minimum(1.0, np.maximum(term1, term2))
    medians = _cell_medians(owner, dist, w, k) if with_medians else None
    return One2AllProbabilities(
        pi=pi,
        M=M,
        cost_m=cost_m,
        cluster_weights=cluster_w,
        medians=medians,
        rho=rho,
        dropped_empty_cells=dropped,
        owner=owner,
        dist=dist,
    )


def one2all_probs(space: MetricSpace, X, w, M, with_medians: bool = True) -> One2AllProbabilities:
    """pi_x = min{1, max{2 rho w_x d_xM / V(M), 8 rho^2 w_x / w(cell of x)}}."""
    X = as_points(X)
    M = CentroidSet(as_points(M)).points
    w = np.ones(X.shape[0]) if w is None else np.asarray(w, dtype=np.float64)
    owner, dist = nearest(space, X, M)
    return probs_from_assignment(
        w, owner, dist, space.rho, M.shape[0], M, with_medians=with_medians
    )


def verify_dominance(space: MetricSpace, X, w, probs: One2AllProbabilities, Q) -> dict:
    """Check pi >= min{1, V(Q)/V(M)} * psi^(Q) pointwise (a theorem, exact).

    A zero-cost Q has no pps distribution and nothing to dominate; V(M)=0
    makes the scaling factor 1.
    """
    X = as_points(X)
    w = np.ones(X.shape[0]) if w is None else np.asarray(w, dtype=np.float64)
    vq = cost(space, X, w, Q)
    if vq <= 0.0:
        return {"holds": True, "worst_ratio": 0.0, "cost_q": 0.0}
    psi = pps_base(space, X, w, Q).psi
    factor = 1.0 if probs.cost_m <= 0.0 else min(1.0, vq / probs.cost_m)
    required = factor * psi
    ratio = required / probs.pi
    return {
        "holds": bool(np.all(required <= probs.pi + 1e-12)),
        "worst_ratio": float(ratio.max()),
        "cost_q": vq,
    }


def sweet_spot(
    trace: KmeansPPTrace,
    mode: str = "exact",
    C: float | None = None,
    eps: float | None = None,
) -> tuple[int, One2AllProbabilities]:
    """Pick the kmeans++ prefix whose candidate sample is smallest.

    exact mode minimizes |min{1, max{1, v_i/C} eps^-2 pi^(M_i)}|_1 over all
    prefixes (pi recomputed per prefix from the replayed assignment); rough
    mode minimizes the proxy score i*v_i without touching pi. Ties go to the
    shortest prefix. Returns the 1-based winning index and its pi.
    """
    w = trace.weights
    if mode == "rough":
        v = trace.prefix_costs
        scores = np.arange(1, trace.ell + 1) * v
        i_star = int(np.argmin(scores)) + 1
    elif mode == "exact":
        if C is None or C <= 0 or eps is None or eps <= 0:
            raise ValueError("exact mode needs C > 0 and eps > 0")
        best = np.inf
        i_star = 1
        for i, owner, dist, v_i in replay(trace):
            cand = probs_from_assignment(
                w, owner, dist, trace.space.rho, i, trace.prefix(i), with_medians=False
            )
            p = np.minimum(1.0, max(1.0, v_i / C) * eps**-2 * cand.pi)
            total = float(np.sum(p))
            if total < best:
                best = total
                i_star = i
    else:
        raise ValueError(f"unknown sweet-spot mode {mode!r}")
    probs = one2all_probs(trace.space, trace.points, w, trace.prefix(i_star))
    return i_star, probs
