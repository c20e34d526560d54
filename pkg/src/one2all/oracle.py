"""Clustering-cost oracle: fixed-threshold build and feedback variant.

The build runs kmeans++, picks the sweet-spot prefix, and freezes a
coordinated sample whose estimates are reliable for every query with cost
at or above the threshold C. The feedback variant starts at C = v_2k and,
whenever a query's estimate falls at or below C, computes the exact cost,
grows the sample in place (same per-point uniforms, so members only get
added), and halves the threshold.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .core import MetricSpace, as_points, cost
from .errors import DataFormatError
from .kmeanspp import run_trace
from .probabilities import One2AllProbabilities, sweet_spot
from .sampling import CoordinatedSample, draw, estimate_cost, point_uniforms

_FORMAT_VERSION = 1


@dataclass
class OracleState:
    space: MetricSpace = field(repr=False)
    points: np.ndarray | None = field(repr=False)  # None after standalone load
    weights: np.ndarray | None = field(repr=False)
    probs: One2AllProbabilities = field(repr=False)
    p: np.ndarray = field(repr=False)  # current inclusion probabilities, full length
    sample: CoordinatedSample = field(repr=False)
    C: float
    eps: float
    k: int
    ell: int
    prefix_index: int
    update_count: int
    seed: int
    sample_seed: int

    @property
    def saturated(self) -> bool:
        return bool(np.all(self.p >= 1.0))

    @property
    def size(self) -> int:
        return self.sample.size


def _finish(space, X, w, trace, C, eps, k, seed, sample_seed) -> OracleState:
    if C > 0.0:
        i_star, probs = sweet_spot(trace, "exact", C=C, eps=eps)
        v_star = float(trace.prefix_costs[i_star - 1])
        p = np.minimum(1.0, max(1.0, v_star / C) * eps**-2 * probs.pi)
    else:
        # all-zero residual cost: every point must be kept, queries are exact
        i_star, probs = sweet_spot(trace, "rough")
        p = np.ones(X.shape[0])
    sample = draw(X, w, p, sample_seed)
    return OracleState(
        space=space,
        points=X,
        weights=w,
        probs=probs,
        p=p,
        sample=sample,
        C=float(C),
        eps=float(eps),
        k=int(k),
        ell=trace.ell,
        prefix_index=i_star,
        update_count=0,
        seed=int(seed),
        sample_seed=int(sample_seed),
    )


def build(space: MetricSpace, X, w, ell: int, C: float, eps: float, seed: int,
          k: int | None = None) -> OracleState:
    """Fixed-threshold oracle: reliable for queries with cost >= C."""
    if C <= 0:
        raise ValueError("C must be positive")
    if eps <= 0:
        raise ValueError("eps must be positive")
    X = as_points(X)
    w = np.ones(X.shape[0]) if w is None else np.asarray(w, dtype=np.float64)
    trace_seed, sample_seed = (
        int(s) for s in np.random.SeedSequence(seed).generate_state(2)
    )
    trace = run_trace(space, X, w, ell, trace_seed)
    return _finish(space, X, w, trace, C, eps, k if k is not None else ell,
                   seed, sample_seed)


def build_feedback(space: MetricSpace, X, w, k: int, eps: float, seed: int) -> OracleState:
    """Feedback oracle initialization: ell = 2k, threshold C = v_2k."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    X = as_points(X)
    w = np.ones(X.shape[0]) if w is None else np.asarray(w, dtype=np.float64)
    ell = min(2 * k, X.shape[0])
    trace_seed, sample_seed = (
        int(s) for s in np.random.SeedSequence(seed).generate_state(2)
    )
    trace = run_trace(space, X, w, ell, trace_seed)
    C = float(trace.prefix_costs[-1])
    return _finish(space, X, w, trace, C, eps, k, seed, sample_seed)


def query(state: OracleState, Q) -> float:
    """Inverse-probability cost estimate from the frozen sample."""
    return estimate_cost(state.space, state.sample, Q)


def feedback_query(state: OracleState, Q) -> tuple[float, bool]:
    """Estimate; on estimate <= C answer exactly and grow the sample.

    The growth factor is max{2, 2C/V} (the sample at least doubles even when
    a noisy estimate triggered the update), probabilities are capped at 1,
    and the threshold becomes min{C, V}/2 so it always at least halves. A
    saturated state answers exactly and never updates.
    """
    est = estimate_cost(state.space, state.sample, Q)
    if est > state.C:
        return est, False
    if state.saturated:
        return est, False  # sample is the full data; the estimate is exact
    if state.points is None:
        raise ValueError("feedback needs the dataset; load with points and weights")
    V = cost(state.space, state.points, state.weights, Q)
    if V > 0.0:
        factor = max(2.0, 2.0 * state.C / V)
        p_new = np.minimum(1.0, factor * state.p)
    else:
        p_new = np.ones_like(state.p)
    state.p = p_new
    state.sample = state.sample.with_probabilities(p_new)
    state.C = min(state.C, V) / 2.0
    state.update_count += 1
    return V, True


def save(state: OracleState, path: str) -> None:
    """Serialize to an npz file, atomically (write-new-then-rename)."""
    probs = state.probs
    payload = {
        "version": np.int64(_FORMAT_VERSION),
        "kind": np.array(state.space.kind),
        "power": np.float64(state.space.power),
        "rho": np.float64(state.space.rho),
        "n": np.int64(state.p.shape[0]),
        "k": np.int64(state.k),
        "ell": np.int64(state.ell),
        "eps": np.float64(state.eps),
        "C": np.float64(state.C),
        "seed": np.int64(state.seed),
        "sample_seed": np.int64(state.sample_seed),
        "prefix_index": np.int64(state.prefix_index),
        "update_count": np.int64(state.update_count),
        "pi": probs.pi,
        "p": state.p,
        "members": state.sample.members,
        "member_points": state.sample.member_points(),
        "member_weights": state.sample.weights[state.sample.members],
        "centroids": probs.M,
        "cost_m": np.float64(probs.cost_m),
        "cluster_weights": probs.cluster_weights,
        "medians": probs.medians if probs.medians is not None else np.zeros(0),
        "dropped_empty_cells": np.int64(probs.dropped_empty_cells),
    }
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            np.savez(f, **payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load(path: str, space: MetricSpace | None = None, points=None, weights=None) -> OracleState:
    """Rebuild an oracle from disk.

    Standalone (no points): queries work off the stored member points;
    feedback is unavailable. With the original dataset: the per-point
    uniforms are regenerated from the stored seed and checked against the
    stored member set bit-exactly.
    """
    try:
        with np.load(path, allow_pickle=False) as z:
            data = {key: z[key] for key in z.files}
    except (OSError, ValueError) as e:
        raise DataFormatError(f"cannot read oracle file {path}: {e}") from e
    if "version" not in data or int(data["version"]) != _FORMAT_VERSION:
        raise DataFormatError(f"unsupported oracle file version in {path}")
    kind = str(data["kind"])
    if space is None:
        if kind != "euclidean":
            raise DataFormatError(
                "oracle was built over a matrix space; pass the space explicitly"
            )
        space = MetricSpace.euclidean(float(data["power"]))
    p = data["p"]
    members = data["members"]
    probs = One2AllProbabilities(
        pi=data["pi"],
        M=data["centroids"],
        cost_m=float(data["cost_m"]),
        cluster_weights=data["cluster_weights"],
        medians=data["medians"] if data["medians"].size else None,
        rho=float(data["rho"]),
        dropped_empty_cells=int(data["dropped_empty_cells"]),
    )
    sample_seed = int(data["sample_seed"])
    if points is not None:
        points = as_points(points)
        n = points.shape[0]
        if n != int(data["n"]):
            raise DataFormatError(
                f"dataset has {n} points but oracle was built over {int(data['n'])}"
            )
        weights = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
        u = point_uniforms(sample_seed, n)
        sample = draw(points, weights, p, sample_seed, u=u)
        if (
            not np.array_equal(sample.members, members)
            or not np.array_equal(points[members], data["member_points"])
            or not np.array_equal(weights[members], data["member_weights"])
        ):
            raise DataFormatError(
                "stored sample does not match the dataset and seed; "
                "wrong dataset for this oracle file?"
            )
    else:
        weights = None
        m = members.shape[0]
        sample = CoordinatedSample(
            points=data["member_points"],
            weights=data["member_weights"],
            u=None,
            p=p[members],
            members=np.arange(m, dtype=np.intp),
            w_prime=data["member_weights"] / p[members],
            seed=sample_seed,
        )
    return OracleState(
        space=space,
        points=points,
        weights=weights,
        probs=probs,
        p=p,
        sample=sample,
        C=float(data["C"]),
        eps=float(data["eps"]),
        k=int(data["k"]),
        ell=int(data["ell"]),
        prefix_index=int(data["prefix_index"]),
        update_count=int(data["update_count"]),
        seed=int(data["seed"]),
        sample_seed=sample_seed,
    )
