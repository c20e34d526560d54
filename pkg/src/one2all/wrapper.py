"""Adaptive clustering over samples.

Run the base clusterer on a small coordinated sample, check its result
against the full data, and grow the sample until the clustering it found is
certified: its true cost is within (1+eps) of its sample cost and not below
the cost range the sample supports. The per-point uniforms are fixed once,
so every growth step only adds points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import CentroidSet, MetricSpace, as_points, cost
from .kmeanspp import run_trace
from .lloyd import BaseClustererConfig, make_base
from .probabilities import One2AllProbabilities, sweet_spot
from .sampling import CoordinatedSample, draw, estimate_cost, point_uniforms


@dataclass
class WrapperReport:
    certified: bool
    saturated: bool
    rounds: int
    r: float
    sample_size: int
    n: int
    best_cost: float
    seed_cost: float  # cost of the first-k kmeans++ prefix
    sweet_spot_index: int
    cost_m: float  # v at the sweet-spot prefix
    v_full_trace: float  # v_2k
    eps: float
    k: int
    seed: int
    sample_seed: int
    final_p: np.ndarray = field(repr=False)
    probs: One2AllProbabilities = field(repr=False)
    log: list = field(default_factory=list, repr=False)

    @property
    def sample_fraction(self) -> float:
        return self.sample_size / self.n


def certify(space, X, w, sample: CoordinatedSample, Q, eps: float,
            mode: str = "exact", seed: int = 0) -> tuple[float, bool]:
    """Does the sample cost of Q reflect its real cost within (1+eps)?

    exact mode compares against the true cost; validation mode against an
    estimate from an independent sample at the same probabilities.
    """
    est = estimate_cost(space, sample, Q)
    if mode == "exact":
        v_q = cost(space, X, w, Q)
    elif mode == "validation":
        independent = draw(sample.points, sample.weights, sample.p, seed)
        v_q = estimate_cost(space, independent, Q)
    else:
        raise ValueError(f"unknown certify mode {mode!r}")
    return v_q, bool(v_q <= (1.0 + eps) * est)


def multi_sample_confirm(space, X, w, p, base, copies: int, seed: int = 0
                         ) -> tuple[CentroidSet, float]:
    """Cluster `copies` independent samples at p; keep the cheapest result."""
    if copies < 1:
        raise ValueError("copies must be >= 1")
    seeds = np.random.SeedSequence(seed).generate_state(copies, dtype=np.uint64)
    best_q, best_v = None, np.inf
    for s in seeds:
        sample = draw(X, w, p, int(s))
        if sample.size == 0:
            continue
        Q = base(space, sample.member_points(), sample.w_prime)
        v = cost(space, X, w, Q)
        if v < best_v:
            best_q, best_v = Q, v
    if best_q is None:  # every sample came up empty; fall back to full data
        best_q = base(space, X, w)
        best_v = cost(space, X, w, best_q)
    return best_q, best_v


def run(
    space: MetricSpace,
    X,
    w,
    k: int,
    eps: float,
    base=None,
    seed: int = 0,
    max_rounds: int = 40,
    copies: int = 1,
    u: np.ndarray | None = None,
) -> tuple[CentroidSet, WrapperReport]:
    """Cluster (X, w) into k centroids over adaptively grown samples.

    base maps (space, points, weights) to a CentroidSet and must honor the
    weights; default is best-of-5 kmeans++ with 20 Lloyd iterations. u
    overrides the seed-derived per-point uniforms (testing hook).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    X = as_points(X)
    n = X.shape[0]
    w = np.ones(n) if w is None else np.asarray(w, dtype=np.float64)
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    trace_seed, sample_seed, base_seed, confirm_seed = (
        int(s) for s in np.random.SeedSequence(seed).generate_state(4)
    )
    base_seeds = np.random.SeedSequence(base_seed).generate_state(max_rounds, dtype=np.uint64)

    def base_for(rnd: int):
        if base is not None:
            return base
        return make_base(BaseClustererConfig(k=k, seed=int(base_seeds[rnd])))

    ell = min(2 * k, n)
    trace = run_trace(space, X, w, ell, trace_seed)
    i_star, probs = sweet_spot(trace, "rough")
    v_m = float(trace.prefix_costs[i_star - 1])
    v_end = float(trace.prefix_costs[-1])
    k_prefix = min(k, trace.ell)
    best_q = CentroidSet(trace.prefix(k_prefix))
    best_v = float(trace.prefix_costs[k_prefix - 1])
    seed_cost = best_v
    log: list[dict] = []

    def report(certified, saturated, rounds, r, sample, p) -> WrapperReport:
        return WrapperReport(
            certified=certified,
            saturated=saturated,
            rounds=rounds,
            r=r,
            sample_size=sample.size,
            n=n,
            best_cost=best_v,
            seed_cost=seed_cost,
            sweet_spot_index=i_star,
            cost_m=v_m,
            v_full_trace=v_end,
            eps=eps,
            k=k,
            seed=seed,
            sample_seed=sample_seed,
            final_p=p,
            probs=probs,
            log=log,
        )

    uniforms = u if u is not None else point_uniforms(sample_seed, n)

    if v_end <= 0.0:
        # fewer than 2k distinct points: sample everything, answer exactly
        p = np.ones(n)
        sample = draw(X, w, p, sample_seed, u=uniforms)
        Q = base_for(0)(space, X, w)
        v_q = cost(space, X, w, Q)
        if v_q < best_v:
            best_q, best_v = Q, v_q
        log.append({"round": 1, "r": np.inf, "size": n, "V_Q": v_q,
                    "estimate": v_q, "action": "saturated"})
        return best_q, report(True, True, 1, np.inf, sample, p)

    r = v_m / v_end
    inv_eps2 = eps**-2
    certified = False
    saturated = False
    rounds = 0
    p = np.minimum(1.0, r * inv_eps2 * probs.pi)
    sample = draw(X, w, p, sample_seed, u=uniforms)
    for rnd in range(max_rounds):
        rounds = rnd + 1
        this_base = base_for(rnd)
        if sample.size == 0:  # all mass capped away at tiny r; force growth
            log.append({"round": rounds, "r": r, "size": 0, "V_Q": np.inf,
                        "estimate": 0.0, "action": "empty"})
            r *= 2.0
            p = np.minimum(1.0, r * inv_eps2 * probs.pi)
            sample = sample.with_probabilities(p)
            continue
        Q = this_base(space, sample.member_points(), sample.w_prime)
        v_q = cost(space, X, w, Q)
        if copies > 1:
            alt_q, alt_v = multi_sample_confirm(
                space, X, w, p, this_base, copies - 1,
                seed=confirm_seed + rnd,
            )
            if alt_v < v_q:
                Q, v_q = alt_q, alt_v
        if v_q < best_v:
            best_q, best_v = Q, v_q
        est = estimate_cost(space, sample, Q)
        saturated = bool(np.all(p >= 1.0))
        if saturated:
            # the sample is the full data: the estimate is exact
            log.append({"round": rounds, "r": r, "size": sample.size,
                        "V_Q": v_q, "estimate": est, "action": "saturated"})
            certified = True
            break
        if v_q <= (1.0 + eps) * est and v_q >= v_m / r:
            log.append({"round": rounds, "r": r, "size": sample.size,
                        "V_Q": v_q, "estimate": est, "action": "accept"})
            certified = True
            break
        log.append({"round": rounds, "r": r, "size": sample.size,
                    "V_Q": v_q, "estimate": est, "action": "grow"})
        r = max(2.0, v_q / v_m) * r
        # grow until the rejected Q clears the bar (or the sample saturates)
        while True:
            p = np.minimum(1.0, r * inv_eps2 * probs.pi)
            sample = sample.with_probabilities(p)
            est_rej = estimate_cost(space, sample, Q)
            if est_rej > min((1.0 + eps) * best_v, (1.0 - eps) * v_q):
                break
            if np.all(p >= 1.0):
                break
            r *= 2.0
    return best_q, report(certified, saturated, rounds, r, sample, p)
