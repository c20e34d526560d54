"""Shared helpers: small random instances and straight-line reference code.

Reference implementations here are deliberately plain Python loops so they
cannot share bugs with the vectorized package code.
"""

import numpy as np
import pytest

from one2all.core import MetricSpace


def rand_instance(seed, n=10, d=2, p=2.0, weighted=True):
    """A small random weighted instance for brute-force comparisons."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d)) * rng.uniform(0.5, 3.0)
    w = rng.uniform(0.2, 4.0, size=n) if weighted else np.ones(n)
    return MetricSpace.euclidean(p), X, w


def ref_distance(p, x, y):
    s = 0.0
    for a, b in zip(x, y):
        s += (a - b) ** 2
    return s ** (p / 2.0)


def ref_nearest(p, x, Q):
    best = None
    for q in Q:
        d = ref_distance(p, x, q)
        if best is None or d < best:
            best = d
    return best


def ref_cost(p, X, w, Q):
    return sum(wi * ref_nearest(p, x, Q) for x, wi in zip(X, w))


def ref_one2all(p, X, w, M):
    """Straight-line one2all probabilities (loops, no numpy reductions)."""
    rho = 1.0 if p <= 1.0 else 2.0 ** (p - 1.0)
    owner, dist = [], []
    for x in X:
        bi, bd = 0, None
        for j, m in enumerate(M):
            d = ref_distance(p, x, m)
            if bd is None or d < bd:
                bi, bd = j, d
        owner.append(bi)
        dist.append(bd)
    cells = {}
    for i, j in enumerate(owner):
        cells.setdefault(j, []).append(i)
    cost_m = sum(w[i] * dist[i] for i in range(len(X)))
    pi = []
    for i in range(len(X)):
        cell_w = sum(w[j] for j in cells[owner[i]])
        t1 = 0.0 if cost_m == 0 else 2.0 * rho * w[i] * dist[i] / cost_m
        t2 = 8.0 * rho**2 * w[i] / cell_w
        pi.append(min(1.0, max(t1, t2)))
    return np.asarray(pi), cost_m


def assert_json_equal(a, b):
    __tracebackhide__ = True
    if a != b:
        pytest.fail(f"outputs differ:\n{a!r}\n{b!r}")
