"""Random finite extended spaces and random valid metrics on doubles and bridges.

Cross matrices are built from a few "bridge edges" ``(a, b, w)``:
``cross[x][y] = min_p d(x, a_p) + w_p + d(b_p, y)``.  The result satisfies all
triangle inequalities as soon as every pair of edges obeys
``|d(a_p, a_q) - d(b_p, b_q)| <= w_p + w_q``, which the weights guarantee.
"""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np

from .extcore import (
    INF,
    BridgeMetric,
    DoubleMetric,
    FiniteSpace,
    compose,
    ext,
    subset_metric,
)


def _weight(rng: random.Random, exact: bool, hi: int = 5, fractional: bool = True):
    w = Fraction(rng.randint(1, hi * 4), rng.choice((1, 1, 2, 4))) if fractional else rng.randint(1, hi)
    return ext(w, exact)


def random_space(
    rng: random.Random,
    n: int,
    k: int | None = None,
    *,
    exact: bool = True,
    fractional: bool = False,
) -> FiniteSpace:
    """Shortest-path metric of a random graph with ``k`` components."""
    if k is None:
        k = rng.randint(1, n)
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    points = list(range(n))
    rng.shuffle(points)
    groups = [[p] for p in points[:k]]
    for p in points[k:]:
        rng.choice(groups).append(p)
    edges = []
    for g in groups:
        for idx in range(1, len(g)):
            edges.append((g[idx], g[rng.randrange(idx)], _weight(rng, exact, fractional=fractional)))
        for _ in range(rng.randint(0, len(g))):
            a, b = rng.sample(g, 2) if len(g) > 1 else (None, None)
            if a is not None:
                edges.append((a, b, _weight(rng, exact, fractional=fractional)))
    return FiniteSpace.from_graph(n, edges, exact=exact)


def random_partial_bijection(rng: random.Random, k_left: int, k_right: int, total=False) -> dict:
    """Random injective partial map between component indices."""
    size = min(k_left, k_right) if total else rng.randint(0, min(k_left, k_right))
    dom = rng.sample(range(k_left), size)
    img = rng.sample(range(k_right), size)
    return dict(zip(dom, img))


def bridge_from_edges(left: FiniteSpace, right: FiniteSpace, edges) -> np.ndarray:
    """Cross matrix ``min_p left[:, a_p] + w_p + right[b_p, :]``."""
    dtype = object if left.exact else np.float64
    cross = np.full((left.n, right.n), INF, dtype=dtype)
    for a, b, w in edges:
        cand = left.dist[:, a][:, None] + w + right.dist[b, :][None, :]
        cross = np.minimum(cross, cand)
    return cross


def random_bridge(
    rng: random.Random,
    left: FiniteSpace,
    right: FiniteSpace,
    sigma: dict | None = None,
    *,
    max_edges: int = 3,
    fractional: bool = True,
) -> BridgeMetric:
    """Random valid metric on ``left ⊔ right`` whose finite blocks follow ``sigma``."""
    if sigma is None:
        sigma = random_partial_bijection(rng, left.k, right.k)
    exact = left.exact
    ends = []
    for c, c2 in sorted(sigma.items()):
        for _ in range(rng.randint(1, max_edges)):
            ends.append(
                (rng.choice(left.components[c]), rng.choice(right.components[c2]))
            )
    gap = ext(0, exact)
    for a, b in ends:
        for a2, b2 in ends:
            x, y = left.dist[a, a2], right.dist[b, b2]
            if x != INF and y != INF:
                gap = max(gap, abs(x - y))
    half = gap / 2
    edges = [(a, b, half + _weight(rng, exact, fractional=fractional)) for a, b in ends]
    cross = bridge_from_edges(left, right, edges)
    if left is right:
        return DoubleMetric(left, cross)
    return BridgeMetric(left, right, cross)


def random_double(rng: random.Random, space: FiniteSpace, sigma=None, *, mix=True) -> DoubleMetric:
    """Random valid double metric; sometimes a composite of two random ones."""
    d = random_bridge(rng, space, space, sigma)
    if mix and sigma is None and rng.random() < 0.25:
        d = compose(random_bridge(rng, space, space), d)
    return d


def random_selfadjoint_idempotent(rng: random.Random, space: FiniteSpace) -> DoubleMetric:
    """Either a subset metric or ``d* ∘ d`` for a random ``d``; exactly selfadjoint."""
    if rng.random() < 0.5:
        size = rng.randint(1, space.n)
        return subset_metric(space, rng.sample(range(space.n), size))
    d = random_double(rng, space)
    return compose(d.adjoint(), d)
