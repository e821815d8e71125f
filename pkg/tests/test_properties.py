"""Property tests over randomly generated spaces and doubles."""

import random
from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from metricsemigroup.extcore import (
    INF,
    QIWitness,
    compose,
    criterion_alpha,
    point_metric,
    qi_check,
    qi_fit,
    subset_metric,
    validate_double,
)
from metricsemigroup.generators import (
    random_double,
    random_partial_bijection,
    random_selfadjoint_idempotent,
    random_space,
)
from metricsemigroup.semigroup import enumerate_semigroup

seeds = st.integers(0, 2**32 - 1)
FAST = settings(max_examples=60, deadline=None)


def lam(beta):
    return beta * (2 + beta)


def leq(a, b):
    """Entrywise a <= b on cross matrices, treating INF as top."""
    return all(x <= y for x, y in zip(a.ravel().tolist(), b.ravel().tolist()))


def setup(seed, n_max=6, k=None):
    rng = random.Random(seed)
    n = rng.randint(1, n_max)
    return rng, random_space(rng, n, k if k is None else min(k, n))


@FAST
@given(seeds)
def test_associativity(seed):
    rng, sp = setup(seed)
    a, b, c = (random_double(rng, sp) for _ in range(3))
    assert compose(a, compose(b, c)) == compose(compose(a, b), c)


@FAST
@given(seeds)
def test_compose_output_validates(seed):
    rng, sp = setup(seed)
    a, b = random_double(rng, sp), random_double(rng, sp)
    validate_double(sp, compose(a, b).cross)


@FAST
@given(seeds)
def test_adjoint_reverses_order(seed):
    rng, sp = setup(seed)
    a, b = random_double(rng, sp), random_double(rng, sp)
    assert compose(a, b).adjoint() == compose(b.adjoint(), a.adjoint())
    assert a.adjoint().adjoint() == a


@FAST
@given(seeds)
def test_sandwich(seed):
    rng, sp = setup(seed, 8)
    d = random_double(rng, sp)
    ddd = compose(d, compose(d.adjoint(), d))
    assert leq(d.cross, ddd.cross)
    assert leq(ddd.cross, 3 * d.cross)


@FAST
@given(seeds, st.sampled_from([1, Fraction(3, 2), 2]))
def test_equivalence_compatible_with_composition(seed, beta):
    rng, sp = setup(seed, 5)
    s1 = random_partial_bijection(rng, sp.k, sp.k)
    s2 = random_partial_bijection(rng, sp.k, sp.k)
    d1, e1 = random_double(rng, sp, s1), random_double(rng, sp, s1)
    d2, e2 = random_double(rng, sp, s2), random_double(rng, sp, s2)
    alpha = max(qi_fit(d1, e1, [beta])[beta], qi_fit(d2, e2, [beta])[beta])
    w = QIWitness(alpha, beta)
    assert qi_check(d1, e1, w).ok and qi_check(d2, e2, w).ok
    assert qi_check(compose(d1, d2), compose(e1, e2), QIWitness(2 * alpha, beta)).ok


@FAST
@given(seeds)
def test_equal_pattern_means_equivalent(seed):
    rng, sp = setup(seed, 5)
    sigma = random_partial_bijection(rng, sp.k, sp.k)
    a, b = random_double(rng, sp, sigma), random_double(rng, sp, sigma)
    assert np.array_equal(a.pattern(), b.pattern())
    fin = a.pattern()
    gap = max([abs(x - y) for x, y in zip(a.cross[fin].tolist(), b.cross[fin].tolist())], default=0)
    assert qi_check(a, b, QIWitness(gap, 1)).ok


def _diag_witness(d, rho, beta):
    # constants built as in the domination argument: rho <= (a + a') + (1 + b + b') d
    a = beta * criterion_alpha(d, beta)
    fin = np.isfinite(d.diagonal().astype(float))
    gamma = max([abs(x - y) for x, y in zip(rho.diagonal()[fin].tolist(), d.diagonal()[fin].tolist())], default=0)
    a2 = gamma + a
    return a + a2, 1 + beta + beta


@FAST
@given(seeds, st.sampled_from([1, 2, 3]))
def test_diagonal_determines_idempotents(seed, beta):
    rng, sp = setup(seed, 6)
    d = random_selfadjoint_idempotent(rng, sp)
    live = [c for c in sp.components if d.diagonal()[c[0]] != INF]
    if not live:
        return
    rho = subset_metric(sp, [rng.choice(c) for c in live])
    assert np.array_equal(rho.pattern(), d.pattern())
    a1, b1 = _diag_witness(d, rho, beta)
    a2, b2 = _diag_witness(rho, d, beta)
    assert qi_check(d, rho, QIWitness(max(a1, a2), max(b1, b2))).ok


@FAST
@given(seeds, st.sampled_from([1, Fraction(3, 2), 2, 3]))
def test_commuting_idempotents(seed, beta):
    rng, sp = setup(seed, 6)
    d = random_selfadjoint_idempotent(rng, sp)
    rho = random_selfadjoint_idempotent(rng, sp)
    alpha = max(criterion_alpha(d, beta), criterion_alpha(rho, beta))
    if alpha == INF:
        return
    assert leq(compose(rho, d).cross, lam(beta) * compose(d, rho).cross + 2 * alpha)


@FAST
@given(seeds)
def test_zero_element_bound(seed):
    rng, sp = setup(seed, 6, k=1)
    d = random_double(rng, sp, {0: 0})
    x0 = rng.randrange(sp.n)
    e0 = point_metric(sp, x0)
    bound = d.cross[x0, x0]
    for prod in (compose(e0, d), compose(d, e0)):
        diff = [abs(x - y) for x, y in zip(prod.cross.ravel().tolist(), e0.cross.ravel().tolist())]
        assert max(diff) <= bound


def test_scalar_inequality_grid():
    ts = np.linspace(0, 20, 100)
    betas = np.linspace(1, 10, 100)
    t, b = np.meshgrid(ts, betas)
    assert np.all(1 + t <= b * (2 + b) * np.maximum(t / b, 1 - t) + 1e-12)


def test_scalar_inequality_equality_probe():
    b, t = 1, Fraction(1, 2)
    assert 1 + t == lam(b) * max(t / b, 1 - t) == Fraction(3, 2)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_enumeration_deterministic(seed):
    rng, sp = setup(seed, 5, k=3)
    a, b = enumerate_semigroup(sp), enumerate_semigroup(sp)
    assert a.to_json() == b.to_json()
