from fractions import Fraction

import numpy as np
import pytest

from metricsemigroup.extcore import (
    INF,
    DoubleMetric,
    FiniteSpace,
    MetricError,
    MetricViolation,
    QIWitness,
    almost_isometry_metric,
    compose,
    criterion_alpha,
    ext,
    ext_matrix,
    format_ext,
    idempotent_criterion,
    minplus,
    point_metric,
    qi_check,
    qi_fit,
    subset_metric,
    symmetrize,
    unit_metric,
    validate_double,
    zero_metric,
)
from metricsemigroup.generators import random_double, random_space


def pair(step=1):
    return FiniteSpace.path(2, step)


def rows(d):
    return d.cross.tolist()


# --- extended values -------------------------------------------------------


def test_ext_parsing():
    assert ext("inf") == INF
    assert ext("7/2") == Fraction(7, 2)
    assert ext(4.0) == 4 and isinstance(ext(4.0), int)
    assert ext(0.25) == Fraction(1, 4)
    assert ext("3", exact=False) == 3.0
    with pytest.raises(MetricError):
        ext(-1)
    with pytest.raises(MetricError):
        ext(float("nan"))
    with pytest.raises(MetricError):
        ext(True)


def test_saturating_arithmetic_and_order():
    x = ext(3)
    assert x + INF == INF
    assert min(x, INF) == x
    assert sorted([INF, 2, Fraction(1, 2)]) == [Fraction(1, 2), 2, INF]


def test_format_round_trip():
    m = ext_matrix([[1, "3/2"], ["inf", 0.5]])
    assert [[format_ext(v) for v in r] for r in m.tolist()] == [[1, "3/2"], ["inf", "1/2"]]


def test_minplus_float_matches_exact(rng):
    sp = random_space(rng, 6)
    a = random_double(rng, sp).cross
    b = random_double(rng, sp).cross
    exact = minplus(a, b)
    fl = minplus(a.astype(float), b.astype(float))
    assert np.allclose(exact.astype(float), fl)


# --- spaces ------------------------------------------------------------------


def test_space_components():
    sp = FiniteSpace([[0, 1, INF], [1, 0, INF], [INF, INF, 0]])
    assert sp.k == 2
    assert [list(c) for c in sp.components] == [[0, 1], [2]]


def test_space_rejects_bad_distances():
    with pytest.raises(MetricError):
        FiniteSpace([[0, 1], [2, 0]])
    with pytest.raises(MetricError):
        FiniteSpace([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    with pytest.raises(MetricError):
        FiniteSpace([[0, 0], [0, 0]])


def test_graph_space_shortest_paths():
    sp = FiniteSpace.from_graph(4, [(0, 1, 1), (1, 2, 2), (0, 2, 5)])
    assert sp.dist[0, 2] == 3
    assert sp.dist[0, 3] == INF
    assert sp.k == 2


def test_single_point_space():
    sp = FiniteSpace([[0]])
    assert rows(unit_metric(sp)) == [[1]]
    assert rows(compose(unit_metric(sp), unit_metric(sp))) == [[2]]


# --- validation --------------------------------------------------------------


def test_unit_is_valid():
    d = validate_double(pair(), [[1, 2], [2, 1]])
    assert d == unit_metric(pair())


def test_violation_reported_with_slack():
    with pytest.raises(MetricViolation) as info:
        validate_double(pair(), [[1, 5], [1, 1]])
    hits = [(v.i, v.j, v.k) for v in info.value.violations if v.slack == 3]
    assert (0, 1, 0) in hits
    assert all(v.slack > 0 for v in info.value.violations)


def test_zero_entry_rejected():
    with pytest.raises(MetricError, match="positive"):
        validate_double(pair(), [[0, 1], [1, 1]])


def test_non_square_rejected():
    with pytest.raises(MetricError):
        validate_double(pair(), [[1, 2, 3], [2, 1, 2]])


# --- composition and adjoint -------------------------------------------------


def test_unit_squared():
    i = unit_metric(pair())
    assert rows(compose(i, i)) == [[2, 3], [3, 2]]


def test_zero_absorbs():
    sp = pair()
    z = zero_metric(sp)
    d = unit_metric(sp)
    assert all(v == INF for r in rows(compose(z, d)) for v in r)
    assert all(v == INF for r in rows(compose(d, z)) for v in r)


def test_compose_order():
    # compose(outer, inner): inner is applied first
    sp = FiniteSpace.path(3)
    d = DoubleMetric(sp, [[1, 2, 3], [2, 3, 4], [3, 4, 5]])
    e = point_metric(sp, 2)
    got = compose(e, d).cross
    want = minplus(d.cross, e.cross)
    assert got.tolist() == want.tolist()


def test_adjoint():
    sp = FiniteSpace.path(2, 3)
    d = DoubleMetric(sp, [[1, 2], [3, 1]])
    assert rows(d.adjoint()) == [[1, 3], [2, 1]]
    assert d.adjoint().adjoint() == d
    assert unit_metric(sp).adjoint() == unit_metric(sp)


def test_adjoint_reverses_composition(rng):
    sp = random_space(rng, 5)
    a, b = random_double(rng, sp), random_double(rng, sp)
    assert compose(a, b).adjoint() == compose(b.adjoint(), a.adjoint())


def test_symmetrize_stays_in_class(rng):
    sp = random_space(rng, 5)
    d = random_double(rng, sp)
    s = compose(d.adjoint(), d)
    assert qi_check(symmetrize(s), s, QIWitness(0, 1)).ok


# --- constructors ------------------------------------------------------------


def test_unit_metric_examples():
    assert rows(unit_metric(pair())) == [[1, 2], [2, 1]]
    ext_pair = FiniteSpace.discrete(2)
    assert rows(unit_metric(ext_pair)) == [[1, INF], [INF, 1]]


def test_unit_then_d_is_close(rng):
    sp = random_space(rng, 6)
    d = random_double(rng, sp)
    assert qi_check(compose(unit_metric(sp), d), d, QIWitness(1, 1)).ok


def test_point_metric_examples():
    assert rows(point_metric(FiniteSpace.path(3), 1)) == [[3, 2, 3], [2, 1, 2], [3, 2, 3]]
    assert rows(point_metric(FiniteSpace.discrete(2), 0)) == [[1, INF], [INF, INF]]


def test_point_metric_independent_of_base():
    sp = FiniteSpace.path(5)
    fit = qi_fit(point_metric(sp, 0), point_metric(sp, 3), [1])
    assert fit is not None and fit[1] <= 2 * 3


def test_subset_metric_examples():
    sp = FiniteSpace.path(4)
    assert subset_metric(sp, range(4)) == unit_metric(sp)
    assert subset_metric(sp, [2]) == point_metric(sp, 2)
    assert subset_metric(sp, [0, 3]).diagonal().tolist() == [1, 3, 3, 1]
    with pytest.raises(MetricError):
        subset_metric(sp, [])


def test_almost_isometry_examples():
    sp = FiniteSpace.path(3)
    assert almost_isometry_metric(sp, [0, 1, 2], 1) == unit_metric(sp)
    rev = almost_isometry_metric(sp, [2, 1, 0])
    # C defaults to the distortion floored at 1; here the reversal is an isometry
    brute = min(sp.dist[0, z] + 1 + sp.dist[2 - z, 0] for z in range(3))
    assert rev.cross[0, 0] == brute == 3
    with pytest.raises(MetricError):
        almost_isometry_metric(sp, [0, 1, 5])
    with pytest.raises(MetricError):
        almost_isometry_metric(FiniteSpace.path(3), [0, 0, 0], 1)


def test_almost_isometry_inverse_pair():
    sp = FiniteSpace.path(6)
    f = [min(5, x + 1) for x in range(6)]
    g = [max(0, x - 1) for x in range(6)]
    df, dg = almost_isometry_metric(sp, f), almost_isometry_metric(sp, g)
    i = unit_metric(sp)
    assert qi_fit(compose(df, dg), i, [1]) is not None
    assert qi_fit(compose(dg, df), i, [1]) is not None


# --- quasi-isometry ----------------------------------------------------------


def test_qi_reflexive_and_mismatch():
    sp = FiniteSpace.discrete(2)
    i = unit_metric(sp)
    assert qi_check(i, i, QIWitness()).ok
    p = point_metric(sp, 0)
    res = qi_check(i, p, QIWitness(100, 100))
    assert not res.ok and res.excess == INF
    assert qi_fit(i, p, [1, 2]) is None


def test_qi_fit_shift():
    sp = FiniteSpace.path(3)
    i = unit_metric(sp)
    shifted = DoubleMetric(sp, i.cross + 5)
    assert qi_fit(i, shifted, [1])[1] == 5
    assert qi_fit(i, i, [1, 2, 4]) == {1: 0, 2: 0, 4: 0}


def test_witness_bounds():
    with pytest.raises(MetricError):
        QIWitness(-1, 1)
    with pytest.raises(MetricError):
        QIWitness(0, Fraction(1, 2))


def test_sandwich_constant_three(rng):
    sp = random_space(rng, 6, 1)
    d = random_double(rng, sp)
    ddd = compose(d, compose(d.adjoint(), d))
    assert qi_check(d, ddd, QIWitness(0, 3)).ok


def test_idempotent_criterion_examples():
    sp = FiniteSpace.path(6)
    da = subset_metric(sp, [0, 5])
    assert idempotent_criterion(da, QIWitness(0, 2))
    assert not idempotent_criterion(da, QIWitness(0, 1))
    assert idempotent_criterion(unit_metric(sp), QIWitness(0, 1))
    asym = DoubleMetric(FiniteSpace.path(2, 3), [[1, 2], [3, 1]])
    with pytest.raises(MetricError):
        idempotent_criterion(asym, QIWitness(0, 1))


def test_two_rays_criterion_grows():
    # truncated rays (n, ±n, 0) in R^3, second copy mirrored to height 1
    alphas = []
    for n in (4, 8, 16, 32):
        pts = [(k, s * k, 0.0) for s in (1, -1) for k in range(1, n + 1)]
        sp = FiniteSpace.from_points(pts)
        mirror = np.array([(x, -y, 1.0) for x, y, _ in pts])
        cross = np.sqrt(((np.array(pts)[:, None, :] - mirror[None]) ** 2).sum(axis=2))
        d = DoubleMetric(sp, cross)
        assert np.allclose(d.rowmin(), 1.0)
        alphas.append(criterion_alpha(d, 4))
    assert all(b > a + 1 for a, b in zip(alphas, alphas[1:]))


def test_float_rounding_not_a_violation():
    # collinear sampled points: exact equality in the triangle inequality up to rounding
    t = np.linspace(0, 1, 7)
    pts = np.stack([t * np.cos(0.3), t * np.sin(0.3)], axis=1)
    sp = FiniteSpace.from_points(pts.tolist())
    shifted = pts + [0.0, 0.7]
    cross = np.sqrt(((pts[:, None, :] - shifted[None]) ** 2).sum(axis=2))
    validate_double(sp, cross)
    cross[0, 6] += 1.0
    with pytest.raises(MetricViolation):
        validate_double(sp, cross)


def test_nan_rejected_and_input_untouched():
    sp = FiniteSpace.path(2, exact=False)
    cross = np.array([[1.0, 2.0], [2.0, 1.0]])
    validate_double(sp, cross)
    assert cross.flags.writeable
    cross[0, 1] = np.nan
    with pytest.raises(MetricError):
        validate_double(sp, cross)
