import pytest

from metricsemigroup.extcore import (
    INF,
    BridgeMetric,
    FiniteSpace,
    MetricError,
    point_metric,
    qi_fit,
    unit_metric,
    zero_metric,
)
from metricsemigroup.generators import random_bridge, random_double, random_space
from metricsemigroup.rook import is_star_isomorphism, rook_monoid, rook_order, table_to_rook
from metricsemigroup.semigroup import (
    Pattern,
    PartialBijection,
    canonical_class,
    enumerate_semigroup,
    extract_isometry,
    gh_conjugate,
    hasse_dot,
    idempotent_dot,
    natural_order,
    pattern_valid,
    realize,
    units_group,
    verify_inverse_semigroup,
)
from oracles import all_patterns, brute_patterns

TWO = FiniteSpace.discrete(2)


@pytest.fixture(scope="module")
def two():
    return enumerate_semigroup(TWO)


def named(t):
    # names used for the seven classes on two far-apart points a, b
    keys = {"10/01": "I", "00/00": "0", "10/00": "p", "00/01": "q", "01/00": "u", "00/10": "u*", "01/10": "s"}
    return {name: t.find(key) for key, name in keys.items()}


# --- patterns ----------------------------------------------------------------


def test_pattern_keys():
    p = Pattern.from_key("10/01")
    assert p.key == "10/01"
    assert p.transpose().key == "10/01"
    assert Pattern.from_key("01/00").transpose().key == "00/10"
    assert Pattern.empty(2).key == "00/00"


def test_canonical_class_examples():
    sp = FiniteSpace.path(3)
    assert canonical_class(unit_metric(sp)).key == "111/111/111"
    u = BridgeMetric(TWO, TWO, [[INF, 1], [INF, INF]])
    assert canonical_class(u).key == "01/00"


def test_same_pattern_same_class(rng):
    sp = random_space(rng, 5, 1)
    a, b = random_double(rng, sp, {0: 0}), random_double(rng, sp, {0: 0})
    fit = qi_fit(a, b, [1])
    diff = max(abs(x - y) for x, y in zip(a.cross.ravel().tolist(), b.cross.ravel().tolist()))
    assert fit[1] == diff


def test_pattern_valid_examples():
    ok, reason = pattern_valid(TWO, Pattern.from_key("11/00"))
    assert not ok and "related to both" in reason
    assert pattern_valid(TWO, Pattern.from_key("10/00")) == (True, "ok")
    assert pattern_valid(TWO, Pattern.empty(2))[0]
    sp = FiniteSpace([[0, 1, INF], [1, 0, INF], [INF, INF, 0]])
    ok, reason = pattern_valid(sp, Pattern.from_key("100/100/000"))
    assert not ok and "not constant" in reason


def test_realize_examples():
    sp = FiniteSpace.path(3)
    full = realize(sp, Pattern.from_key("111/111/111"))
    assert full == point_metric(sp, 0)
    assert qi_fit(full, unit_metric(sp), [1]) is not None
    assert realize(TWO, Pattern.empty(2)) == zero_metric(TWO)
    with pytest.raises(MetricError):
        realize(TWO, Pattern.from_key("11/00"))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pattern_valid_matches_brute_force(n, rng):
    for _ in range(3):
        sp = random_space(rng, n).with_mode(False)
        brute = brute_patterns(sp)
        mine = {p for p in all_patterns(n) if pattern_valid(sp, p)[0]}
        assert brute == mine


def test_partial_bijection_round_trip():
    sp = FiniteSpace.discrete(3)
    pb = PartialBijection(3, frozenset({(0, 2), (1, 0)}))
    assert PartialBijection.from_pattern(sp, pb.to_pattern(sp)) == pb
    assert pb.then(pb.inverse()).pairs == frozenset({(0, 0), (1, 1)})


# --- the seven-element example -------------------------------------------------


def test_two_point_classes(two):
    assert two.size == 7
    n = named(two)
    m = two.mul
    assert two.unit == n["I"] and two.zero == n["0"]
    assert m[n["u*"]][n["u"]] == n["p"]
    assert m[n["u"]][n["u*"]] == n["q"]
    assert m[n["s"]][n["s"]] == n["I"]
    assert m[n["p"]][n["q"]] == n["0"]
    assert two.star[n["u"]] == n["u*"]
    assert sorted(two.idempotents()) == sorted([n["I"], n["0"], n["p"], n["q"]])


def test_two_point_representatives(two):
    n = named(two)
    assert two.reps[n["I"]] == unit_metric(TWO)
    assert two.reps[n["p"]].cross.tolist() == [[1, INF], [INF, INF]]
    assert two.reps[n["s"]].cross.tolist() == [[INF, 1], [1, INF]]


def test_one_point():
    t = enumerate_semigroup(FiniteSpace([[0]]))
    assert t.size == 2
    assert {p.key for p in t.patterns} == {"0", "1"}
    assert units_group(t) == [t.unit]


@pytest.mark.parametrize("k,size", [(1, 2), (2, 7), (3, 34)])
def test_sizes_and_rook_oracle(k, size, rng):
    sp = random_space(rng, k + 2, k)
    t = enumerate_semigroup(sp)
    assert t.size == size == rook_order(k)
    rep = verify_inverse_semigroup(t)
    assert rep.ok, rep.failures
    _, mul, star = rook_monoid(k)
    assert is_star_isomorphism(t, table_to_rook(t), mul, star)


def test_corrupted_table_detected(two):
    import copy

    bad = copy.deepcopy(two)
    n = named(bad)
    bad.mul[n["u"]][n["u*"]] = n["p"]
    rep = verify_inverse_semigroup(bad)
    assert not rep.ok
    assert not rep.checks["associative"]


def test_rook_monoid_itself_is_inverse():
    from metricsemigroup.semigroup import SemigroupTable

    els, mul, star = rook_monoid(3)
    patterns = [Pattern.from_key("/".join("".join("1" if f[i] == j else "0" for j in range(3)) for i in range(3))) for f in els]
    t = SemigroupTable(FiniteSpace.discrete(3), patterns, [None] * len(els), mul, star, len(els) - 1, 0)
    assert verify_inverse_semigroup(t).ok


def test_products_with_star_are_idempotent(rng):
    t = enumerate_semigroup(FiniteSpace.discrete(3))
    for a in range(t.size):
        assert t.idempotent[t.mul[t.star[a]][a]]
        assert t.idempotent[t.mul[a][t.star[a]]]


# --- order and units -----------------------------------------------------------


def test_natural_order(two):
    n = named(two)
    for e in two.idempotents():
        assert natural_order(two, two.zero, e)
        assert natural_order(two, e, two.unit)
    assert not natural_order(two, n["p"], n["q"])
    assert not natural_order(two, n["q"], n["p"])
    with pytest.raises(MetricError):
        natural_order(two, n["u"], n["I"])


def test_units(two):
    n = named(two)
    assert sorted(units_group(two)) == sorted([n["I"], n["s"]])
    assert len(units_group(enumerate_semigroup(FiniteSpace.discrete(3)))) == 6


def test_extract_isometry(two):
    sp = FiniteSpace.path(3)
    f, w = extract_isometry(unit_metric(sp), enumerate_semigroup(sp))
    assert f == [0, 1, 2]
    n = named(two)
    f, _ = extract_isometry(two.reps[n["s"]], two)
    assert f == [1, 0]
    sp = FiniteSpace([[0, 1, INF, INF], [1, 0, INF, INF], [INF, INF, 0, 2], [INF, INF, 2, 0]])
    t = enumerate_semigroup(sp)
    swap = t.find("0011/0011/1100/1100")
    f, _ = extract_isometry(t.reps[swap], t)
    assert f == [2, 2, 0, 0]
    with pytest.raises(MetricError):
        extract_isometry(two.reps[n["p"]], two)


# --- transport along bridges -------------------------------------------------


def test_gh_identity():
    sp = FiniteSpace.discrete(2)
    t = enumerate_semigroup(sp)
    g = gh_conjugate(unit_metric(sp), t, t)
    assert g.forward == {a: a for a in range(t.size)}
    assert g.isomorphism and g.round_trip


def test_gh_path_to_even_points():
    x = FiniteSpace.path(6)
    y = x.subspace([0, 2, 4])
    cross = x.dist[:, [0, 2, 4]] + 1
    rho = BridgeMetric(x, y, cross)
    g = gh_conjugate(rho, enumerate_semigroup(x))
    assert g.target.size == 2
    assert g.isomorphism and g.round_trip


def test_gh_random_disconnected(rng):
    for _ in range(5):
        k = rng.randint(1, 3)
        x, y = random_space(rng, k + 2, k), random_space(rng, k + 1, k)
        sigma = dict(zip(range(k), rng.sample(range(k), k)))
        rho = random_bridge(rng, x, y, sigma)
        g = gh_conjugate(rho, enumerate_semigroup(x))
        assert g.isomorphism and g.round_trip


def test_gh_unbounded_gap():
    sp = FiniteSpace.discrete(2)
    with pytest.raises(MetricError):
        gh_conjugate(point_metric(sp, 0), enumerate_semigroup(sp))


# --- exports -----------------------------------------------------------------


def test_dot_exports(two):
    dot = hasse_dot(two)
    assert dot.startswith("digraph") and dot.count("->") > 0
    idot = idempotent_dot(two)
    assert "cluster" in idot


def test_table_json(two):
    js = two.to_json()
    assert js["elements"] == ["00/00", "00/01", "00/10", "01/00", "01/10", "10/00", "10/01"]
    assert js["unit"] == 6 and js["zero"] == 0
