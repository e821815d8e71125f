"""The finite inverse semigroup M(X) of a finite extended metric space.

On a finite space two metrics on the double are quasi-isometric exactly when
they have the same finiteness pattern, and the valid patterns are those whose
component relation is a partial bijection.  Classes are therefore keyed by
:class:`Pattern`, and multiplication is computed by composing representative
metrics and reading off the pattern of the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations

import numpy as np

from .extcore import (
    INF,
    BridgeMetric,
    DoubleMetric,
    FiniteSpace,
    MetricError,
    QIWitness,
    almost_isometry_metric,
    compose,
    ext,
    qi_fit,
    unit_metric,
)


@dataclass(frozen=True)
class Pattern:
    """Boolean matrix marking the finite cross entries of a metric."""

    bits: tuple[tuple[bool, ...], ...]

    @classmethod
    def from_array(cls, a) -> Pattern:
        return cls(tuple(tuple(bool(v) for v in row) for row in np.asarray(a)))

    @classmethod
    def from_key(cls, key: str) -> Pattern:
        return cls(tuple(tuple(c == "1" for c in row) for row in key.split("/")))

    @classmethod
    def empty(cls, n: int) -> Pattern:
        return cls(tuple((False,) * n for _ in range(n)))

    @property
    def key(self) -> str:
        return "/".join("".join("1" if b else "0" for b in row) for row in self.bits)

    @property
    def n(self) -> int:
        return len(self.bits)

    def array(self) -> np.ndarray:
        return np.array(self.bits, dtype=bool).reshape(self.n, self.n)

    def transpose(self) -> Pattern:
        return Pattern(tuple(zip(*self.bits))) if self.n else self

    def __str__(self):
        return self.key


@dataclass(frozen=True)
class PartialBijection:
    """Injective partial map between the components of a space."""

    k: int
    pairs: frozenset

    def __post_init__(self):
        dom = [a for a, _ in self.pairs]
        img = [b for _, b in self.pairs]
        if len(set(dom)) != len(dom) or len(set(img)) != len(img):
            raise MetricError("relation is not a partial bijection")

    def as_dict(self) -> dict:
        return dict(self.pairs)

    def then(self, other: PartialBijection) -> PartialBijection:
        """Apply ``self`` first, then ``other``."""
        g = other.as_dict()
        return PartialBijection(
            self.k, frozenset((a, g[b]) for a, b in self.pairs if b in g)
        )

    def inverse(self) -> PartialBijection:
        return PartialBijection(self.k, frozenset((b, a) for a, b in self.pairs))

    @classmethod
    def from_pattern(cls, space: FiniteSpace, p: Pattern) -> PartialBijection:
        ok, reason = pattern_valid(space, p)
        if not ok:
            raise MetricError(reason)
        pairs = set()
        for i, row in enumerate(p.bits):
            for j, b in enumerate(row):
                if b:
                    pairs.add((space.comp_of[i], space.comp_of[j]))
        return cls(space.k, frozenset(pairs))

    def to_pattern(self, space: FiniteSpace) -> Pattern:
        rel = set(self.pairs)
        c = space.comp_of
        return Pattern(
            tuple(
                tuple((c[i], c[j]) in rel for j in range(space.n))
                for i in range(space.n)
            )
        )


def partial_bijections(k: int):
    """All injective partial maps of ``{0..k-1}`` to itself."""
    for size in range(k + 1):
        for dom in combinations(range(k), size):
            for img in permutations(range(k), size):
                yield PartialBijection(k, frozenset(zip(dom, img)))


def canonical_class(d: BridgeMetric) -> Pattern:
    return Pattern.from_array(d.pattern())


def pattern_valid(space: FiniteSpace, p: Pattern) -> tuple[bool, str]:
    """Whether some metric on the double has finiteness pattern ``p``."""
    if p.n != space.n:
        return False, f"pattern is {p.n}x{p.n}, space has {space.n} points"
    c = space.comp_of
    rel: dict[tuple[int, int], bool] = {}
    for i, row in enumerate(p.bits):
        for j, b in enumerate(row):
            key = (c[i], c[j])
            if rel.setdefault(key, b) != b:
                return False, (
                    f"not constant on the block of components {key}: "
                    f"entry ({i},{j}) differs"
                )
    pairs = [key for key, b in rel.items() if b]
    for side, name in ((0, "left"), (1, "right")):
        seen = {}
        for pr in pairs:
            if pr[side] in seen:
                return False, (
                    f"{name} component {pr[side]} is related to both "
                    f"{seen[pr[side]][1 - side]} and {pr[1 - side]}"
                )
            seen[pr[side]] = pr
    return True, "ok"


def realize(space: FiniteSpace, p: Pattern) -> DoubleMetric:
    """Canonical representative of the class with pattern ``p``.

    For each related pair of components ``(c, c')`` with lowest-index points
    ``r, r'``: ``cross[i][j] = d(i, r) + 1 + d(r', j)``.
    """
    ok, reason = pattern_valid(space, p)
    if not ok:
        raise MetricError(reason)
    one = ext(1, space.exact)
    dtype = object if space.exact else np.float64
    cross = np.full((space.n, space.n), INF, dtype=dtype)
    for a, b in PartialBijection.from_pattern(space, p).pairs:
        r, r2 = space.components[a][0], space.components[b][0]
        for i in space.components[a]:
            for j in space.components[b]:
                cross[i, j] = space.dist[i, r] + one + space.dist[r2, j]
    return DoubleMetric._trusted(space, space, cross)


# ---------------------------------------------------------------------------
# the multiplication table


@dataclass
class SemigroupTable:
    """Multiplication, involution and special elements of M(X).

    ``mul[a][b]`` is the class of ``a ∘ b`` (apply ``b`` first).
    """

    space: FiniteSpace
    patterns: list[Pattern]
    reps: list[DoubleMetric]
    mul: list[list[int]]
    star: list[int]
    unit: int
    zero: int
    idempotent: list[bool] = field(init=False)
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.idempotent = [self.mul[a][a] == a for a in range(len(self.patterns))]
        self._index = {p: i for i, p in enumerate(self.patterns)}

    @property
    def size(self) -> int:
        return len(self.patterns)

    def index(self, p: Pattern) -> int:
        return self._index[p]

    def class_of(self, d: BridgeMetric) -> int:
        return self._index[canonical_class(d)]

    def find(self, key: str) -> int:
        return self._index[Pattern.from_key(key)]

    def idempotents(self) -> list[int]:
        return [a for a in range(self.size) if self.idempotent[a]]

    def leq(self, a: int, b: int) -> bool:
        """Natural partial order on all elements: ``a = b a* a``."""
        return self.mul[b][self.mul[self.star[a]][a]] == a

    def to_json(self) -> dict:
        return {
            "elements": [p.key for p in self.patterns],
            "mul": self.mul,
            "star": self.star,
            "unit": self.unit,
            "zero": self.zero,
        }


def enumerate_semigroup(space: FiniteSpace) -> SemigroupTable:
    """All classes of metrics on the double of ``space`` with their products.

    Elements are ordered by pattern key, so the table is deterministic.
    """
    patterns = sorted(
        (pb.to_pattern(space) for pb in partial_bijections(space.k)),
        key=lambda p: p.key,
    )
    index = {p: i for i, p in enumerate(patterns)}
    reps = [realize(space, p) for p in patterns]
    mul = [
        [index[canonical_class(compose(ra, rb))] for rb in reps] for ra in reps
    ]
    star = [index[canonical_class(r.adjoint())] for r in reps]
    unit = index[canonical_class(unit_metric(space))]
    zero = index[Pattern.empty(space.n)]
    return SemigroupTable(space, patterns, reps, mul, star, unit, zero)


@dataclass
class InverseSemigroupReport:
    checks: dict
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {"ok": self.ok, "checks": self.checks, "failures": self.failures}


def verify_inverse_semigroup(t: SemigroupTable) -> InverseSemigroupReport:
    """Check associativity, the involution, unique inverses and idempotents."""
    s = t.size
    M = np.array(t.mul, dtype=np.int64).reshape(s, s)
    star = np.array(t.star, dtype=np.int64)
    ar = np.arange(s)
    failures = []
    checks = {}

    left = M[M]  # left[a, b, c] = (ab)c
    right = M[ar[:, None, None], M[None, :, :]]  # a(bc)
    bad = np.argwhere(left != right)
    checks["associative"] = not len(bad)
    if len(bad):
        a, b, c = bad[0].tolist()
        failures.append(f"associativity fails at (a,b,c)=({a},{b},{c})")

    bad = np.flatnonzero(star[star] != ar)
    checks["involution"] = not len(bad)
    if len(bad):
        failures.append(f"star is not involutive at {int(bad[0])}")

    anti = star[M]
    expect = M[star[None, :], star[:, None]]  # expect[a, b] = star(b) star(a)
    bad = np.argwhere(anti != expect)
    checks["anti_multiplicative"] = not len(bad)
    if len(bad):
        a, b = bad[0].tolist()
        failures.append(f"star(ab) != star(b)star(a) at (a,b)=({a},{b})")

    # b is an inverse of a iff aba = a and bab = b
    aba = M[M, ar[:, None]]
    bab = M[M.T, ar[None, :]]
    inv = (aba == ar[:, None]) & (bab == ar[None, :])
    counts = inv.sum(axis=1)
    checks["unique_inverse"] = bool(np.all(counts == 1))
    for a in np.flatnonzero(counts != 1).tolist():
        failures.append(f"element {a} has {int(counts[a])} inverses")
    checks["inverse_is_star"] = bool(np.all(inv[ar, star]))

    idem = np.flatnonzero(M[ar, ar] == ar)
    sub = M[np.ix_(idem, idem)]
    bad = np.argwhere(sub != sub.T)
    checks["idempotents_commute"] = not len(bad)
    if len(bad):
        e, f = idem[bad[0]].tolist()
        failures.append(f"idempotents {e} and {f} do not commute")
    bad = idem[star[idem] != idem]
    checks["idempotents_selfadjoint"] = not len(bad)
    if len(bad):
        failures.append(f"idempotent {int(bad[0])} is not selfadjoint")
    return InverseSemigroupReport(checks, failures)


def natural_order(t: SemigroupTable, e: int, f: int) -> bool:
    """``e ⪯ f`` for idempotents: ``f e = e``."""
    for x in (e, f):
        if not t.idempotent[x]:
            raise MetricError(f"element {x} is not idempotent")
    return t.mul[f][e] == e


def units_group(t: SemigroupTable) -> list[int]:
    return [
        a
        for a in range(t.size)
        if t.mul[t.star[a]][a] == t.unit and t.mul[a][t.star[a]] == t.unit
    ]


def extract_isometry(d: DoubleMetric, t: SemigroupTable):
    """Point map ``f`` with ``[d^f] = [d]`` for an invertible class.

    ``f(x)`` is the lowest-index minimiser of ``cross[x][.]``.  Returns ``f``
    and the witness at ``beta = 1`` relating ``d^f`` to ``d``.
    """
    if t.class_of(d) not in units_group(t):
        raise MetricError("class of the metric is not invertible")
    f = [int(min(range(d.space.n), key=lambda u: (row[u], u))) for row in d.cross.tolist()]
    df = almost_isometry_metric(d.space, f)
    fit = qi_fit(df, d, [1])
    if fit is None:
        raise AssertionError("extracted map does not reproduce the class")
    return f, QIWitness(fit[1], 1)


@dataclass
class GHConjugation:
    forward: dict
    backward: dict
    target: SemigroupTable
    isomorphism: bool
    round_trip: bool


def gh_conjugate(rho: BridgeMetric, t_x: SemigroupTable, t_y: SemigroupTable | None = None) -> GHConjugation:
    """Transport classes along a bridge ``rho`` on ``X ⊔ Y`` with finite gap.

    ``d ↦ rho d rho*`` maps M(X) to M(Y) and ``b ↦ rho* b rho`` maps back.
    """
    finite = rho.pattern()
    if not (finite.any(axis=1).all() and finite.any(axis=0).all()):
        raise MetricError("bridge has an unbounded Hausdorff gap")
    if not rho.left.same_as(t_x.space):
        raise MetricError("bridge does not start at the table's space")
    if t_y is None:
        t_y = enumerate_semigroup(rho.right)
    rs = rho.adjoint()
    forward = {a: t_y.class_of(compose(rho, compose(r, rs))) for a, r in enumerate(t_x.reps)}
    backward = {b: t_x.class_of(compose(rs, compose(r, rho))) for b, r in enumerate(t_y.reps)}
    bij = sorted(forward.values()) == list(range(t_y.size))
    hom = all(
        forward[t_x.mul[a][b]] == t_y.mul[forward[a]][forward[b]]
        for a in range(t_x.size)
        for b in range(t_x.size)
    ) and all(forward[t_x.star[a]] == t_y.star[forward[a]] for a in range(t_x.size))
    round_trip = all(backward[forward[a]] == a for a in range(t_x.size)) and all(
        forward[backward[b]] == b for b in range(t_y.size)
    )
    return GHConjugation(forward, backward, t_y, bij and hom, round_trip)


# ---------------------------------------------------------------------------
# exports


def hasse_dot(t: SemigroupTable) -> str:
    """Hasse diagram of the natural partial order on all elements."""
    s = t.size
    less = [[a != b and t.leq(a, b) for b in range(s)] for a in range(s)]
    lines = ["digraph natural_order {", "  rankdir=BT;"]
    for a in range(s):
        shape = "box" if t.idempotent[a] else "ellipse"
        lines.append(f'  n{a} [label="{t.patterns[a].key}", shape={shape}];')
    for a in range(s):
        for b in range(s):
            if less[a][b] and not any(less[a][c] and less[c][b] for c in range(s)):
                lines.append(f"  n{a} -> n{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def idempotent_dot(t: SemigroupTable) -> str:
    """Idempotents grouped into D-classes, with covering edges of the order."""
    idem = t.idempotents()
    # e D f iff some x has x x* = e and x* x = f
    cls = {e: e for e in idem}

    def root(e):
        while cls[e] != e:
            e = cls[e]
        return e

    for x in range(t.size):
        e, f = t.mul[x][t.star[x]], t.mul[t.star[x]][x]
        cls[root(e)] = root(f)
    groups: dict[int, list[int]] = {}
    for e in idem:
        groups.setdefault(root(e), []).append(e)
    lines = ["digraph idempotents {", "  rankdir=BT;"]
    for gi, (_, members) in enumerate(sorted(groups.items())):
        lines.append(f"  subgraph cluster_{gi} {{")
        for e in members:
            lines.append(f'    n{e} [label="{t.patterns[e].key}", shape=box];')
        lines.append("  }")
    for e in idem:
        for f in idem:
            if e != f and natural_order(t, e, f) and not any(
                g not in (e, f) and natural_order(t, e, g) and natural_order(t, g, f)
                for g in idem
            ):
                lines.append(f"  n{e} -> n{f};")
    lines.append("}")
    return "\n".join(lines) + "\n"
