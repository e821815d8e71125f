"""Extended distances, finite extended metric spaces and metrics on doubles.

A metric on the double ``X ⊔ X'`` (or on a bridge ``X ⊔ Y``) is stored by its
cross matrix ``cross[i][j] = d(x_i, y_j')``; the restrictions to each copy are
the distance matrices of the underlying spaces.

Two numeric modes are supported.  Exact mode keeps every entry as ``int`` or
``fractions.Fraction`` in a numpy object array; float mode uses ``float64``.
``INF`` (``math.inf``) is the only infinite value in both modes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

INF = math.inf

ExtValue = Union[int, Fraction, float]

#: Re-validate outputs of :func:`compose` when its ``check`` argument is None.
DEBUG_CHECKS = False

_threads = 1


class MetricError(ValueError):
    """Raised for malformed spaces, cross matrices or arguments."""


class MetricViolation(MetricError):
    """A cross matrix failed the triangle inequalities."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        worst = max(violations, key=lambda v: v.slack)
        super().__init__(
            f"{len(violations)} triangle violation(s); worst {worst.describe()}"
        )


def set_threads(n: int) -> None:
    """Set worker count for float min-plus products (0 = one per CPU)."""
    global _threads
    if n < 0:
        raise ValueError("thread count must be >= 0")
    if n == 0:
        import os

        n = os.cpu_count() or 1
    _threads = n


# ---------------------------------------------------------------------------
# extended values


def ext(value, exact: bool = True) -> ExtValue:
    """Parse a nonnegative extended value.

    Accepts ints, floats, Fractions and strings ("inf", "3", "7/2", "0.25").
    Exact mode returns an ``int`` when the value is integral, else a
    ``Fraction``; float mode returns ``float``.
    """
    if isinstance(value, bool):
        raise MetricError(f"not a distance: {value!r}")
    if isinstance(value, str):
        s = value.strip().lower()
        if s in ("inf", "+inf", "infinity", "∞"):
            return INF
        try:
            value = Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise MetricError(f"not a distance: {value!r}") from exc
    if isinstance(value, float):
        if math.isnan(value):
            raise MetricError("NaN is not a distance")
        if value == INF:
            return INF
        if exact:
            value = Fraction(repr(value))
    elif isinstance(value, np.generic):
        return ext(value.item(), exact)
    elif not isinstance(value, (int, Fraction)):
        raise MetricError(f"not a distance: {value!r}")
    if value < 0:
        raise MetricError(f"negative distance {value}")
    if not exact:
        return float(value)
    value = Fraction(value)
    return int(value) if value.denominator == 1 else value


def is_inf(value) -> bool:
    return value == INF


def format_ext(value):
    """JSON form of an extended value: "inf", an int, "p/q" or a float."""
    if value == INF:
        return "inf"
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return int(value) if value.is_integer() else value
    return int(value)


def ext_matrix(rows, exact: bool = True) -> np.ndarray:
    """Convert a nested sequence of extended values into a 2-D matrix."""
    if isinstance(rows, np.ndarray) and rows.ndim == 2:
        if exact and rows.dtype == object:
            return rows
        if not exact and rows.dtype == np.float64:
            if np.isnan(rows).any():
                raise MetricError("NaN is not an extended distance")
            return rows
        rows = rows.tolist()
    rows = [list(r) for r in rows]
    if not rows or any(len(r) != len(rows[0]) for r in rows) or not rows[0]:
        raise MetricError("matrix must be a non-empty rectangular array")
    vals = [[ext(v, exact) for v in r] for r in rows]
    if exact:
        out = np.empty((len(vals), len(vals[0])), dtype=object)
        for i, r in enumerate(vals):
            for j, v in enumerate(r):
                out[i, j] = v
        return out
    return np.array(vals, dtype=np.float64)


def _freeze(a: np.ndarray) -> np.ndarray:
    if a.flags.writeable:
        # never lock an array the caller still holds
        a = a.copy()
    a.flags.writeable = False
    return a


def _to_mode(a: np.ndarray, exact: bool) -> np.ndarray:
    if (a.dtype == object) == exact:
        return a
    return ext_matrix(a, exact)


def matrix_to_json(a: np.ndarray) -> list:
    return [[format_ext(v) for v in row] for row in a.tolist()]


# ---------------------------------------------------------------------------
# min-plus kernel


def minplus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Min-plus product ``out[i][k] = min_j a[i][j] + b[j][k]``.

    Exact (object) matrices are handled with plain Python arithmetic; float
    matrices with chunked numpy broadcasting, optionally threaded over row
    blocks.  Minima are order-independent, so results do not depend on the
    thread count.
    """
    if a.shape[1] != b.shape[0]:
        raise MetricError(f"shape mismatch {a.shape} x {b.shape}")
    if a.dtype == object or b.dtype == object:
        al = a.tolist()
        cols = b.T.tolist()
        out = np.empty((a.shape[0], b.shape[1]), dtype=object)
        for i, row in enumerate(al):
            for k, col in enumerate(cols):
                out[i, k] = min([x + y for x, y in zip(row, col)])
        return out
    n, m = a.shape
    p = b.shape[1]
    out = np.empty((n, p), dtype=np.float64)
    step = max(1, (1 << 22) // max(1, m * p))
    starts = range(0, n, step)

    def work(i0):
        i1 = min(n, i0 + step)
        out[i0:i1] = (a[i0:i1, :, None] + b[None, :, :]).min(axis=1)

    if _threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(_threads) as pool:
            list(pool.map(work, starts))
    else:
        for i0 in starts:
            work(i0)
    return out


def _mat_eq(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and bool(np.all(a == b))


# ---------------------------------------------------------------------------
# spaces


class FiniteSpace:
    """A finite extended metric space given by its distance matrix."""

    __slots__ = ("dist", "components", "comp_of")

    def __init__(self, dist, *, exact: bool = True, check: bool = True):
        d = ext_matrix(dist, exact)
        if d.shape[0] != d.shape[1]:
            raise MetricError("distance matrix must be square")
        if check:
            problems = space_problems(d)
            if problems:
                raise MetricError("invalid space: " + "; ".join(problems[:5]))
        self.dist = _freeze(d)
        n = d.shape[0]
        comp_of = [-1] * n
        comps = []
        for i in range(n):
            if comp_of[i] >= 0:
                continue
            members = tuple(j for j in range(n) if d[i, j] != INF)
            for j in members:
                comp_of[j] = len(comps)
            comps.append(members)
        self.components: tuple[tuple[int, ...], ...] = tuple(comps)
        self.comp_of: tuple[int, ...] = tuple(comp_of)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def k(self) -> int:
        """Number of components (finite-distance classes)."""
        return len(self.components)

    @property
    def exact(self) -> bool:
        return self.dist.dtype == object

    def same_as(self, other: FiniteSpace) -> bool:
        return self is other or (
            self.exact == other.exact and _mat_eq(self.dist, other.dist)
        )

    def with_mode(self, exact: bool) -> FiniteSpace:
        if exact == self.exact:
            return self
        return FiniteSpace(_to_mode(self.dist, exact), exact=exact, check=False)

    def subspace(self, indices: Sequence[int]) -> FiniteSpace:
        idx = list(indices)
        return FiniteSpace(
            self.dist[np.ix_(idx, idx)], exact=self.exact, check=False
        )

    def to_json(self) -> dict:
        return {"n": self.n, "dist": matrix_to_json(self.dist)}

    def __repr__(self):
        return f"FiniteSpace(n={self.n}, components={self.k})"

    # constructors -------------------------------------------------------

    @classmethod
    def from_points(cls, coords, *, exact: bool = False) -> FiniteSpace:
        """Euclidean distances between coordinate rows (float mode)."""
        pts = np.asarray(coords, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        diff = pts[:, None, :] - pts[None, :, :]
        d = np.sqrt((diff**2).sum(axis=2))
        if exact:
            if not np.all(d == np.round(d)):
                raise MetricError("exact mode needs integral distances")
            d = d.astype(np.int64)
        return cls(d, exact=exact, check=False)

    @classmethod
    def path(cls, n: int, step=1, *, exact: bool = True) -> FiniteSpace:
        """Points ``0..n-1`` on a line with spacing ``step``."""
        s = ext(step, exact)
        return cls(
            [[s * abs(i - j) for j in range(n)] for i in range(n)],
            exact=exact,
            check=False,
        )

    @classmethod
    def discrete(cls, k: int, *, exact: bool = True) -> FiniteSpace:
        """``k`` points pairwise at infinite distance."""
        return cls(
            [[0 if i == j else INF for j in range(k)] for i in range(k)],
            exact=exact,
            check=False,
        )

    @classmethod
    def from_graph(cls, n: int, edges: Iterable[tuple], *, exact: bool = True):
        """Shortest-path metric of an undirected weighted graph.

        Unreachable pairs are at distance ``INF``.
        """
        d = [[0 if i == j else INF for j in range(n)] for i in range(n)]
        for i, j, w in edges:
            w = ext(w, exact)
            if i == j or w <= 0:
                raise MetricError(f"bad edge {(i, j, w)}")
            if w < d[i][j]:
                d[i][j] = d[j][i] = w
        m = ext_matrix(d, exact)
        while True:
            nxt = minplus(m, m)
            if _mat_eq(nxt, m):
                break
            m = nxt
        return cls(m, exact=exact, check=False)

    @classmethod
    def from_json(cls, obj: dict, *, exact: bool = True) -> FiniteSpace:
        dist = obj["dist"]
        if "n" in obj and len(dist) != obj["n"]:
            raise MetricError("'n' does not match the distance matrix")
        return cls(dist, exact=exact)


def space_problems(d: np.ndarray) -> list[str]:
    """Reasons why ``d`` is not an extended metric (empty when it is)."""
    n = d.shape[0]
    out = []
    for i in range(n):
        if d[i, i] != 0:
            out.append(f"dist[{i}][{i}] = {d[i, i]} is not zero")
        for j in range(i + 1, n):
            if d[i, j] != d[j, i]:
                out.append(f"dist[{i}][{j}] != dist[{j}][{i}]")
            if d[i, j] <= 0:
                out.append(f"dist[{i}][{j}] = {d[i, j]} is not positive")
    if out:
        return out
    sq = minplus(d, d)
    bad = np.argwhere(_below(sq, d))
    for i, j in bad.tolist():
        k = min(range(n), key=lambda k: d[i, k] + d[k, j])
        out.append(
            f"dist[{i}][{j}] = {d[i, j]} > dist[{i}][{k}] + dist[{k}][{j}]"
        )
    return out


# ---------------------------------------------------------------------------
# metrics on doubles and bridges


@dataclass(frozen=True)
class Violation:
    """One failed triangle inequality ``lhs <= rhs``; ``slack = lhs - rhs``."""

    family: str
    i: int
    j: int
    k: int
    lhs: ExtValue
    rhs: ExtValue

    @property
    def slack(self):
        return self.lhs - self.rhs

    def describe(self) -> str:
        return (
            f"{self.family} at (i={self.i}, j={self.j}, k={self.k}): "
            f"{self.lhs} > {self.rhs}"
        )

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "i": self.i,
            "j": self.j,
            "k": self.k,
            "lhs": format_ext(self.lhs),
            "rhs": format_ext(self.rhs),
            "slack": format_ext(self.slack),
        }


# The four triangle families of an assembled bridge matrix.  Each entry gives
# the checked matrix and the two factors whose min-plus product bounds it.
FAMILIES = (
    "cross[i][j] <= dist[i][k] + cross[k][j]",
    "cross[i][j] <= cross[i][k] + dist'[k][j]",
    "dist[i][j] <= cross[i][k] + cross[j][k]",
    "dist'[i][j] <= cross[k][i] + cross[k][j]",
)


def _family_operands(left: FiniteSpace, right: FiniteSpace, cross: np.ndarray):
    ct = cross.T
    return (
        (cross, left.dist, cross),
        (cross, cross, right.dist),
        (left.dist, cross, ct),
        (right.dist, ct, cross),
    )


# float mode only: rounding slack allowed by the triangle scans
FLOAT_RTOL = 1e-12


def _below(prod: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Where ``prod < target``, ignoring float rounding in float mode."""
    if prod.dtype == object:
        return prod < target
    with np.errstate(invalid="ignore"):
        slack = FLOAT_RTOL * np.where(np.isfinite(target), np.abs(target) + 1, 0)
    return prod < target - slack


def triangle_violations(
    left: FiniteSpace, right: FiniteSpace, cross: np.ndarray
) -> list[Violation]:
    """Every violated triple of the assembled bridge matrix, all families."""
    out = []
    for name, (target, a, b) in zip(FAMILIES, _family_operands(left, right, cross)):
        prod = minplus(a, b)
        for i, j in np.argwhere(_below(prod, target)).tolist():
            lhs = target[i, j]
            # bar is lhs itself in exact mode
            bar = lhs if prod.dtype == object or lhs == INF else lhs - FLOAT_RTOL * (lhs + 1)
            for k in range(a.shape[1]):
                rhs = a[i, k] + b[k, j]
                if rhs < bar:
                    out.append(Violation(name, i, j, k, lhs, rhs))
    return out


def _satisfies_triangles(left, right, cross) -> bool:
    return all(
        not np.any(_below(minplus(a, b), target))
        for target, a, b in _family_operands(left, right, cross)
    )


class BridgeMetric:
    """A metric on ``X ⊔ Y`` extending the metrics of ``left`` and ``right``."""

    __slots__ = ("left", "right", "cross")

    def __init__(self, left: FiniteSpace, right: FiniteSpace, cross, *, check=True):
        if left.exact != right.exact:
            raise MetricError("left and right spaces use different numeric modes")
        c = ext_matrix(cross, left.exact)
        if c.shape != (left.n, right.n):
            raise MetricError(
                f"cross matrix has shape {c.shape}, expected {(left.n, right.n)}"
            )
        if check:
            nonpos = np.argwhere(c <= 0)
            if len(nonpos):
                i, j = nonpos[0].tolist()
                raise MetricError(
                    f"cross[{i}][{j}] = {c[i, j]}: the copies must be at "
                    "positive distance"
                )
            violations = triangle_violations(left, right, c)
            if violations:
                raise MetricViolation(violations)
        self.left = left
        self.right = right
        self.cross = _freeze(c)

    @classmethod
    def _trusted(cls, left, right, cross):
        obj = cls.__new__(cls)
        obj.left, obj.right, obj.cross = left, right, _freeze(cross)
        return obj

    @property
    def exact(self) -> bool:
        return self.left.exact

    @property
    def shape(self):
        return self.cross.shape

    def adjoint(self) -> BridgeMetric:
        return BridgeMetric._trusted(self.right, self.left, self.cross.T.copy())

    def pattern(self) -> np.ndarray:
        """Boolean matrix of finite cross entries."""
        return np.asarray(self.cross != INF, dtype=bool)

    def is_valid(self) -> bool:
        return bool(np.all(self.cross > 0)) and _satisfies_triangles(
            self.left, self.right, self.cross
        )

    def assembled(self) -> np.ndarray:
        """The full ``(n+m) x (n+m)`` distance matrix."""
        top = np.concatenate([self.left.dist, self.cross], axis=1)
        bottom = np.concatenate([self.cross.T, self.right.dist], axis=1)
        return np.concatenate([top, bottom], axis=0)

    def rowmin(self) -> np.ndarray:
        """``d(x, Y')`` for every ``x``."""
        if self.exact:
            return np.array([min(r) for r in self.cross.tolist()], dtype=object)
        return self.cross.min(axis=1)

    def __eq__(self, other):
        if not isinstance(other, BridgeMetric):
            return NotImplemented
        return (
            self.left.same_as(other.left)
            and self.right.same_as(other.right)
            and _mat_eq(self.cross, other.cross)
        )

    __hash__ = None

    def to_json(self) -> dict:
        return {
            "n": self.left.n,
            "dist": matrix_to_json(self.left.dist),
            "cross": matrix_to_json(self.cross),
        }

    def __repr__(self):
        return f"{type(self).__name__}(shape={self.cross.shape})"


class DoubleMetric(BridgeMetric):
    """A metric on the double ``X ⊔ X'``."""

    __slots__ = ()

    def __init__(self, space: FiniteSpace, cross, *, check=True):
        super().__init__(space, space, cross, check=check)

    @property
    def space(self) -> FiniteSpace:
        return self.left

    def adjoint(self) -> DoubleMetric:
        return DoubleMetric._trusted(self.left, self.left, self.cross.T.copy())

    def diagonal(self) -> np.ndarray:
        """``d(x, x')`` for every ``x``."""
        return np.array(np.diagonal(self.cross))

    def with_mode(self, exact: bool) -> DoubleMetric:
        if exact == self.exact:
            return self
        sp = self.space.with_mode(exact)
        return DoubleMetric._trusted(sp, sp, _to_mode(self.cross, exact))

    @classmethod
    def from_json(cls, obj: dict, *, exact: bool = True, check=True):
        space = FiniteSpace.from_json(obj, exact=exact)
        return cls(space, obj["cross"], check=check)


def _bridge(left, right, cross) -> BridgeMetric:
    if left is right:
        return DoubleMetric._trusted(left, right, cross)
    return BridgeMetric._trusted(left, right, cross)


def validate_double(space: FiniteSpace, cross) -> DoubleMetric:
    """Build a :class:`DoubleMetric`, raising on any defect.

    Raises :class:`MetricError` for a wrongly shaped or non-positive cross
    matrix, and :class:`MetricViolation` (listing every violated triple with
    its slack) when a triangle inequality fails.
    """
    c = ext_matrix(cross, space.exact)
    if c.shape[0] != c.shape[1]:
        raise MetricError("cross matrix must be square")
    return DoubleMetric(space, c)


def compose(outer: BridgeMetric, inner: BridgeMetric, *, check=None) -> BridgeMetric:
    """Composite metric ``outer ∘ inner``: first ``inner``, then ``outer``.

    ``inner`` lives on ``X ⊔ Y`` and ``outer`` on ``Y ⊔ Z``; the result on
    ``X ⊔ Z`` has ``cross[x][z] = min_y inner[x][y] + outer[y][z]``.
    """
    if not inner.right.same_as(outer.left):
        raise MetricError("middle spaces of the composition differ")
    if inner.exact != outer.exact:
        raise MetricError("cannot compose exact and float metrics")
    out = _bridge(inner.left, outer.right, minplus(inner.cross, outer.cross))
    if DEBUG_CHECKS if check is None else check:
        if not out.is_valid():
            raise AssertionError("composition produced an invalid metric")
    return out


def adjoint(d: BridgeMetric) -> BridgeMetric:
    return d.adjoint()


# ---------------------------------------------------------------------------
# constructors


def unit_metric(space: FiniteSpace) -> DoubleMetric:
    """``I(x, y') = d(x, y) + 1``, the unit class."""
    return DoubleMetric._trusted(space, space, space.dist + ext(1, space.exact))


def subset_metric(space: FiniteSpace, subset: Iterable[int]) -> DoubleMetric:
    """``d_A(x, y') = min_{z in A} d(x, z) + 1 + d(z, y)``."""
    a = sorted(set(subset))
    if not a:
        raise MetricError("subset must be non-empty")
    if a[0] < 0 or a[-1] >= space.n:
        raise MetricError("subset index out of range")
    one = ext(1, space.exact)
    cross = minplus(space.dist[:, a] + one, space.dist[a, :])
    return DoubleMetric._trusted(space, space, cross)


def point_metric(space: FiniteSpace, x0: int) -> DoubleMetric:
    """``e_0(x, y') = d(x, x0) + 1 + d(x0, y)``."""
    if not 0 <= x0 < space.n:
        raise MetricError(f"point {x0} out of range")
    return subset_metric(space, [x0])


def zero_metric(space: FiniteSpace) -> DoubleMetric:
    """All cross distances infinite."""
    c = np.full((space.n, space.n), INF, dtype=object if space.exact else np.float64)
    return DoubleMetric._trusted(space, space, c)


def distortion(space: FiniteSpace, f: Sequence[int]) -> ExtValue:
    """``max |d(x, y) - d(f x, f y)|``; both infinite counts as zero."""
    worst = ext(0, space.exact)
    d = space.dist
    n = space.n
    for x in range(n):
        for y in range(x + 1, n):
            a, b = d[x, y], d[f[x], f[y]]
            if a == INF and b == INF:
                continue
            if a == INF or b == INF:
                return INF
            worst = max(worst, abs(a - b))
    return worst


def almost_isometry_metric(space: FiniteSpace, f: Sequence[int], C=None) -> DoubleMetric:
    """``d^f(x, y') = min_z d(x, z) + C + d(f(z), y)``.

    ``C`` defaults to the distortion of ``f`` floored at 1.
    """
    f = list(f)
    if len(f) != space.n or any(not 0 <= v < space.n for v in f):
        raise MetricError("point map out of range")
    dis = distortion(space, f)
    if dis == INF:
        raise MetricError("map has infinite distortion")
    floor = max(dis, ext(1, space.exact))
    C = floor if C is None else ext(C, space.exact)
    if C < floor:
        raise MetricError(f"C = {C} is below max(distortion, 1) = {floor}")
    cross = minplus(space.dist + C, space.dist[f, :])
    return DoubleMetric._trusted(space, space, cross)


# ---------------------------------------------------------------------------
# quasi-isometry of metrics


@dataclass(frozen=True)
class QIWitness:
    """Constants for ``-alpha + d1/beta <= d2 <= alpha + beta*d1``."""

    alpha: ExtValue = 0
    beta: ExtValue = 1

    def __post_init__(self):
        if self.alpha < 0:
            raise MetricError("alpha must be >= 0")
        if self.beta < 1:
            raise MetricError("beta must be >= 1")


@dataclass(frozen=True)
class QICheck:
    ok: bool
    worst: tuple[int, int] | None
    excess: ExtValue

    def __bool__(self):
        return self.ok


def _same_shape(d1: BridgeMetric, d2: BridgeMetric):
    if d1.shape != d2.shape:
        raise MetricError("metrics live on different spaces")
    if d1.exact != d2.exact:
        raise MetricError("metrics use different numeric modes")


def _violation_amounts(c1, c2, beta):
    """Per finite entry, the least alpha making both bounds hold."""
    lower = c1 / beta - c2
    upper = c2 - beta * c1
    return np.maximum(lower, upper)


def qi_check(d1: BridgeMetric, d2: BridgeMetric, w: QIWitness) -> QICheck:
    """Check ``-alpha + d1/beta <= d2 <= alpha + beta*d1`` on every entry.

    An infinite entry on one side against a finite one on the other fails for
    every witness.
    """
    _same_shape(d1, d2)
    f1, f2 = d1.pattern(), d2.pattern()
    mismatch = np.argwhere(f1 != f2)
    if len(mismatch):
        return QICheck(False, tuple(mismatch[0].tolist()), INF)
    idx = np.argwhere(f1)
    if not len(idx):
        return QICheck(True, None, 0)
    exact = d1.exact
    beta, alpha = ext(w.beta, exact), ext(w.alpha, exact)
    amt = _violation_amounts(d1.cross[f1], d2.cross[f1], beta)
    pos = int(np.argmax(amt))
    excess = amt[pos] - alpha
    worst = tuple(idx[pos].tolist())
    if excess > 0:
        return QICheck(False, worst, excess)
    return QICheck(True, None, 0)


def qi_fit(d1: BridgeMetric, d2: BridgeMetric, beta_grid: Sequence = (1,)):
    """Least alpha per beta in ``beta_grid``, or ``None`` if patterns differ."""
    _same_shape(d1, d2)
    f1 = d1.pattern()
    if not np.array_equal(f1, d2.pattern()):
        return None
    exact = d1.exact
    out = {}
    for b in beta_grid:
        beta = ext(b, exact)
        if beta < 1:
            raise MetricError("beta must be >= 1")
        if f1.any():
            amt = _violation_amounts(d1.cross[f1], d2.cross[f1], beta)
            alpha = max(ext(0, exact), max(amt.tolist()))
        else:
            alpha = ext(0, exact)
        out[b] = alpha
    return out


def criterion_alpha(d: DoubleMetric, beta=1, rows=None) -> ExtValue:
    """Least alpha with ``-alpha + d(x,x')/beta <= d(x,X')`` on ``rows``."""
    beta = ext(beta, d.exact)
    diag = d.diagonal()
    rm = d.rowmin()
    if rows is not None:
        diag, rm = diag[rows], rm[rows]
    best = ext(0, d.exact)
    for a, m in zip(diag.tolist(), rm.tolist()):
        if a == INF and m == INF:
            continue
        best = max(best, a / beta - m)
    return best


def idempotent_criterion(d: DoubleMetric, w: QIWitness) -> bool:
    """Whether ``-alpha + d(x,x')/beta <= d(x,X')`` for every ``x``.

    For a selfadjoint metric this decides whether its class is idempotent.
    """
    if not qi_check(d, d.adjoint(), w).ok:
        raise MetricError("metric is not selfadjoint within the given witness")
    return criterion_alpha(d, w.beta) <= ext(w.alpha, d.exact)


def symmetrize(d: DoubleMetric) -> DoubleMetric:
    """``(d + d*) / 2``, an exactly selfadjoint metric."""
    half = ext(Fraction(1, 2), d.exact)
    return DoubleMetric._trusted(d.space, d.space, (d.cross + d.cross.T) * half)
