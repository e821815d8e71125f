"""Finite evidence for statements about metrics on doubles of infinite spaces.

A family produces, for each size ``N``, a finite window of an infinite space
together with a metric on its double.  Entries near the window edge may be
distorted by truncation, so every truncation carries a reliability mask and
an inner window whose entries are trusted.  Quasi-isometry constants are
fitted on trusted entries only and a verdict is read off how they evolve
with ``N``.  The verdicts are heuristics: evidence, not proof.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import extcore
from .extcore import DoubleMetric, FiniteSpace, MetricError

DEFAULT_BETAS = (1, 1.5, 2, 3, 4, 8)
DEFAULT_SIZES = (16, 32, 64, 128, 256)

STABLE = "stable"
DIVERGING = "diverging"
MISMATCH = "pattern-mismatch"
INCONCLUSIVE = "inconclusive"

_TOL = 1e-9


@dataclass
class Truncation:
    """One finite window of a family.

    ``points`` label the window points (shared across sizes, used to match
    entries); ``radius`` is each point's distance from the base point; the
    inner window is ``radius <= inner_fraction * size``.
    """

    size: int
    points: list
    radius: np.ndarray
    metric: DoubleMetric
    reliable: np.ndarray
    inner_fraction: float = 0.5
    marks: np.ndarray | None = None  # subset membership for subset families

    @property
    def space(self) -> FiniteSpace:
        return self.metric.space

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def inner(self) -> np.ndarray:
        return self.radius <= self.inner_fraction * self.size + _TOL

    @property
    def boundary(self) -> np.ndarray:
        return self.radius >= self.radius.max() - _TOL

    def trusted(self) -> np.ndarray:
        inn = self.inner
        return self.reliable & inn[:, None] & inn[None, :]

    def restricted(self) -> DoubleMetric:
        """The metric on the inner window only."""
        idx = np.nonzero(self.inner)[0]
        sub = self.space.subspace(idx.tolist())
        return DoubleMetric._trusted(sub, sub, self.metric.cross[np.ix_(idx, idx)])


@dataclass
class MetricFamily:
    name: str
    generator: Callable[[int], Truncation]
    inner_fraction: float = 0.5
    description: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not 0 < self.inner_fraction <= 1:
            raise ValueError("inner_fraction must lie in (0, 1]")

    def at(self, size: int) -> Truncation:
        if size not in self._cache:
            t = self.generator(size)
            if t.inner_fraction != self.inner_fraction:
                t = replace(t, inner_fraction=self.inner_fraction)
            if extcore.DEBUG_CHECKS:
                extcore.validate_double(t.space, t.metric.cross)
            self._cache[size] = t
        return self._cache[size]

    def with_inner_fraction(self, fraction: float) -> MetricFamily:
        return MetricFamily(self.name, self.generator, fraction, self.description)


# ---------------------------------------------------------------------------
# windows of infinite spaces


@dataclass(frozen=True)
class Window:
    points: list
    coords: np.ndarray
    radius: np.ndarray

    @property
    def n(self) -> int:
        return len(self.points)

    def space(self) -> FiniteSpace:
        return FiniteSpace.from_points(self.coords)


def integer_window(size: int) -> Window:
    """``Z ∩ [-N, N]``."""
    xs = np.arange(-size, size + 1, dtype=np.float64)
    return Window([int(x) for x in xs], xs[:, None], np.abs(xs))


def two_rays_window(size: int) -> Window:
    """Points ``(n, ±n, 0)`` of R^3 for ``1 <= n <= N``."""
    pts, coords = [], []
    for sign in (1, -1):
        for k in range(1, size + 1):
            pts.append((k, sign * k))
            coords.append((k, sign * k, 0.0))
    coords = np.asarray(coords, dtype=np.float64)
    return Window(pts, coords, np.array([float(p[0]) for p in pts]))


def rays_window(size: int, angle_deg: float) -> Window:
    """Unit-spaced samples of two rays in R^2 from the origin (origin shared)."""
    th = math.radians(angle_deg)
    pts, coords = [("o", 0)], [(0.0, 0.0)]
    for which, phi in (("a", 0.0), ("b", th)):
        for k in range(1, size + 1):
            pts.append((which, k))
            coords.append((k * math.cos(phi), k * math.sin(phi)))
    coords = np.asarray(coords, dtype=np.float64)
    return Window(pts, coords, np.hypot(coords[:, 0], coords[:, 1]))


def _closed_form(win: Window, size: int, fn, inner_fraction=0.5, marks=None) -> Truncation:
    """Truncation whose cross matrix is known in closed form, hence fully reliable."""
    cross = np.asarray(fn(win), dtype=np.float64)
    space = win.space()
    metric = DoubleMetric._trusted(space, space, cross)
    return Truncation(
        size, win.points, win.radius, metric, np.ones(cross.shape, dtype=bool), inner_fraction, marks
    )


# ---------------------------------------------------------------------------
# tracked min-plus


def tracked_minplus(a, b, ok_a, ok_b, mid_bad):
    """Min-plus product plus a flag per entry that is True when the minimum is trustworthy.

    An entry is untrusted if some minimizing middle index is flagged in
    ``mid_bad`` (window boundary) or reaches it through an untrusted input.
    """
    n, m = a.shape
    p = b.shape[1]
    out = np.empty((n, p))
    good = np.empty((n, p), dtype=bool)
    step = max(1, (1 << 22) // max(1, m * p))
    for i0 in range(0, n, step):
        i1 = min(n, i0 + step)
        s = a[i0:i1, :, None] + b[None, :, :]
        low = s.min(axis=1)
        scale = np.where(np.isfinite(low), np.maximum(1.0, np.abs(low)), 1.0)
        tie = s <= (low + _TOL * scale)[:, None, :]
        bad = mid_bad[None, :, None] | ~ok_a[i0:i1, :, None] | ~ok_b[None, :, :]
        out[i0:i1] = low
        good[i0:i1] = ~np.any(tie & bad, axis=1)
    return out, good


def _same_window(t1: Truncation, t2: Truncation):
    if t1.points != t2.points:
        raise MetricError("families are defined on incompatible windows")


def windowed_compose(fam_d: MetricFamily, fam_rho: MetricFamily, size: int) -> Truncation:
    """``rho ∘ d`` on the window of size ``size`` (``d`` is applied first).

    Entries whose minimizer lies on the window boundary, or that rely on an
    untrusted input entry, are flagged unreliable.
    """
    td, tr = fam_d.at(size), fam_rho.at(size)
    _same_window(td, tr)
    cross, good = tracked_minplus(
        td.metric.cross, tr.metric.cross, td.reliable, tr.reliable, td.boundary
    )
    metric = DoubleMetric._trusted(td.space, td.space, cross)
    return Truncation(size, td.points, td.radius, metric, good, fam_d.inner_fraction)


def composite(outer: MetricFamily, inner: MetricFamily, name: str | None = None) -> MetricFamily:
    """Family of ``outer ∘ inner``."""
    return MetricFamily(
        name or f"{outer.name}∘{inner.name}",
        lambda size: windowed_compose(inner, outer, size),
        inner.inner_fraction,
    )


def adjoint_family(fam: MetricFamily, name: str | None = None) -> MetricFamily:
    def gen(size):
        t = fam.at(size)
        return replace(t, metric=t.metric.adjoint(), reliable=t.reliable.T.copy())

    return MetricFamily(name or f"{fam.name}*", gen, fam.inner_fraction)


def subset_family(name: str, window: Callable[[int], Window], member, inner_fraction=0.5) -> MetricFamily:
    """``d_A`` with ``A`` given by a predicate on point labels."""

    def gen(size):
        win = window(size)
        marks = np.array([bool(member(p)) for p in win.points])
        if not marks.any():
            raise MetricError(f"subset {name} is empty at size {size}")
        space = win.space()
        a = np.nonzero(marks)[0]
        ok = np.ones((win.n, len(a)), dtype=bool)
        cross, good = tracked_minplus(
            space.dist[:, a] + 1.0, space.dist[a, :], ok, ok.T, (win.radius[a] >= win.radius.max() - _TOL)
        )
        metric = DoubleMetric._trusted(space, space, cross)
        return Truncation(size, win.points, win.radius, metric, good, inner_fraction, marks)

    return MetricFamily(name, gen, inner_fraction)


# ---------------------------------------------------------------------------
# fitting


def classify(alphas: Sequence[float]) -> str:
    """Verdict for a series of fitted constants at increasing sizes.

    Stable: every value stays below ``10 * max(first, 1)`` and the increments
    over the last half do not increase.  Diverging: the threshold is exceeded
    and the values grow strictly over the last half.  Anything else is
    inconclusive.
    """
    al = [float(a) for a in alphas]
    if any(math.isinf(a) for a in al):
        return DIVERGING
    threshold = 10 * max(al[0], 1.0)
    steps = np.diff(al)
    # last half of the increments, but at least two when available
    inc = steps[min(len(steps) // 2, max(0, len(steps) - 2)) :]
    if all(a <= threshold + _TOL for a in al) and all(
        inc[i + 1] <= inc[i] + _TOL for i in range(len(inc) - 1)
    ):
        return STABLE
    if any(a > threshold for a in al) and all(x > _TOL for x in inc):
        return DIVERGING
    return INCONCLUSIVE


def _clean(x: float) -> float:
    return float(f"{x:.12g}")


@dataclass
class FitSeries:
    sizes: list
    beta: float
    alphas: list
    verdict: str
    table: dict = field(default_factory=dict)  # beta -> alphas
    verdicts: dict = field(default_factory=dict)  # beta -> verdict
    mismatch_size: int | None = None
    label: str = ""

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "sizes": self.sizes,
            "beta": self.beta,
            "alphas": self.alphas,
            "verdict": self.verdict,
            "per_beta": {
                str(b): {"alphas": self.table[b], "verdict": self.verdicts[b]} for b in self.table
            },
            "mismatch_size": self.mismatch_size,
            "note": "heuristic verdict from finite windows; evidence, not proof",
        }


def _combine(sizes, table, label, mismatch=None) -> FitSeries:
    if mismatch is not None:
        return FitSeries(list(sizes), float("nan"), [], MISMATCH, {}, {}, mismatch, label)
    verdicts = {b: classify(al) for b, al in table.items()}
    stable = [b for b in table if verdicts[b] == STABLE]
    if stable:
        b = stable[0]
        verdict = STABLE
    else:
        b = min(table, key=lambda x: (table[x][-1], x))
        verdict = DIVERGING if all(v == DIVERGING for v in verdicts.values()) else INCONCLUSIVE
    return FitSeries(list(sizes), b, table[b], verdict, table, verdicts, None, label)


def fit_alphas(c1, c2, mask, beta_grid) -> dict | None:
    """Least ``alpha`` per ``beta`` on masked entries; None if the finite patterns differ."""
    f1, f2 = np.isfinite(c1) & mask, np.isfinite(c2) & mask
    if not np.array_equal(f1, f2):
        return None
    x, y = c1[f1], c2[f1]
    out = {}
    for b in beta_grid:
        if b < 1:
            raise MetricError("beta must be >= 1")
        amt = np.maximum(x / b - y, y - b * x) if len(x) else np.zeros(1)
        out[b] = _clean(max(0.0, float(amt.max())))
    return out


def fit_series(
    f1: MetricFamily,
    f2: MetricFamily,
    sizes: Sequence[int] = DEFAULT_SIZES,
    beta_grid: Sequence = DEFAULT_BETAS,
) -> FitSeries:
    """Fit ``-alpha + d1/beta <= d2 <= alpha + beta*d1`` on trusted entries at each size."""
    table = {b: [] for b in beta_grid}
    label = f"{f1.name} ~ {f2.name}"
    for n in sizes:
        t1, t2 = f1.at(n), f2.at(n)
        _same_window(t1, t2)
        fit = fit_alphas(t1.metric.cross, t2.metric.cross, t1.trusted() & t2.trusted(), beta_grid)
        if fit is None:
            return _combine(sizes, table, label, mismatch=n)
        for b in beta_grid:
            table[b].append(fit[b])
    return _combine(sizes, table, label)


def _tracked_rowmin(t: Truncation):
    c = t.metric.cross
    low = c.min(axis=1)
    scale = np.where(np.isfinite(low), np.maximum(1.0, np.abs(low)), 1.0)
    tie = c <= (low + _TOL * scale)[:, None]
    bad = t.boundary[None, :] | ~t.reliable
    return low, ~np.any(tie & bad, axis=1)


def criterion_series(
    fam: MetricFamily,
    sizes: Sequence[int] = DEFAULT_SIZES,
    beta_grid: Sequence = DEFAULT_BETAS,
    *,
    adjoint_check: FitSeries | None = None,
) -> FitSeries:
    """Least ``alpha`` with ``-alpha + d(x,x')/beta <= d(x,X')`` on trusted rows.

    The family must look selfadjoint (``fit_series`` against its adjoint is
    stable), otherwise :class:`MetricError` is raised.
    """
    sa = adjoint_check or fit_series(fam, adjoint_family(fam), sizes, beta_grid)
    if sa.verdict != STABLE:
        raise MetricError(f"family {fam.name} is not selfadjoint ({sa.verdict})")
    table = {b: [] for b in beta_grid}
    for n in sizes:
        t = fam.at(n)
        diag = np.diagonal(t.metric.cross)
        rm, rm_ok = _tracked_rowmin(t)
        rows = t.inner & rm_ok & np.diagonal(t.reliable) & np.isfinite(diag)
        for b in beta_grid:
            vals = diag[rows] / b - rm[rows]
            table[b].append(_clean(max(0.0, float(vals.max()) if len(vals) else 0.0)))
    return _combine(sizes, table, f"criterion {fam.name}")


# ---------------------------------------------------------------------------
# subsets


@dataclass
class GapSeries:
    sizes: list
    gaps: list
    verdict: str
    fit: FitSeries
    agrees: bool

    def to_json(self) -> dict:
        return {
            "sizes": self.sizes,
            "gaps": self.gaps,
            "verdict": self.verdict,
            "fit": self.fit.to_json(),
            "agrees": self.agrees,
        }


def neighborhood_check(
    fam_a: MetricFamily,
    fam_b: MetricFamily,
    sizes: Sequence[int] = DEFAULT_SIZES,
    beta_grid: Sequence = DEFAULT_BETAS,
) -> GapSeries:
    """Mutual Hausdorff gap of two subsets on the inner window, with a fit cross-check."""
    gaps = []
    for n in sizes:
        ta, tb = fam_a.at(n), fam_b.at(n)
        _same_window(ta, tb)
        if ta.marks is None or tb.marks is None:
            raise MetricError("neighborhood_check needs subset families")
        if not ta.marks.any() or not tb.marks.any():
            raise MetricError("subsets must be non-empty")
        dist = ta.space.dist
        inn = ta.inner
        a_in, b_in = ta.marks & inn, tb.marks & inn
        g = 0.0
        if a_in.any():
            g = max(g, float(dist[np.ix_(a_in, tb.marks)].min(axis=1).max()))
        if b_in.any():
            g = max(g, float(dist[np.ix_(b_in, ta.marks)].min(axis=1).max()))
        gaps.append(_clean(g))
    verdict = classify(gaps)
    fit = fit_series(fam_a, fam_b, sizes, beta_grid)
    agrees = (verdict == STABLE) == (fit.verdict == STABLE)
    return GapSeries(list(sizes), gaps, verdict, fit, agrees)


@dataclass
class SeparationReport:
    angle: float
    beta: float
    sizes: list
    condition: list  # per size: None if (*) holds, else the failing radius
    holds: list  # per size: inequality verdict, None when skipped
    worst_slack: list
    verdict: str

    def to_json(self) -> dict:
        return {
            "angle": self.angle,
            "beta": self.beta,
            "sizes": self.sizes,
            "condition_failure_radius": self.condition,
            "holds": self.holds,
            "worst_slack": self.worst_slack,
            "verdict": self.verdict,
        }


def separation_condition(win: Window, a_mask, b_mask, beta: float) -> float | None:
    """First radius ``R`` on the half-integer grid where ``d(A∖B_R, B∖B_R) > R/beta`` fails."""
    coords = win.coords
    for r in np.arange(0, win.radius.max() + 0.5, 0.5):
        ao = a_mask & (win.radius > r + _TOL)
        bo = b_mask & (win.radius > r + _TOL)
        if not ao.any() or not bo.any():
            break
        diff = coords[ao][:, None, :] - coords[bo][None, :, :]
        sep = float(np.sqrt((diff**2).sum(axis=2)).min())
        if not sep > r / beta + _TOL:
            return float(r)
    return None


def rays_families(angle: float, inner_fraction=0.5):
    """Subset families for the polar axis and the ray at ``angle`` degrees (both contain the origin)."""

    def window(size):
        return rays_window(size, angle)

    fa = subset_family("ray0", window, lambda p: p[0] in ("o", "a"), inner_fraction)
    fb = subset_family(f"ray{angle:g}", window, lambda p: p[0] in ("o", "b"), inner_fraction)
    return fa, fb, window


def separation_check(
    angle: float,
    beta: float = 3,
    sizes: Sequence[int] = (16, 32, 64, 128),
    *,
    same_ray: bool = False,
) -> SeparationReport:
    """Check ``e0(x,x') <= 4*beta*(d_A d_B)(x,x') + 1`` for two rays at ``angle`` degrees.

    The condition ``d(A∖B_R, B∖B_R) > R/beta`` is checked first on every
    window; sizes where it fails are skipped.  ``same_ray`` uses ``A = B``.
    """
    fa, fb, window = rays_families(angle)
    if same_ray:
        fb = fa
    prod = composite(fa, fb, "d_A d_B")
    conds, holds, slack = [], [], []
    for n in sizes:
        win = window(n)
        ta, tb = fa.at(n), fb.at(n)
        fail = separation_condition(win, ta.marks, tb.marks, beta)
        conds.append(fail)
        if fail is not None:
            holds.append(None)
            slack.append(None)
            continue
        t = prod.at(n)
        rows = t.inner & np.diagonal(t.reliable)
        e0 = 2 * win.radius + 1
        diff = (4 * beta * np.diagonal(t.metric.cross) + 1 - e0)[rows]
        worst = float(diff.min())
        slack.append(_clean(worst))
        holds.append(bool(worst >= -_TOL))
    checked = [h for h in holds if h is not None]
    if not checked:
        verdict = "skipped"
    else:
        verdict = "holds" if all(checked) and len(checked) == len(sizes) else (
            "fails" if not all(checked) else "partial"
        )
    return SeparationReport(float(angle), float(beta), list(sizes), conds, holds, slack, verdict)


# ---------------------------------------------------------------------------
# built-in families


def _abs_diff(x):
    return np.abs(x[:, None] - x[None, :])


def _idem(win: Window):
    x = win.coords[:, 0]
    both = (x[:, None] >= 0) & (x[None, :] >= 0)
    return np.where(both, x[:, None] + x[None, :] + 1, _abs_diff(x) + 1)


def _unit(win: Window):
    return win.space().dist + 1.0


def _point(win: Window):
    r = win.radius
    return r[:, None] + r[None, :] + 1


def _partial_iso(win: Window):
    x = win.coords[:, 0]
    ab = (x[:, None] >= 0) & (x[None, :] <= 0)
    return np.where(ab, np.abs(x[:, None] + x[None, :]) + 1, np.abs(x)[:, None] + np.abs(x)[None, :] + 1)


def _two_rays(win: Window):
    # x' = (a, -b, 1) for x = (a, b, 0)
    c = win.coords
    mirror = c * np.array([1.0, -1.0, 0.0]) + np.array([0.0, 0.0, 1.0])
    diff = c[:, None, :] - mirror[None, :, :]
    return np.sqrt((diff**2).sum(axis=2))


def _z_family(name, fn, description):
    return MetricFamily(name, lambda n: _closed_form(integer_window(n), n, fn), description=description)


def builtin_families() -> dict[str, MetricFamily]:
    """Fresh registry of named families (each with its own cache)."""
    reg: dict[str, MetricFamily] = {}

    def add(f: MetricFamily):
        reg[f.name] = f
        return f

    unit = add(_z_family("unit", _unit, "I(x,y') = |x-y| + 1 on Z"))
    idem = add(_z_family("idem", _idem, "x+y+1 if x,y >= 0 else |x-y|+1, on Z"))
    add(_z_family("point", _point, "e0(x,y') = |x| + |y| + 1 on Z"))
    pi = add(_z_family("pi", _partial_iso, "|x+y|+1 if x >= 0 >= y else |x|+|y|+1, on Z"))
    add(
        MetricFamily(
            "two_rays",
            lambda n: _closed_form(two_rays_window(n), n, _two_rays),
            description="rays (n, ±n, 0) in R^3, second copy mirrored to height 1",
        )
    )
    add(subset_family("even", integer_window, lambda p: p % 2 == 0))
    add(subset_family("odd", integer_window, lambda p: p % 2 != 0))
    add(subset_family("nonneg", integer_window, lambda p: p >= 0))
    add(subset_family("nonpos", integer_window, lambda p: p <= 0))
    add(composite(unit, unit, "unit2"))
    add(composite(idem, idem, "idem2"))
    add(composite(adjoint_family(pi), pi, "pi_star_pi"))
    add(composite(pi, adjoint_family(pi), "pi_pi_star"))
    return reg


FAMILY_NAMES = tuple(builtin_families())


def get_family(name: str, registry: dict | None = None) -> MetricFamily:
    reg = registry if registry is not None else builtin_families()
    if name not in reg:
        raise KeyError(f"unknown family {name!r}; known: {', '.join(sorted(reg))}")
    return reg[name]


# ---------------------------------------------------------------------------
# demo


@dataclass
class DemoReport:
    sizes: list
    entries_ok: bool
    star_d: FitSeries
    d_star: FitSeries

    @property
    def ok(self) -> bool:
        return self.entries_ok and self.star_d.verdict == STABLE and self.d_star.verdict == STABLE

    def to_json(self) -> dict:
        return {
            "sizes": self.sizes,
            "entries_ok": self.entries_ok,
            "d_star_d_vs_d_A": self.star_d.to_json(),
            "d_d_star_vs_d_B": self.d_star.to_json(),
            "ok": self.ok,
        }


def partial_isometry_demo(sizes: Sequence[int] = DEFAULT_SIZES, beta_grid=DEFAULT_BETAS) -> DemoReport:
    """``d*d ~ d_A`` and ``dd* ~ d_B`` for the ``pi`` family, ``A = Z>=0``, ``B = Z<=0``."""
    reg = builtin_families()
    sd, ds = reg["pi_star_pi"], reg["pi_pi_star"]
    entries_ok = True
    for n in sizes:
        t = sd.at(n)
        x = np.asarray(t.points, dtype=np.float64)
        both = (x[:, None] >= 0) & (x[None, :] >= 0)
        want = np.where(both, _abs_diff(x) + 2, np.abs(x)[:, None] + np.abs(x)[None, :] + 2)
        m = t.trusted()
        entries_ok &= bool(np.array_equal(t.metric.cross[m], want[m]))
    return DemoReport(
        list(sizes),
        entries_ok,
        fit_series(sd, reg["nonneg"], sizes, beta_grid),
        fit_series(ds, reg["nonpos"], sizes, beta_grid),
    )


# ---------------------------------------------------------------------------
# output


def series_csv(series: FitSeries) -> str:
    """CSV rows ``size,beta,alpha,verdict`` for every beta on the grid."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["size", "beta", "alpha", "verdict"])
    for b, alphas in series.table.items():
        for n, a in zip(series.sizes, alphas):
            w.writerow([n, b, a, series.verdicts[b]])
    return buf.getvalue()


def window_consistency(fam: MetricFamily, size: int) -> list:
    """Trusted entries at ``size`` that differ from the same entries at ``2*size``."""
    small, big = fam.at(size), fam.at(2 * size)
    pos = {p: i for i, p in enumerate(big.points)}
    idx = np.array([pos[p] for p in small.points])
    m = small.trusted()
    sub = big.metric.cross[np.ix_(idx, idx)]
    bad = np.argwhere(m & ~np.isclose(small.metric.cross, sub, rtol=0, atol=1e-9))
    return [(small.points[i], small.points[j]) for i, j in bad.tolist()]
