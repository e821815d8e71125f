"""Left regular representation of a finite M(X) and its matrix-block decomposition.

``lambda(a)`` sends the basis vector of ``b`` to that of ``ab`` when ``b`` lies
in the domain ``V_a = {b : b b* ⪯ a* a}`` and to zero otherwise.  All the
generated matrices are partial permutation matrices, so the algebra they span
is handled through exact rational linear algebra on their index maps.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

import numpy as np
import sympy

from .ratlinalg import Echelon, axpy, nullspace
from .semigroup import SemigroupTable, natural_order


class DecompositionError(RuntimeError):
    """The algebra could not be split into blocks over the rationals."""


@dataclass
class RegularRep:
    dim: int
    lam: dict  # element id -> dim x dim 0/1 integer matrix

    def matrix(self, a: int) -> np.ndarray:
        return self.lam[a]


@dataclass
class AlgebraSummary:
    algebra_dim: int
    center_dim: int
    block_dims: list
    generators: int
    violations: list = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "algebra_dim": self.algebra_dim,
            "center_dim": self.center_dim,
            "block_dims": self.block_dims,
            "generators": self.generators,
            "verified": self.verified,
        }


def domain_set(t: SemigroupTable, a: int) -> frozenset:
    """``V_a``; also asserts that ``b ↦ ab`` is injective on it."""
    src = t.mul[t.star[a]][a]
    dom = frozenset(
        b for b in range(t.size) if natural_order(t, t.mul[b][t.star[b]], src)
    )
    images = {t.mul[a][b] for b in dom}
    if len(images) != len(dom):
        raise AssertionError(f"left multiplication by {a} is not injective on V_a")
    return dom


def _image_maps(t: SemigroupTable) -> np.ndarray:
    """``img[a][b] = ab`` if ``b`` is in ``V_a`` else ``-1``."""
    mul = np.asarray(t.mul)
    star = np.asarray(t.star)
    ar = np.arange(t.size)
    src = mul[star, ar]  # a* a
    proj = mul[ar, star]  # b b*
    inside = mul[src[:, None], proj[None, :]] == proj[None, :]
    img = np.where(inside, mul, -1)
    for a in range(t.size):
        hit = img[a][img[a] >= 0]
        if len(np.unique(hit)) != len(hit):
            raise AssertionError(f"left multiplication by {a} is not injective on V_a")
    return img


def _map_matrix(img) -> np.ndarray:
    n = len(img)
    m = np.zeros((n, n), dtype=np.int64)
    cols = np.nonzero(np.asarray(img) >= 0)[0]
    m[np.asarray(img)[cols], cols] = 1
    return m


def build_rep(t: SemigroupTable) -> RegularRep:
    img = _image_maps(t)
    rep = RegularRep(t.size, {a: _map_matrix(img[a]) for a in range(t.size)})
    problems = rep_violations(rep, t)
    if problems:
        raise AssertionError("; ".join(problems[:3]))
    return rep


def _is_partial_perm(m: np.ndarray) -> bool:
    return not (
        np.any(m.sum(axis=0) > 1) or np.any(m.sum(axis=1) > 1) or np.any((m != 0) & (m != 1))
    )


def rep_violations(rep: RegularRep, t: SemigroupTable | None = None) -> list[str]:
    """Representation invariants that fail (partial isometries, multiplicativity)."""
    out = []
    for a, m in rep.lam.items():
        if not _is_partial_perm(m):
            out.append(f"lambda({a}) is not a partial permutation matrix")
            continue
        f = m.astype(np.float64)
        if not np.array_equal(f @ f.T @ f, f):
            out.append(f"lambda({a}) is not a partial isometry")
    if t is None or out:
        return out
    # lambda(a) lambda(b) delta_c must be delta_{abc} or 0
    s = rep.dim
    img = np.full((s, s + 1), -1)
    for a, m in rep.lam.items():
        img[a, :s] = _as_map(m)
    mul = np.asarray(t.mul)
    both = img[:, img[:, :s]]  # both[a, b, c] = image of c under lambda(a)lambda(b)
    expect = mul[mul]  # expect[a, b, c] = (ab)c
    bad = np.argwhere((both >= 0) & (both != expect))
    for a, b, c in bad[:5].tolist():
        out.append(f"lambda({a})lambda({b}) sends {c} outside {{abc, 0}}")
    return out


def orthogonality_check(rep: RegularRep, t: SemigroupTable, e: int, f: int) -> bool:
    """Whether ``(lambda(e) - lambda(0)) (lambda(f) - lambda(0)) = 0``."""
    z = rep.lam[t.zero]
    return not np.any((rep.lam[e] - z) @ (rep.lam[f] - z))


# ---------------------------------------------------------------------------
# the generated algebra


def _as_map(m: np.ndarray) -> tuple:
    """Partial permutation matrix -> image of each column (-1 if zero)."""
    if not _is_partial_perm(m):
        raise DecompositionError("generators must be partial permutation matrices")
    img = [-1] * m.shape[1]
    for r, c in zip(*np.nonzero(m)):
        img[int(c)] = int(r)
    return tuple(img)


def _times(f: tuple, g: tuple) -> tuple:
    """Index map of the matrix product ``F G``."""
    return tuple(-1 if j < 0 else f[j] for j in g)


def _transpose(f: tuple) -> tuple:
    h = [-1] * len(f)
    for c, r in enumerate(f):
        if r >= 0:
            h[r] = c
    return tuple(h)


def _vector(f: tuple, dim: int) -> dict:
    return {r * dim + c: Fraction(1) for c, r in enumerate(f) if r >= 0}


@dataclass
class AlgebraBasis:
    """Span of all products of the generators.

    ``monomials`` is the multiplicative closure (as index maps); ``basis``
    indexes a maximal independent subset; ``coords`` gives every monomial's
    coordinates over that basis.
    """

    dim: int
    generators: int
    monomials: list
    basis: list
    coords: dict
    star_closed: bool

    @property
    def size(self) -> int:
        return len(self.basis)

    def product(self, i: int, j: int) -> dict:
        """Coordinates of ``basis[i] @ basis[j]``."""
        return self.coords[_times(self.monomials[self.basis[i]], self.monomials[self.basis[j]])]

    def matrix(self, x: dict) -> np.ndarray:
        m = np.zeros((self.dim, self.dim), dtype=object)
        m[:] = Fraction(0)
        for i, c in x.items():
            for col, row in enumerate(self.monomials[self.basis[i]]):
                if row >= 0:
                    m[row, col] += c
        return m


def algebra_closure(rep: RegularRep) -> AlgebraBasis:
    gens = [_as_map(rep.lam[a]) for a in sorted(rep.lam)]
    zero = (-1,) * rep.dim
    seen = {g for g in gens if g != zero}
    frontier = list(seen)
    while frontier:
        nxt = []
        for f in frontier:
            for g in gens:
                for h in (_times(f, g), _times(g, f)):
                    if h != zero and h not in seen:
                        seen.add(h)
                        nxt.append(h)
        frontier = nxt
    monomials = sorted(seen)
    ech = Echelon(track=True)
    basis = []
    for i, f in enumerate(monomials):
        if ech.insert(_vector(f, rep.dim)):
            basis.append(i)
    coords = {}
    for f in monomials:
        c = ech.express(_vector(f, rep.dim))
        coords[f] = c
    coords[zero] = {}
    star_closed = all(_transpose(f) in seen for f in monomials)
    return AlgebraBasis(rep.dim, len(gens), monomials, basis, coords, star_closed)


def _multiply(alg: AlgebraBasis, x: dict, y: dict) -> dict:
    out: dict = {}
    for i, a in x.items():
        for j, b in y.items():
            axpy(out, a * b, alg.product(i, j))
    return out


def _center(alg: AlgebraBasis) -> list[dict]:
    m = alg.size
    rows: dict = {}
    for i in range(m):
        for j in range(m):
            for k, v in alg.product(i, j).items():
                r = rows.setdefault((j, k), {})
                axpy(r, v, {i: Fraction(1)})
            for k, v in alg.product(j, i).items():
                r = rows.setdefault((j, k), {})
                axpy(r, -v, {i: Fraction(1)})
    # duplicates are common; short rows first keeps the elimination sparse
    distinct = {frozenset(r.items()) for r in rows.values() if r}
    ordered = sorted((dict(r) for r in distinct), key=lambda r: (len(r), sorted(r)))
    return nullspace(ordered, m)


def _identity_coords(alg: AlgebraBasis) -> dict:
    ident = tuple(range(alg.dim))
    if ident in alg.coords:
        return alg.coords[ident]
    ech = Echelon(track=True)
    for i in alg.basis:
        ech.insert(_vector(alg.monomials[i], alg.dim))
    c = ech.express(_vector(ident, alg.dim))
    if c is None:
        raise DecompositionError("identity matrix is not in the generated algebra")
    return c


def _poly_at(coeffs: list, mat: sympy.Matrix, vec: sympy.Matrix) -> sympy.Matrix:
    """``p(mat) @ vec`` with ``coeffs`` highest degree first."""
    out = sympy.zeros(vec.rows, 1)
    for c in coeffs:
        out = mat * out + c * vec
    return out


def decompose(rep: RegularRep, *, seed: int = 0, retries: int = 8) -> AlgebraSummary:
    """Dimension, center dimension and matrix block sizes of the generated algebra.

    A random integer combination ``z`` of a center basis acts on the center
    with rational eigenvalues; its spectral idempotents ``e_i`` are the
    central idempotents and ``dim(e_i A) = n_i^2``.  Repeated or irrational
    eigenvalues trigger a retry with new coefficients.
    """
    alg = algebra_closure(rep)
    center = _center(alg)
    c = len(center)
    violations = []
    if not alg.star_closed:
        violations.append("generated algebra is not closed under transpose")

    cech = Echelon(track=True)
    for v in center:
        cech.insert(v)
    one = cech.express(_identity_coords(alg))
    if one is None:
        raise DecompositionError("unit is not central")
    one_vec = sympy.Matrix([one.get(i, 0) for i in range(c)])

    rng = random.Random(seed)
    t = sympy.Symbol("t")
    for attempt in range(retries):
        coeffs = [rng.randint(-10 * (attempt + 1), 10 * (attempt + 1)) for _ in range(c)]
        z: dict = {}
        for a, v in zip(coeffs, center):
            axpy(z, Fraction(a), v)
        cols = []
        for v in center:
            w = cech.express(_multiply(alg, z, v))
            if w is None:
                raise DecompositionError("center is not closed under products")
            cols.append([w.get(i, 0) for i in range(c)])
        lz = sympy.Matrix(c, c, lambda i, j: cols[j][i])
        charpoly = lz.charpoly(t).as_expr()
        _, factors = sympy.factor_list(charpoly, t)
        linear = all(sympy.degree(f, t) == 1 for f, _ in factors)
        distinct = all(mult == 1 for _, mult in factors)
        if linear and distinct:
            break
    else:
        if not linear:
            raise DecompositionError("central element has irrational eigenvalues")
        violations.append("no central element with distinct eigenvalues found")

    blocks = []
    chi = sympy.Poly(charpoly, t, domain="QQ")
    for f, mult in factors:
        part = sympy.Poly(f, t, domain="QQ") ** mult
        rest = sympy.exquo(chi, part)
        s_, _, g = sympy.gcdex(rest, part)  # s_ * rest + ... = g = 1
        idem = sympy.rem(s_ * rest, chi)
        ecoords = _poly_at(idem.all_coeffs(), lz, one_vec)
        e = {}
        for i in range(c):
            if ecoords[i] != 0:
                axpy(e, Fraction(int(ecoords[i].p), int(ecoords[i].q)), center[i])
        # dim(e A) as the trace of the idempotent operator x -> e x
        tr = Fraction(0)
        for i, a in e.items():
            for j in range(alg.size):
                tr += a * alg.product(i, j).get(j, 0)
        size = int(tr)
        root = isqrt(size)
        if tr != size or root * root != size:
            violations.append(f"block of dimension {tr} is not a full matrix algebra")
            blocks.append(size)
        else:
            blocks.append(root)
    blocks.sort()
    if sum(b * b for b in blocks) != alg.size:
        violations.append(
            f"sum of squared block sizes {sum(b * b for b in blocks)} != algebra dimension {alg.size}"
        )
    if len(blocks) != c:
        violations.append(f"{len(blocks)} blocks but center has dimension {c}")
    return AlgebraSummary(alg.size, c, blocks, alg.generators, violations)
