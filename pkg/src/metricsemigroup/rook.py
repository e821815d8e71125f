"""Symmetric inverse monoid (rook monoid) built directly from partial maps.

Used as an independent reference for tables produced by metric composition.
"""

from __future__ import annotations

from itertools import combinations, permutations
from math import comb, factorial


def rook_elements(k: int) -> list[tuple[int, ...]]:
    """Partial injections of ``{0..k-1}`` as image tuples, ``-1`` = undefined."""
    out = []
    for size in range(k + 1):
        for dom in combinations(range(k), size):
            for img in permutations(range(k), size):
                f = [-1] * k
                for a, b in zip(dom, img):
                    f[a] = b
                out.append(tuple(f))
    return out


def rook_monoid(k: int):
    """Elements, ``mul[a][b]`` (apply b then a) and ``star`` of the rook monoid."""
    els = rook_elements(k)
    idx = {f: i for i, f in enumerate(els)}

    def after(f, g):
        return tuple(-1 if g[x] < 0 else f[g[x]] for x in range(k))

    def inverse(f):
        h = [-1] * k
        for x, y in enumerate(f):
            if y >= 0:
                h[y] = x
        return tuple(h)

    mul = [[idx[after(f, g)] for g in els] for f in els]
    star = [idx[inverse(f)] for f in els]
    return els, mul, star


def rook_order(k: int) -> int:
    return sum(comb(k, j) ** 2 * factorial(j) for j in range(k + 1))


def table_to_rook(table) -> list[int]:
    """Map each class of a semigroup table to its rook monoid element index.

    A class is read as the partial map sending component ``c`` to the
    component ``c'`` whose block of the pattern is finite.
    """
    space = table.space
    k = space.k
    els = rook_elements(k)
    idx = {f: i for i, f in enumerate(els)}
    comp = space.comp_of
    reps = [c[0] for c in space.components]
    out = []
    for p in table.patterns:
        f = [-1] * k
        for c, r in enumerate(reps):
            hits = {comp[j] for j in range(space.n) if p.bits[r][j]}
            if len(hits) > 1:
                raise ValueError(f"pattern {p.key} is not a partial map")
            if hits:
                f[c] = hits.pop()
        out.append(idx[tuple(f)])
    return out


def is_star_isomorphism(table, phi, mul, star) -> bool:
    """Whether ``phi`` is a bijective *-homomorphism from the table onto (mul, star)."""
    s = table.size
    if sorted(phi) != list(range(len(mul))) or len(phi) != s:
        return False
    for a in range(s):
        if phi[table.star[a]] != star[phi[a]]:
            return False
        row, target = table.mul[a], mul[phi[a]]
        for b in range(s):
            if phi[row[b]] != target[phi[b]]:
                return False
    return True


def rook_block_dims(k: int) -> list[int]:
    """Matrix block sizes of the complex algebra of the rook monoid.

    One block ``C(k, j) * f`` for every ``j`` and every irreducible character
    of the symmetric group ``S_j`` of degree ``f``.
    """
    out = []
    for j in range(k + 1):
        for f in _sym_irrep_dims(j):
            out.append(comb(k, j) * f)
    return sorted(out)


def _partitions(n, largest=None):
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def _sym_irrep_dims(n: int) -> list[int]:
    # hook length formula
    dims = []
    for lam in _partitions(n):
        cols = [sum(1 for r in lam if r > c) for c in range(lam[0])] if lam else []
        hooks = 1
        for i, r in enumerate(lam):
            for c in range(r):
                hooks *= (r - c - 1) + (cols[c] - i - 1) + 1
        dims.append(factorial(n) // hooks)
    return dims
