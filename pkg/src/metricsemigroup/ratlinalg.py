"""Sparse exact linear algebra over the rationals.

Vectors are dicts ``{column: Fraction}`` with no zero entries.
"""

from __future__ import annotations

import heapq
from fractions import Fraction


def axpy(y: dict, a, x: dict) -> None:
    """In place ``y += a * x``."""
    for k, v in x.items():
        nv = y.get(k, 0) + a * v
        if nv:
            y[k] = nv
        else:
            y.pop(k, None)


def scaled(x: dict, a) -> dict:
    if not a:
        return {}
    return {k: a * v for k, v in x.items()}


class Echelon:
    """Incremental row echelon form with optional tracking of combinations.

    Every stored row has its pivot at its smallest column and pivot value 1.
    With ``track=True`` each row also records which inserted vectors it is a
    combination of, so that :meth:`express` can write a vector in terms of the
    independent vectors inserted so far.
    """

    def __init__(self, track: bool = False):
        self.rows: dict[int, dict] = {}
        self.combos: dict[int, dict] = {}
        self.track = track
        self.count = 0  # number of independent vectors inserted

    def __len__(self):
        return len(self.rows)

    def _reduce(self, v: dict, combo: dict | None):
        v = dict(v)
        heap = [k for k in v if k in self.rows]
        heapq.heapify(heap)
        while heap:
            p = heapq.heappop(heap)
            c = v.get(p)
            if not c:
                continue
            row = self.rows[p]
            axpy(v, -c, row)
            if combo is not None:
                axpy(combo, -c, self.combos[p])
            for k in row:
                if k > p and k in self.rows and k in v:
                    heapq.heappush(heap, k)
        return v

    def insert(self, v: dict) -> bool:
        """Add ``v``; return whether it was independent of earlier vectors."""
        combo = {self.count: Fraction(1)} if self.track else None
        r = self._reduce(v, combo)
        if not r:
            return False
        p = min(r)
        inv = 1 / Fraction(r[p])
        self.rows[p] = scaled(r, inv)
        if self.track:
            self.combos[p] = scaled(combo, inv)
        self.count += 1
        return True

    def reduce(self, v: dict) -> dict:
        return self._reduce(v, None)

    def contains(self, v: dict) -> bool:
        return not self._reduce(v, None)

    def express(self, v: dict) -> dict | None:
        """Coefficients of ``v`` over the independent inserted vectors, or None."""
        if not self.track:
            raise ValueError("express needs track=True")
        combo: dict = {}
        r = self._reduce(v, combo)
        if r:
            return None
        return scaled(combo, -1)


def rank(vectors) -> int:
    e = Echelon()
    for v in vectors:
        e.insert(v)
    return len(e)


def nullspace(rows, ncols: int) -> list[dict]:
    """Basis of ``{x : row . x = 0 for every row}`` in ``Q^ncols``."""
    e = Echelon()
    for r in rows:
        if r:
            e.insert(r)
    # back-substitute to reduced row echelon form
    pivots = sorted(e.rows, reverse=True)
    for p in pivots:
        row = e.rows[p]
        for q in [k for k in row if k != p and k in e.rows]:
            axpy(row, -row[q], e.rows[q])
    free = [c for c in range(ncols) if c not in e.rows]
    basis = []
    for f in free:
        x = {f: Fraction(1)}
        for p, row in e.rows.items():
            c = row.get(f)
            if c:
                x[p] = -c
        basis.append(x)
    return basis
