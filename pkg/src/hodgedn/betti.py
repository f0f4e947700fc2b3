"""Exact Betti numbers via rational Gaussian elimination on incidence matrices.

Everything here works over Q with `fractions.Fraction`, so the reported ranks
are exact integers independent of floating-point tolerances.  This module is
the ground truth that the floating-point harmonic-space dimensions are checked
against.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp


def rational_rank(rows, ncols):
    """Exact rank of a sparse rational matrix given as [{col: Fraction}]."""
    active = [dict(r) for r in rows if r]
    rank = 0
    while active:
        # pick the sparsest row, and inside it prefer a +-1 pivot
        active.sort(key=len)
        row = active.pop(0)
        piv = None
        for c, v in row.items():
            if abs(v) == 1:
                piv = c
                break
        if piv is None:
            piv = next(iter(row))
        pval = row[piv]
        rank += 1
        nxt = []
        for other in active:
            if piv in other:
                f = other[piv] / pval
                merged = dict(other)
                del merged[piv]
                for c, v in row.items():
                    if c == piv:
                        continue
                    w = merged.get(c, Fraction(0)) - f * v
                    if w:
                        merged[c] = w
                    elif c in merged:
                        del merged[c]
                if merged:
                    nxt.append(merged)
            else:
                nxt.append(other)
        active = nxt
    return rank


def _as_rational_rows(matrix):
    coo = sp.coo_matrix(matrix)
    rows = [{} for _ in range(coo.shape[0])]
    for r, c, v in zip(coo.row, coo.col, coo.data):
        iv = int(round(v))
        assert iv == v, "incidence matrix entries must be integers"
        if iv:
            rows[r][int(c)] = Fraction(iv)
    return rows


def sparse_rank(matrix):
    """Exact rank of an integer scipy sparse/dense matrix."""
    return rational_rank(_as_rational_rows(matrix), matrix.shape[1])


def _betti_from_coboundaries(dims, coboundaries):
    """Betti numbers of a cochain complex from exact coboundary ranks."""
    n = len(dims) - 1
    ranks = [sparse_rank(coboundaries[k]) if dims[k] and dims[k + 1] else 0
             for k in range(n)]
    out = []
    for k in range(n + 1):
        r_in = ranks[k - 1] if k > 0 else 0
        r_out = ranks[k] if k < n else 0
        out.append(dims[k] - r_in - r_out)
    return out


@dataclass(frozen=True)
class BettiTable:
    """Exact Betti numbers: absolute, relative to boundary, and of the boundary."""

    absolute: tuple
    relative: tuple
    boundary: tuple | None

    @property
    def euler(self):
        return sum((-1) ** k * b for k, b in enumerate(self.absolute))


def betti_table(complex_):
    """Exact absolute/relative/boundary Betti numbers of a triangulated manifold."""
    n = complex_.dim
    dims = [complex_.num(k) for k in range(n + 1)]
    cobs = [complex_.d(k) for k in range(n)]
    absolute = tuple(_betti_from_coboundaries(dims, cobs))

    if complex_.is_closed:
        return BettiTable(absolute, absolute, None)

    bd = complex_.boundary
    interior = [bd.interior_indices(k) for k in range(n + 1)]
    rel_dims = [len(ix) for ix in interior]
    rel_cobs = [
        cobs[k][np.ix_(interior[k + 1], interior[k])]
        if rel_dims[k] and rel_dims[k + 1]
        else sp.csr_matrix((rel_dims[k + 1], rel_dims[k]))
        for k in range(n)
    ]
    relative = tuple(_betti_from_coboundaries(rel_dims, rel_cobs))

    bdims = [bd.complex.num(k) for k in range(n)]
    bcobs = [bd.complex.d(k) for k in range(n - 1)]
    boundary = tuple(_betti_from_coboundaries(bdims, bcobs))
    return BettiTable(absolute, relative, boundary)


EXPECTED = {
    "interval": BettiTable((1, 0), (0, 1), (2,)),
    "square": BettiTable((1, 0, 0), (0, 0, 1), (1, 1)),
    "disk": BettiTable((1, 0, 0), (0, 0, 1), (1, 1)),
    "annulus": BettiTable((1, 1, 0), (0, 1, 1), (2, 2)),
    "solid_torus": BettiTable((1, 1, 0, 0), (0, 0, 1, 1), (1, 2, 1)),
    "ball": BettiTable((1, 0, 0, 0), (0, 0, 0, 1), (1, 0, 1)),
}
