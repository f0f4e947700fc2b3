"""Parity-graded deformed complexes, over a plain mesh or a product base.

A `GradedStructure` packages the two-term complex

    V_p --D--> V_(1-p) --D--> V_p        (p = parity 0 or 1)

together with masses, traces, Hodge stars, boundary pairings and wedges.  Two
backends share the interface:

* ``plain``: all cochain degrees of one mesh, split by parity; D is the
  ordinary coboundary.  (Deformation field zero.)
* ``product``: the invariant complex of ``base x S^1`` under rotation by a
  field of speed s; an invariant form is a pair (alpha, dt ^ beta) of base
  cochains and D becomes d + s * contraction, mixing the two components.

The deformed coboundary's rational Betti numbers are computed exactly (s is
carried as a Fraction), giving the integer oracle all floating-point harmonic
dimensions are compared against.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from . import whitney
from .betti import rational_rank
from .bundle import OperatorBundle
from .errors import DegreeOutOfRange


@dataclass(frozen=True)
class Slot:
    """One homogeneous component of a graded vector: degree + layout."""

    label: str  # "k<deg>" (plain) | "a<deg>" / "b<deg>" (product components)
    kind: str  # "k" | "a" | "b"
    degree: int  # cochain degree on the carrying complex
    size: int
    start: int
    stop: int

    @property
    def total_degree(self):
        """Degree as a form on the modelled manifold."""
        return self.degree if self.kind in ("k", "a") else self.degree + 1


def _make_slots(specs):
    out, pos = [], 0
    for label, kind, degree, size in specs:
        out.append(Slot(label, kind, degree, size, pos, pos + size))
        pos += size
    return out


class GradedStructure:
    """Graded deformed cochain complex with boundary and pairing operators."""

    def __init__(self, backend, n, slots, bundle, s_exact, L_exact, orient_sign):
        self.backend = backend  # "plain" | "product"
        self.n = n  # dimension of the modelled manifold
        self.slots = slots  # slots[p]: list of Slot
        self.bundle = bundle  # carrying mesh bundle (plain: M, product: base)
        self.s_exact = Fraction(s_exact)
        self.L_exact = Fraction(L_exact)
        self.s = float(self.s_exact)
        self.L = float(self.L_exact)
        self.orient_sign = orient_sign
        self.closed = bundle.complex.is_closed
        self._cache = {}

    # -- construction --------------------------------------------------------

    @classmethod
    def plain(cls, bundle):
        n = bundle.n
        slots = [
            _make_slots(
                [(f"k{k}", "k", k, bundle.complex.num(k))
                 for k in range(n + 1) if k % 2 == p]
            )
            for p in (0, 1)
        ]
        return cls("plain", n, slots, bundle, 0, 1, +1)

    @classmethod
    def product(cls, base_bundle, s_exact, L_exact, orient_sign=1):
        m = base_bundle.n
        slots = []
        for p in (0, 1):
            specs = [
                (f"a{a}", "a", a, base_bundle.complex.num(a))
                for a in range(m + 1) if a % 2 == p
            ] + [
                (f"b{b}", "b", b, base_bundle.complex.num(b))
                for b in range(m + 1) if b % 2 == 1 - p
            ]
            slots.append(_make_slots(specs))
        return cls("product", m + 1, slots, base_bundle, s_exact, L_exact,
                   orient_sign)

    # -- layout ---------------------------------------------------------------

    def dim(self, p):
        return self.slots[p][-1].stop if self.slots[p] else 0

    def slot(self, p, label):
        for s in self.slots[p]:
            if s.label == label:
                return s
        return None

    def split(self, p, vec):
        return {s.label: vec[s.start:s.stop] for s in self.slots[p]}

    def embed(self, p, parts):
        out = np.zeros(self.dim(p))
        for label, v in parts.items():
            s = self.slot(p, label)
            out[s.start:s.stop] = v
        return out

    def _bmat(self, rows, cols, blocks):
        """Assemble a sparse matrix from {(row_label, col_label): block}."""
        grid = [[None] * len(cols) for _ in rows]
        ri = {s.label: i for i, s in enumerate(rows)}
        ci = {s.label: i for i, s in enumerate(cols)}
        for (r, c), b in blocks.items():
            grid[ri[r]][ci[c]] = b
        nrow = rows[-1].stop if rows else 0
        ncol = cols[-1].stop if cols else 0
        if all(b is None for row in grid for b in row):
            return sp.csr_matrix((nrow, ncol))
        # pad missing rows/cols so bmat keeps the layout
        for i, s in enumerate(rows):
            if all(g is None for g in grid[i]):
                grid[i][0] = sp.csr_matrix((s.size, cols[0].size))
        for j, s in enumerate(cols):
            if all(grid[i][j] is None for i in range(len(rows))):
                grid[0][j] = sp.csr_matrix((rows[0].size, s.size))
        return sp.bmat(grid, format="csr")

    # -- deformed coboundary ----------------------------------------------------

    def _d_blocks(self, p):
        """[(row_label, col_label, integer matrix or None=identity, exact scalar)]"""
        out = []
        if self.backend == "plain":
            for s in self.slots[p]:
                if s.degree < self.n:
                    out.append((f"k{s.degree + 1}", s.label,
                                self.bundle.d(s.degree), Fraction(1)))
            return out
        m = self.bundle.n
        for s in self.slots[p]:
            if s.kind == "a":
                if s.degree < m:
                    out.append((f"a{s.degree + 1}", s.label,
                                self.bundle.d(s.degree), Fraction(1)))
            else:
                if self.s_exact != 0:
                    out.append((f"a{s.degree}", s.label, None, self.s_exact))
                if s.degree < m:
                    out.append((f"b{s.degree + 1}", s.label,
                                self.bundle.d(s.degree), Fraction(-1)))
        return out

    def D(self, p):
        """Deformed coboundary V_p -> V_(1-p)."""
        key = ("D", p)
        if key not in self._cache:
            blocks = {}
            for r, c, mat, sc in self._d_blocks(p):
                size = self.slot(p, c).size
                b = sp.identity(size, format="csr") if mat is None else mat
                prev = blocks.get((r, c))
                b = float(sc) * b
                blocks[(r, c)] = b if prev is None else prev + b
            self._cache[key] = self._bmat(self.slots[1 - p], self.slots[p], blocks)
        return self._cache[key]

    def iota(self, p):
        """Contraction part of D (zero for the plain backend)."""
        blocks = {}
        if self.backend == "product" and self.s_exact != 0:
            for s in self.slots[p]:
                if s.kind == "b":
                    blocks[(f"a{s.degree}", s.label)] = self.s * sp.identity(
                        s.size, format="csr"
                    )
        return self._bmat(self.slots[1 - p], self.slots[p], blocks)

    # -- metric operators --------------------------------------------------------

    def M(self, p):
        key = ("M", p)
        if key not in self._cache:
            scale = self.L if self.backend == "product" else 1.0
            mats = [scale * self.bundle.mass(s.degree) for s in self.slots[p]]
            self._cache[key] = (
                sp.block_diag(mats, format="csr") if mats else sp.csr_matrix((0, 0))
            )
        return self._cache[key]

    def S(self, p):
        """Hodge star V_p -> V_((n+p) % 2) as a dense matrix."""
        key = ("S", p)
        if key in self._cache:
            return self._cache[key]
        q = (self.n + p) % 2
        out = np.zeros((self.dim(q), self.dim(p)))
        m = self.bundle.n
        for s in self.slots[p]:
            if self.backend == "plain":
                t = self.slot(q, f"k{self.n - s.degree}")
                out[t.start:t.stop, s.start:s.stop] = self.bundle.star(s.degree)
            elif s.kind == "a":
                t = self.slot(q, f"b{m - s.degree}")
                out[t.start:t.stop, s.start:s.stop] = (
                    (-1.0) ** s.degree * self.bundle.star(s.degree)
                )
            else:
                t = self.slot(q, f"a{m - s.degree}")
                out[t.start:t.stop, s.start:s.stop] = self.bundle.star(s.degree)
        self._cache[key] = out
        return out

    # -- boundary -----------------------------------------------------------------

    @property
    def boundary(self):
        """GradedStructure over the boundary, with the induced orientation."""
        if self.closed:
            return None
        if "boundary" not in self._cache:
            if self.backend == "plain":
                self._cache["boundary"] = GradedStructure.plain(self.bundle.boundary)
            else:
                # vol_M = dt ^ vol_base, so the induced boundary orientation is
                # opposite to the product orientation of (boundary base) x S^1
                self._cache["boundary"] = GradedStructure.product(
                    self.bundle.boundary, self.s_exact, self.L_exact,
                    orient_sign=-self.orient_sign,
                )
        return self._cache["boundary"]

    def T(self, p):
        """Trace V_p(M) -> V_p(boundary)."""
        key = ("T", p)
        if key not in self._cache:
            bd = self.boundary
            blocks = {}
            for s in bd.slots[p]:
                blocks[(s.label, s.label)] = self.bundle.complex.boundary.trace_matrix(
                    s.degree
                )
            self._cache[key] = self._bmat(bd.slots[p], self.slots[p], blocks)
        return self._cache[key]

    def interior(self, p):
        """Indices of V_p entries supported away from the boundary."""
        bd = self.bundle.complex.boundary
        mask = np.ones(self.dim(p), dtype=bool)
        if bd is not None:
            for s in self.slots[p]:
                sub = np.zeros(s.size, dtype=bool)
                sub[bd.interior_indices(s.degree)] = True
                mask[s.start:s.stop] = sub
        return np.nonzero(mask)[0]

    # -- pairings and wedges --------------------------------------------------------

    def pairing(self, p):
        """For closed structures: matrix of int x ^ y, x in V_p, y in V_(n-p)%2."""
        assert self.closed, "wedge pairing needs a closed structure"
        key = ("P", p)
        if key in self._cache:
            return self._cache[key]
        q = (self.n - p) % 2
        nu = self.n
        blocks = {}

        def add(r, c, mat):
            blocks[(r, c)] = blocks.get((r, c), 0) + mat

        if self.backend == "plain":
            for s in self.slots[p]:
                add(s.label, f"k{nu - s.degree}", self.bundle.wedge(s.degree))
        else:
            m = self.bundle.n
            sgn = self.orient_sign * self.L
            for s in self.slots[p]:
                if s.kind == "b" and self.slot(q, f"a{m - s.degree}") is not None:
                    add(s.label, f"a{m - s.degree}",
                        sgn * self.bundle.wedge(s.degree))
                if s.kind == "a" and self.slot(q, f"b{m - s.degree}") is not None:
                    add(s.label, f"b{m - s.degree}",
                        sgn * (-1.0) ** s.degree * self.bundle.wedge(s.degree))
        rows = self.slots[p]
        cols = self.slots[q]
        grid = {(r, c): (m_.tocsr() if hasattr(m_, "tocsr") else m_)
                for (r, c), m_ in blocks.items()}
        self._cache[key] = self._bmat(rows, cols, grid)
        return self._cache[key]

    def B(self, p):
        """Boundary pairing: x in V_p(bd), y in V_((n-1-p)%2)(bd), int_bd x ^ y."""
        return self.boundary.pairing(p)

    def trace_star(self, p):
        """Matrix of omega -> trace(star omega), V_p(M) -> V_((n+p)%2)(bd)."""
        key = ("TS", p)
        if key not in self._cache:
            q = (self.n + p) % 2
            self._cache[key] = self.T(q) @ self.S(p)
        return self._cache[key]

    def wedge(self, p, x, q, y):
        """Graded cochain wedge (de Rham): V_p x V_q -> V_((p+q)%2)."""
        r = (p + q) % 2
        xs, ys = self.split(p, x), self.split(q, y)
        parts = {s.label: np.zeros(s.size) for s in self.slots[r]}
        cx = self.bundle.complex
        if self.backend == "plain":
            for sa in self.slots[p]:
                for sb in self.slots[q]:
                    deg = sa.degree + sb.degree
                    if deg <= self.n:
                        parts[f"k{deg}"] += whitney.derham_wedge(
                            cx, sa.degree, sb.degree, xs[sa.label], ys[sb.label]
                        )
            return self.embed(r, parts)
        m = self.bundle.n
        for sa in self.slots[p]:
            for sb in self.slots[q]:
                deg = sa.degree + sb.degree
                if deg > m:
                    continue
                w = whitney.derham_wedge(cx, sa.degree, sb.degree,
                                         xs[sa.label], ys[sb.label])
                if sa.kind == "a" and sb.kind == "a":
                    parts[f"a{deg}"] += w
                elif sa.kind == "b" and sb.kind == "a":
                    parts[f"b{deg}"] += w
                elif sa.kind == "a" and sb.kind == "b":
                    parts[f"b{deg}"] += (-1.0) ** sa.degree * w
                # dt ^ dt component vanishes
        return self.embed(r, parts)

    def integral(self, x):
        """Integral over the modelled manifold of a top-parity graded cochain."""
        p = self.n % 2
        xs = self.split(p, x)
        if self.backend == "plain":
            return self.bundle.integral(xs[f"k{self.n}"])
        return self.orient_sign * self.L * self.bundle.integral(
            xs[f"b{self.bundle.n}"]
        )

    # -- derived operators -------------------------------------------------------

    def delta(self, p, flavor="neumann"):
        """Deformed codifferential V_p -> V_(1-p) (dense)."""
        key = ("delta", p, flavor)
        if key in self._cache:
            return self._cache[key]
        import scipy.sparse.linalg as spla

        rhs = (self.D(1 - p).T @ self.M(p)).toarray()
        if flavor == "full" and not self.closed:
            q = (self.n + p) % 2
            rhs = rhs - (self.T(1 - p).T @ (self.B(1 - p) @ self.trace_star(p)))
        elif flavor == "dirichlet" and not self.closed:
            ii = self.interior(1 - p)
            mask = np.zeros(self.dim(1 - p), dtype=bool)
            mask[ii] = True
            rhs = np.where(mask[:, None], rhs, 0.0)
            out = np.zeros_like(rhs)
            Mi = self.M(1 - p)[np.ix_(ii, ii)].toarray()
            out[ii] = np.linalg.solve(Mi, rhs[ii])
            self._cache[key] = out
            return out
        solve = spla.factorized(sp.csc_matrix(self.M(1 - p)))
        out = np.column_stack([solve(c) for c in rhs.T])
        self._cache[key] = out
        return out

    def green_residual(self, p, alpha, beta):
        """<D a, b> - <a, delta_full b> - int_bd tr(a) ^ tr(star b).

        alpha in V_(1-p), beta in V_p.
        """
        lhs = (self.D(1 - p) @ alpha) @ (self.M(p) @ beta)
        mid = alpha @ (self.M(1 - p) @ (self.delta(p, "full") @ beta))
        if self.closed:
            return lhs - mid
        bnd = (self.T(1 - p) @ alpha) @ (self.B(1 - p) @ (self.trace_star(p) @ beta))
        return lhs - mid - bnd

    def stokes_residual(self, p, x, y):
        """int D(x ^ y) - int_bd tr x ^ tr y with y of parity (n-1-p) % 2."""
        q = (self.n - 1 - p) % 2
        total = self.integral(self.wedge(1 - p, self.D(p) @ x, q, y))
        total += (-1.0) ** p * self.integral(self.wedge(p, x, 1 - q, self.D(q) @ y))
        if self.closed:
            return total
        bd = self.boundary
        bnd = bd.integral(bd.wedge(p, self.T(p) @ x, q, self.T(q) @ y))
        return total - bnd

    # -- exact rational Betti oracle ------------------------------------------------

    def _rational_rows(self, p, interior_only=False):
        """D(p) as exact rational rows, optionally Dirichlet-restricted."""
        row_off = {s.label: s.start for s in self.slots[1 - p]}
        col_off = {s.label: s.start for s in self.slots[p]}
        rows = [dict() for _ in range(self.dim(1 - p))]
        for r, c, mat, sc in self._d_blocks(p):
            ro, co = row_off[r], col_off[c]
            if mat is None:
                size = self.slot(p, c).size
                for i in range(size):
                    rows[ro + i][co + i] = rows[ro + i].get(co + i, Fraction(0)) + sc
            else:
                coo = sp.coo_matrix(mat)
                for i, j, v in zip(coo.row, coo.col, coo.data):
                    key = co + int(j)
                    val = rows[ro + int(i)].get(key, Fraction(0)) + sc * int(round(v))
                    rows[ro + int(i)][key] = val
        if interior_only:
            rmask = np.zeros(self.dim(1 - p), dtype=bool)
            rmask[self.interior(1 - p)] = True
            cmap = {int(j): k for k, j in enumerate(self.interior(p))}
            rows = [
                {cmap[c]: v for c, v in row.items() if c in cmap}
                for keep, row in zip(rmask, rows) if keep
            ]
        rows = [{c: v for c, v in row.items() if v} for row in rows]
        return [row for row in rows if row]

    def exact_betti(self, p, relative=False):
        """Exact dimension of the (relative) deformed cohomology in parity p."""
        key = ("betti", p, relative)
        if key in self._cache:
            return self._cache[key]
        if relative and not self.closed:
            dim_p = len(self.interior(p))
            r_out = rational_rank(self._rational_rows(p, True), dim_p)
            r_in = rational_rank(
                self._rational_rows(1 - p, True), len(self.interior(1 - p))
            )
        else:
            dim_p = self.dim(p)
            r_out = rational_rank(self._rational_rows(p), dim_p)
            r_in = rational_rank(self._rational_rows(1 - p), self.dim(1 - p))
        self._cache[key] = dim_p - r_out - r_in
        return self._cache[key]


def build_structure(complex_or_bundle, field=None):
    """GradedStructure for a mesh and a field spec (zero field if None)."""
    bundle = (
        complex_or_bundle
        if isinstance(complex_or_bundle, OperatorBundle)
        else OperatorBundle(complex_or_bundle)
    )
    if field is None or field.kind == "zero":
        return GradedStructure.plain(bundle)
    return GradedStructure.product(bundle, field.s, field.L)
