"""Per-mesh operator bundle: coboundaries, mass, wedge pairings, Hodge star.

Conventions
-----------
* ``wedge(k)[i, j] = int_M w_i^k ^ w_j^(n-k)`` over the oriented mesh.
* ``star(k)`` maps k-cochains to (n-k)-cochains via the weak definition
  ``<star a, g>_(n-k) = int_M W a ^ W g``, the discrete version of the
  pointwise identity ``<*a, g> vol = a ^ g``.
* The exact integration-by-parts identity satisfied by Whitney forms is

      <d a, W-pair b> + (-1)^k <a, W-pair d b> = boundary W-pair of traces

  and ``codifferential(k, "full")`` is built so that the Green residual
  ``<da, b> - <a, delta b> - int_bd tr(a) ^ tr(star b)`` vanishes to roundoff.
"""

import numpy as np
import scipy.io
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import whitney
from .errors import DegreeOutOfRange


class OperatorBundle:
    """All discrete operators attached to one simplicial complex."""

    def __init__(self, complex_):
        self.complex = complex_
        self.n = complex_.dim
        self._geoms = whitney.element_geometries(complex_)
        self._mass = {}
        self._wedge = {}
        self._star = {}
        self._mass_solve = {}
        self._boundary_bundle = None

    # -- basic operators ----------------------------------------------------

    def _check_degree(self, k, top=None):
        top = self.n if top is None else top
        if not 0 <= k <= top:
            raise DegreeOutOfRange(f"degree {k} outside [0, {top}]")

    def d(self, k):
        self._check_degree(k, self.n - 1)
        return self.complex.d(k)

    def mass(self, k):
        self._check_degree(k)
        if k not in self._mass:
            self._mass[k] = whitney.assemble_mass(self.complex, k, self._geoms)
        return self._mass[k]

    def mass_solve(self, k, rhs):
        if k not in self._mass_solve:
            self._mass_solve[k] = spla.factorized(sp.csc_matrix(self.mass(k)))
        rhs = np.asarray(rhs)
        if rhs.ndim == 1:
            return self._mass_solve[k](rhs)
        return np.column_stack([self._mass_solve[k](c) for c in rhs.T])

    def wedge(self, k):
        self._check_degree(k)
        if k not in self._wedge:
            self._wedge[k] = whitney.assemble_wedge_pairing(
                self.complex, k, self._geoms
            )
        return self._wedge[k]

    def star(self, k):
        self._check_degree(k)
        if k not in self._star:
            self._star[k] = self.mass_solve(self.n - k, self.wedge(k).T.toarray())
        return self._star[k]

    def integral(self, top_cochain):
        """Integral over the mesh of the Whitney form of a top-degree cochain."""
        ones = np.ones(self.complex.num(0))
        return float(ones @ (self.wedge(0) @ top_cochain))

    # -- boundary -----------------------------------------------------------

    @property
    def boundary(self):
        """OperatorBundle of the boundary complex, or None if closed."""
        if self.complex.is_closed:
            return None
        if self._boundary_bundle is None:
            self._boundary_bundle = OperatorBundle(self.complex.boundary.complex)
        return self._boundary_bundle

    def trace(self, k):
        self._check_degree(k, self.n - 1)
        return self.complex.boundary.trace_matrix(k)

    def trace_star(self, k, values):
        """Boundary trace of the star: i*(star omega) as an (n-k)-cochain on bd."""
        return self.trace(self.n - k) @ (self.star(k) @ values)

    def boundary_wedge(self, k):
        """Pairing int_bd w^k ^ w^(n-1-k) on the induced-oriented boundary."""
        return self.boundary.wedge(k)

    # -- derived operators ----------------------------------------------------

    def codifferential(self, k, flavor="full"):
        """Discrete codifferential C^k -> C^(k-1).

        * "neumann": mass adjoint of d; pairs against all cochains, which
          imposes the natural boundary condition weakly.
        * "full": mass adjoint corrected by the boundary pairing of traces, so
          the Green identity holds exactly for every pair of cochains.
        * "dirichlet": adjoint of d on the subcomplex of boundary-vanishing
          cochains, extended by zero.
        """
        self._check_degree(k)
        if k == 0:
            raise DegreeOutOfRange("codifferential needs degree >= 1")
        dT_M = self.d(k - 1).T @ self.mass(k)
        if flavor == "neumann":
            return self.mass_solve(k - 1, dT_M.toarray())
        if flavor == "full":
            if self.complex.is_closed:
                return self.mass_solve(k - 1, dT_M.toarray())
            corr = (
                self.trace(k - 1).T
                @ self.boundary_wedge(k - 1)
                @ self.trace(self.n - k)
                @ self.star(k)
            )
            return self.mass_solve(k - 1, dT_M.toarray() - corr)
        if flavor == "dirichlet":
            bd = self.complex.boundary
            if bd is None:
                return self.mass_solve(k - 1, dT_M.toarray())
            ik, ik1 = bd.interior_indices(k), bd.interior_indices(k - 1)
            sub = (self.d(k - 1)[np.ix_(ik, ik1)]).T @ self.mass(k)[np.ix_(ik, ik)]
            mk1 = self.mass(k - 1)[np.ix_(ik1, ik1)]
            out = np.zeros((self.complex.num(k - 1), self.complex.num(k)))
            out[np.ix_(ik1, ik)] = np.linalg.solve(mk1.toarray(), sub.toarray())
            return out
        raise ValueError(f"unknown codifferential flavor {flavor!r}")

    def green_residual(self, k, alpha, beta):
        """<d alpha, beta> - <alpha, delta_full beta> - int_bd tr(alpha)^tr(star beta).

        alpha is a (k-1)-cochain, beta a k-cochain; exact-zero by construction,
        reported as a diagnostic of the assembly's self-consistency.
        """
        lhs = (self.d(k - 1) @ alpha) @ (self.mass(k) @ beta)
        mid = alpha @ (self.mass(k - 1) @ (self.codifferential(k, "full") @ beta))
        if self.complex.is_closed:
            return lhs - mid
        bnd = (self.trace(k - 1) @ alpha) @ (
            self.boundary_wedge(k - 1) @ self.trace_star(k, beta)
        )
        return lhs - mid - bnd

    def stokes_residual(self, k, alpha, beta):
        """int_M d(Wa ^ Wb) - int_bd tr(a) ^ tr(b) for degrees (k, n-1-k)."""
        du_v = (self.d(k) @ alpha) @ (self.wedge(k + 1) @ beta)
        u_dv = alpha @ (self.wedge(k) @ (self.d(self.n - 1 - k) @ beta))
        interior = du_v + (-1.0) ** k * u_dv
        if self.complex.is_closed:
            return interior
        bnd = (self.trace(k) @ alpha) @ (
            self.boundary_wedge(k) @ (self.trace(self.n - 1 - k) @ beta)
        )
        return interior - bnd

    def derham_wedge(self, k, l, alpha, beta):
        """Cochain-valued wedge of a k- and an l-cochain."""
        return whitney.derham_wedge(self.complex, k, l, alpha, beta)

    # -- export ---------------------------------------------------------------

    def export_matrices(self, directory):
        """Write d/mass/trace (and boundary pairing) in MatrixMarket format."""
        import os

        os.makedirs(directory, exist_ok=True)
        written = []

        def put(name, mat):
            path = os.path.join(directory, f"{name}.mtx")
            scipy.io.mmwrite(path, sp.coo_matrix(mat))
            written.append(path)

        for k in range(self.n):
            put(f"d{k}", self.d(k))
        for k in range(self.n + 1):
            put(f"mass{k}", self.mass(k))
            put(f"wedge{k}", self.wedge(k))
        if not self.complex.is_closed:
            for k in range(self.n):
                put(f"trace{k}", self.trace(k))
                put(f"boundary_wedge{k}", self.boundary_wedge(k))
        return written
