"""Boundary value problems for the deformed Hodge Laplacian.

Harmonic-field subspaces
------------------------
Four distinguished subspaces of each parity component:

* ``HN``  — closed and weakly coclosed against *all* cochains (Neumann);
* ``HD``  — closed, boundary trace zero, coclosed within the trace-zero
  subcomplex (Dirichlet);
* ``Hfull`` — closed and coclosed against *interior* cochains: the discrete
  harmonic fields.  Contains both HN and HD exactly;
* ``Hexco`` — orthogonal complement of HN + HD inside Hfull (refined summand).

The mixed saddle solver drives both the Dirichlet-data problem and the
Laplace problem behind the boundary-flux operator: with u = extension(theta)
+ interior correction and sigma the codifferential proxy,

    <sigma, tau> - <u, D tau> = 0          for all interior tau,
    <D sigma, v> + <D u, D v> = <eta, v>   for all interior v.

Any homogeneous solution has sigma = 0 and u in HD, so D(omega) and sigma are
unique across solutions; the pseudoinverse picks the minimum-norm saddle
vector and the returned omega is additionally mass-orthogonalized against HD.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import linalg
from .config import DEFAULT_TOLERANCES
from .errors import Infeasible, NotSolvable

_EMPTY = None


@dataclass
class HarmonicSpaces:
    parity: int
    HN: np.ndarray
    HD: np.ndarray
    Hfull: np.ndarray
    Hexco: np.ndarray
    residuals: dict = field(default_factory=dict)

    @property
    def dims(self):
        return {
            "HN": self.HN.shape[1],
            "HD": self.HD.shape[1],
            "Hfull": self.Hfull.shape[1],
            "Hexco": self.Hexco.shape[1],
        }


def _null(A, tol, expected=None):
    return linalg.nullspace(A, tol_rank=tol.rank, gap=tol.gap, expected=expected)


def harmonic_spaces(st, p, tol=DEFAULT_TOLERANCES):
    """Compute the four harmonic-field subspaces of parity p (M-orthonormal)."""
    D = st.D(p).toarray()
    Mp = st.M(p)
    adj = (st.D(1 - p).T @ Mp).toarray()  # weak codifferential rows

    HN = _null(np.vstack([D, adj]), tol, expected=st.exact_betti(p))
    HN = linalg.mass_orthonormalize(HN, Mp)

    ii_p = st.interior(p)
    ii_q = st.interior(1 - p)
    if st.closed:
        HD = HN
        Hfull = HN
    else:
        sub = np.vstack([D[:, ii_p], adj[np.ix_(ii_q, ii_p)]])
        core = _null(sub, tol, expected=st.exact_betti(p, relative=True))
        HD = np.zeros((st.dim(p), core.shape[1]))
        HD[ii_p] = core
        HD = linalg.mass_orthonormalize(HD, Mp)
        Hfull = _null(np.vstack([D, adj[ii_q]]), tol)
        Hfull = linalg.mass_orthonormalize(Hfull, Mp)

    # refined summand: complement of HN + HD inside the harmonic fields
    span = np.column_stack([HN, HD]) if HN.size or HD.size else HN
    resid = Hfull - linalg.mass_project(
        linalg.mass_orthonormalize(span, Mp), Mp, Hfull
    )
    Hexco = linalg.gap_guarded_basis(resid, Mp, tol_rank=tol.rank, gap=tol.gap)

    res = {
        "d_HN": float(np.abs(D @ HN).max(initial=0.0)),
        "delta_HN": float(np.abs(adj @ HN).max(initial=0.0)),
        "d_HD": float(np.abs(D @ HD).max(initial=0.0)),
        "trace_HD": float(np.abs((st.T(p) @ HD)).max(initial=0.0))
        if not st.closed else 0.0,
    }
    return HarmonicSpaces(p, HN, HD, Hfull, Hexco, res)


def harmonic_dims_by_degree(bundle, tol=DEFAULT_TOLERANCES):
    """Per-degree Neumann/Dirichlet harmonic dimensions of an undeformed mesh."""
    n = bundle.n
    cx = bundle.complex
    bd = cx.boundary
    out = {}
    for k in range(n + 1):
        rows = []
        if k < n:
            rows.append(bundle.d(k).toarray())
        if k > 0:
            rows.append((bundle.d(k - 1).T @ bundle.mass(k)).toarray())
        HN = linalg.nullspace(
            np.vstack(rows) if rows else np.zeros((0, cx.num(k))),
            tol_rank=tol.rank, gap=tol.gap,
        )
        if bd is None:
            out[k] = (HN.shape[1], HN.shape[1])
            continue
        ik = bd.interior_indices(k)
        rows = []
        if k < n:
            rows.append(bundle.d(k)[:, ik][bd.interior_indices(k + 1)].toarray())
        if k > 0:
            ikm = bd.interior_indices(k - 1)
            rows.append(
                (bundle.d(k - 1).T @ bundle.mass(k))[np.ix_(ikm, ik)].toarray()
            )
        HD = linalg.nullspace(
            np.vstack(rows) if rows else np.zeros((0, len(ik))),
            tol_rank=tol.rank, gap=tol.gap,
        )
        out[k] = (HN.shape[1], HD.shape[1])
    return out


class HarmonicExtensionSolver:
    """Harmonic extension of boundary data at one parity.

    Returns the lexicographic minimizer: among all extensions of theta it
    first minimizes |D omega|^2 (making <D omega, D v> = 0 exact for every
    trace-zero v, the property the boundary-flux assembly relies on), then
    minimizes |delta omega|^2 over the remaining freedom.  Both stages are
    dense pseudoinverse solves precomputed once per (structure, parity).
    """

    def __init__(self, st, p):
        self.st = st
        self.p = p
        ii = st.interior(p)
        self.ii = ii
        self.T = st.T(p)
        L = (st.D(p).T @ (st.M(1 - p) @ st.D(p))).toarray()
        self.L_I = L[np.ix_(ii, ii)]
        self.L_B = L[ii] @ self.T.T.toarray()
        self.pinvL = np.linalg.pinv(self.L_I, rcond=1e-12, hermitian=True)
        # interior directions that do not change D omega
        self.N = linalg.nullspace(self.L_I)
        self.delta = st.delta(p, "neumann")
        emb = np.zeros((st.dim(p), self.N.shape[1]))
        emb[ii] = self.N
        self.null_emb = emb
        self.Wd = self.delta @ emb
        self.pinvWd = np.linalg.pinv(self.Wd, rcond=1e-12)

    def solve(self, theta, eta=None):
        """Extension columns for boundary data columns theta (and source eta)."""
        st, p = self.st, self.p
        theta = np.atleast_2d(np.asarray(theta, dtype=float).T).T
        rhs = -self.L_B @ theta
        if eta is not None:
            rhs = rhs + st.M(p).toarray()[self.ii] @ np.atleast_2d(eta.T).T
        omega = self.T.T.toarray() @ theta
        omega[self.ii] += self.pinvL @ rhs
        # second stage: remove the codifferential within the D-preserving slack
        omega = omega - self.null_emb @ (self.pinvWd @ (self.delta @ omega))
        return omega


def solve_dn_bvp(st, p, theta, eta=None, harmonic=None, solver=None,
                 tol=DEFAULT_TOLERANCES):
    """Harmonic extension omega of theta: delta(D omega) = eta weakly against
    trace-zero cochains, D(delta omega) minimized, trace omega = theta.

    Returns (omega, sigma) with sigma the weak codifferential of omega.
    """
    if eta is not None and harmonic is not None and harmonic.HD.shape[1]:
        pair = harmonic.HD.T @ (st.M(p) @ eta)
        scale = max(1.0, float(np.linalg.norm(eta)))
        if np.abs(pair).max() > tol.bvp * scale:
            raise NotSolvable(
                "source has a component along a Dirichlet harmonic field "
                f"(pairing {np.abs(pair).max():.3e})"
            )
    solver = solver or HarmonicExtensionSolver(st, p)
    omega = solver.solve(theta, eta)[:, 0]
    if harmonic is not None and harmonic.HD.shape[1]:
        omega = omega - linalg.mass_project(harmonic.HD, st.M(p), omega)
    sigma = solver.delta @ omega
    return omega, sigma


def hmf_decompose(st, p, omega, harmonic, tol=DEFAULT_TOLERANCES):
    """Orthogonal splitting omega = e_part + c_part + h_part.

    e_part is D of a trace-zero potential, c_part is the weak codifferential
    of a potential, h_part the harmonic-field remainder, refined further into
    the HD / coexact-summand components.
    """
    Mp = st.M(p)
    ii_q = st.interior(1 - p)
    E_gen = st.D(1 - p).toarray()[:, ii_q]  # D of Dirichlet potentials
    C_gen = np.asarray(
        scipy.linalg.lstsq(Mp.toarray(), (st.D(p).T @ st.M(1 - p)).toarray())[0]
    )  # weak codifferential of arbitrary potentials
    Ebasis = linalg.mass_orthonormalize(E_gen, Mp)
    Cbasis = linalg.mass_orthonormalize(C_gen, Mp)
    e_part = linalg.mass_project(Ebasis, Mp, omega)
    c_part = linalg.mass_project(Cbasis, Mp, omega)
    h_part = omega - e_part - c_part
    h_D = linalg.mass_project(harmonic.HD, Mp, h_part)
    h_rest = h_part - h_D
    parts = {
        "e_part": e_part,
        "c_part": c_part,
        "h_part": h_part,
        "h_D": h_D,
        "h_co": h_rest,
    }

    def ip(x, y):
        return float(x @ (Mp @ y))

    scale = max(ip(omega, omega), 1e-30)
    residuals = {
        "resum": abs(ip(omega - e_part - c_part - h_part,
                        omega - e_part - c_part - h_part)) / scale,
        "orth_ec": abs(ip(e_part, c_part)) / scale,
        "orth_eh": abs(ip(e_part, h_part)) / scale,
        "orth_ch": abs(ip(c_part, h_part)) / scale,
    }
    return parts, residuals


def solve_dirichlet_data_bvp(st, p, chi, rho, psi, harmonic, solver=None,
                             tol=DEFAULT_TOLERANCES):
    """Solve D omega = chi, delta omega = rho, trace omega = psi.

    Integrability conditions (checked, else Infeasible):
      * rho weakly coclosed and orthogonal to every Dirichlet harmonic field;
      * chi closed, trace chi = D_boundary psi, and for every Dirichlet
        harmonic field kappa: <chi, kappa> = int_bd psi ^ trace(star kappa).
    """
    Mq = st.M(1 - p)
    Mp = st.M(p)
    scale = max(1.0, float(np.linalg.norm(chi)), float(np.linalg.norm(rho)))
    # condition on rho (degree-lowering data)
    cocl = np.abs((st.D(p).T @ (Mq @ rho))[st.interior(p)]).max(initial=0.0)
    if cocl > tol.bvp * scale:
        raise Infeasible(f"rho is not weakly coclosed (residual {cocl:.3e})")
    kappas_q = harmonic_spaces(st, 1 - p, tol).HD
    if kappas_q.shape[1]:
        pair_rho = np.abs(kappas_q.T @ (Mq @ rho)).max(initial=0.0)
        if pair_rho > tol.bvp * scale:
            raise Infeasible(
                f"rho pairs with a Dirichlet harmonic field ({pair_rho:.3e})"
            )
    # condition on chi (degree-raising data)
    dchi = np.abs(st.D(1 - p) @ chi).max(initial=0.0)
    if dchi > tol.bvp * scale:
        raise Infeasible(f"chi is not closed (residual {dchi:.3e})")
    tr = np.abs(st.T(1 - p) @ chi - st.boundary.D(p) @ psi).max(initial=0.0)
    if tr > tol.bvp * scale:
        raise Infeasible(f"trace of chi does not match D psi ({tr:.3e})")
    kappas = kappas_q
    if kappas.shape[1]:
        lhs = kappas.T @ (Mq @ chi)
        rhs = np.array([
            (psi @ (st.B(p) @ (st.trace_star(1 - p) @ kappas[:, j])))
            for j in range(kappas.shape[1])
        ])
        gap = np.abs(lhs - rhs).max(initial=0.0)
        if gap > tol.bvp * scale:
            raise Infeasible(
                f"chi/psi pairing against a Dirichlet harmonic field ({gap:.3e})"
            )
    # least-squares solve: omega = T^T psi + interior correction x
    ii = st.interior(p)
    D = st.D(p).toarray()
    delta = st.delta(p, "neumann")
    base = st.T(p).T @ psi
    A = np.vstack([D[:, ii], delta[:, ii]])
    b = np.concatenate([chi - D @ base, rho - delta @ base])
    x, _ = linalg.solve_minnorm(A, b)
    omega = base.copy()
    omega[ii] += x
    if harmonic.HD.shape[1]:
        omega = omega - linalg.mass_project(harmonic.HD, Mp, omega)
    res = {
        "d": float(np.linalg.norm(D @ omega - chi)),
        "delta": float(np.linalg.norm(delta @ omega - rho)),
        "trace": float(np.abs(st.T(p) @ omega - psi).max(initial=0.0)),
    }
    worst = max(res.values())
    if worst > tol.bvp * scale * 100:
        raise Infeasible(f"no solution within tolerance (residuals {res})")
    return omega, res
