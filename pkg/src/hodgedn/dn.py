"""Boundary flux (Dirichlet-to-Neumann type) operator on parity cochains.

For boundary data theta the interior problem is solved by the harmonic
extension solver; the outgoing flux functional on a test trace phi with any
extension E is

    G(phi, theta) = <D E, D omega_theta> = <D omega_phi, D omega_theta>,

extension-independent because the extension minimizes the differential energy
(so <D omega, D v> = 0 exactly for trace-zero v).  G is symmetric positive
semidefinite and annihilates closed traces on both sides.  The operator
itself is recovered through the boundary pairing B restricted to the
closed-trace subspace W_q:

    B(p) (Lambda theta) = G(., theta),     Lambda theta in W_q,

q = (n-1-p) mod 2.  W_q is exactly the trace space of closed parity forms and
equals the range of Lambda; its annihilator under B is W_p, which equals the
kernel.  These facts are exact in this discretization and are re-verified by
`kernel_range_analysis`.

Derived operators:

* `recovery_operator` — Lambda combined with the boundary differential and a
  pseudoinverse of the complementary-parity operator; its rank recovers the
  dimension of the Neumann harmonic fields of the complementary parity from
  boundary data alone;
* `hilbert_transform` — boundary differential of the pseudoinverse solve,
  defined on the range of the complementary operator plus harmonic traces.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import bvp, linalg
from .config import DEFAULT_TOLERANCES
from .errors import OutOfDomain, SolverFailure

__all__ = [
    "DNMap",
    "closed_trace_space",
    "assemble_dn",
    "kernel_range_analysis",
    "recovery_operator",
    "hilbert_transform",
]


def closed_trace_space(st, p, tol=DEFAULT_TOLERANCES):
    """Mb-orthonormal basis of traces of closed parity-p cochains."""
    closed = linalg.nullspace(st.D(p).toarray(), tol_rank=tol.rank, gap=tol.gap)
    W = st.T(p) @ closed
    Mb = st.boundary.M(p)
    return linalg.gap_guarded_basis(W, Mb, tol_rank=tol.rank, gap=tol.gap)


@dataclass
class DNMap:
    structure: object
    parity: int
    matrix: np.ndarray       # dense, V_p(bd) -> V_q(bd)
    flux_gram: np.ndarray    # the symmetric flux matrix G
    W_in: np.ndarray         # closed traces of parity p  (kernel of Lambda)
    W_out: np.ndarray        # closed traces of parity q  (range of Lambda)
    residuals: dict = field(default_factory=dict)
    _svd: tuple = None

    @property
    def out_parity(self):
        return (self.structure.n - 1 - self.parity) % 2

    def _decomposition(self, tol=DEFAULT_TOLERANCES):
        if self._svd is None:
            U, s, Vt = scipy.linalg.svd(self.matrix, full_matrices=False)
            r = linalg.rank(self.matrix, tol_rank=tol.rank, gap=tol.gap)
            self._svd = (U[:, :r], s[:r], Vt[:r])
        return self._svd

    @property
    def rank(self):
        return self._decomposition()[1].size

    def pinv(self):
        """Pseudoinverse restricted to the range of the operator."""
        U, s, Vt = self._decomposition()
        return Vt.T @ (U.T / s[:, None])

    def range_basis(self):
        return self._decomposition()[0]

    def kernel_basis(self, tol=DEFAULT_TOLERANCES):
        return linalg.nullspace(self.matrix, tol_rank=tol.rank, gap=tol.gap)


def assemble_dn(st, p, solver=None, tol=DEFAULT_TOLERANCES):
    """Assemble the boundary flux operator of parity p as a DNMap."""
    solver = solver or bvp.HarmonicExtensionSolver(st, p)
    nb = st.boundary.dim(p)
    omega = solver.solve(np.eye(nb))
    domega = st.D(p) @ omega
    G = domega.T @ (st.M(1 - p) @ domega)

    q = (st.n - 1 - p) % 2
    W_in = closed_trace_space(st, p, tol)
    W_out = closed_trace_space(st, q, tol)
    if W_in.shape[1] + W_out.shape[1] != nb:
        raise SolverFailure(
            "closed-trace spaces do not pair perfectly: "
            f"{W_in.shape[1]} + {W_out.shape[1]} != {nb}"
        )
    BW = np.asarray((st.B(p) @ W_out))
    coeff, resid = linalg.solve_minnorm(BW, G)
    Lam = W_out @ coeff
    scale = max(1.0, float(np.linalg.norm(G)))
    residuals = {
        "constrained_solve": float(resid) / scale,
        "symmetry": float(np.abs(G - G.T).max(initial=0.0)),
    }
    if resid / scale > tol.dn:
        raise SolverFailure(
            f"flux functional not representable in the closed-trace space "
            f"(residual {resid / scale:.3e})"
        )
    return DNMap(st, p, Lam, G, W_in, W_out, residuals)


def kernel_range_analysis(dn_p, dn_q, tol=DEFAULT_TOLERANCES):
    """Compare kernel/range structure of the two complementary operators.

    dn_q must be the operator whose output parity equals dn_p's input parity.
    """
    st = dn_p.structure
    ker = dn_p.kernel_basis(tol)
    ran_q = dn_q.range_basis()
    angles = linalg.principal_angles(ker, ran_q)
    ker_vs_W = linalg.principal_angles(ker, dn_p.W_in)
    bd = st.boundary
    exact_rank = linalg.rank(
        bd.D(1 - dn_p.parity).toarray(), tol_rank=tol.rank, gap=tol.gap
    )
    return {
        "dim_kernel": ker.shape[1],
        "dim_range_complement": ran_q.shape[1],
        "kernel_vs_range_angle": float(angles.max(initial=0.0)),
        "kernel_vs_closed_traces_angle": float(ker_vs_W.max(initial=0.0)),
        "quotient_dim": ker.shape[1] - exact_rank,
    }


def _recovery_sign(n, p):
    """Sign on the second-order term of the recovery operator."""
    return (-1.0) ** (n + 1) if p == 0 else 1.0


def recovery_operator(dn_p, dn_c, tol=DEFAULT_TOLERANCES):
    """Boundary operator whose rank equals a Neumann harmonic dimension.

    dn_c must be the complementary-parity operator: its input parity is
    (n - p) mod 2 so that its output parity matches dn_p's input.

    The full matrix combines the flux operator with a differentiated
    pseudoinverse correction.  At lowest order the correction cancels
    exactly only on closed boundary data (there it vanishes identically and
    the flux of a closed trace is the trace of a Neumann harmonic field up
    to exact boundary cochains, which the boundary differential kills
    exactly); on non-closed data the cancellation holds only up to
    discretization error.  The reported ``rank`` and ``range`` are therefore
    evaluated on the closed-cochain subspace, where the integer is exact;
    the residual rank of the full matrix is reported as a diagnostic.
    """
    st = dn_p.structure
    p = dn_p.parity
    pc = dn_c.parity
    bd = st.boundary
    Db_in = bd.D(p).toarray()          # V_p(bd) -> V_{1-p}(bd)
    Db_mid = bd.D(pc).toarray()        # V_pc(bd) -> V_{1-pc}(bd)
    # project the differentiated data onto the range of the complementary
    # operator before inverting; the projection residual is reported
    ran = dn_c.range_basis()
    proj = ran @ (ran.T @ Db_in)
    proj_res = float(np.abs(Db_in - proj).max(initial=0.0))
    correction = Db_mid @ (dn_c.pinv() @ proj)
    R = dn_p.matrix - _recovery_sign(st.n, p) * correction
    closed = linalg.nullspace(Db_in, tol_rank=tol.rank, gap=tol.gap)
    if closed.shape[1] == 0:
        rk = 0
        range_basis = np.zeros((R.shape[0], 0))
        corr_on_closed = 0.0
    else:
        corr_on_closed = float(np.abs(correction @ closed).max(initial=0.0))
        restricted = R @ closed
        rk = linalg.rank(restricted, tol_rank=tol.rank, gap=tol.gap)
        u, s, _ = np.linalg.svd(restricted, full_matrices=False)
        range_basis = u[:, :rk]
    return R, {
        "rank": rk,
        "range": range_basis,
        "dim_closed": int(closed.shape[1]),
        "projection_residual": proj_res,
        "correction_on_closed": corr_on_closed,
        "full_matrix_rank": linalg.rank(R, tol_rank=tol.rank, gap=tol.gap),
    }


def hilbert_transform(dn_c, phi, harmonic=None, tol=DEFAULT_TOLERANCES):
    """Apply the boundary Hilbert-transform analogue to a cochain phi.

    phi must lie (up to tol) in ran(dn_c) + traces of Neumann harmonic
    fields; otherwise OutOfDomain is raised.  Only the range component is
    inverted, so the result depends on phi's class modulo harmonic traces.
    """
    st = dn_c.structure
    ran = dn_c.range_basis()
    cols = [ran]
    if harmonic is not None and harmonic.HN.shape[1]:
        q = dn_c.out_parity
        cols.append(np.asarray(st.T(q) @ harmonic.HN))
    span = np.column_stack(cols)
    _, resid = linalg.solve_minnorm(span, phi)
    scale = max(1.0, float(np.linalg.norm(phi)))
    if resid / scale > tol.dn:
        raise OutOfDomain(
            f"input not in the operator range plus harmonic traces "
            f"(residual {resid / scale:.3e})"
        )
    bd = st.boundary
    return bd.D(dn_c.parity) @ (dn_c.pinv() @ (ran @ (ran.T @ phi)))
