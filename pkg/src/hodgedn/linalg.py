"""Dense linear-algebra helpers: guarded nullspaces, mass geometry, angles."""

import numpy as np
import scipy.linalg

from .errors import RankAmbiguous


def _as_dense(A):
    return A.toarray() if hasattr(A, "toarray") else np.asarray(A, dtype=float)


def nullspace(A, tol_rank=1e-8, gap=1e3, expected=None):
    """Orthonormal nullspace basis with an explicit spectral-gap guard.

    The rank decision must be unambiguous: the singular values kept and
    discarded have to differ by the factor `gap`, otherwise RankAmbiguous is
    raised rather than silently returning a basis of the wrong dimension.
    If `expected` is given, the nullity is additionally pinned to it.
    """
    A = _as_dense(A)
    if A.size == 0 or min(A.shape) == 0:
        dim = A.shape[1]
        return np.eye(dim)
    u, s, vt = scipy.linalg.svd(A, full_matrices=True)
    smax = s[0] if len(s) else 0.0
    thresh = tol_rank * max(1.0, smax)
    nullity = A.shape[1] - int(np.sum(s > thresh))
    if expected is not None and nullity != expected:
        raise RankAmbiguous(
            f"nullity {nullity} != expected {expected} "
            f"(singular values around cut: {s[-max(1, expected + 2):]})"
        )
    kept = s[s > thresh]
    dropped = s[s <= thresh]
    if len(kept) and len(dropped) and kept[-1] < gap * max(dropped[0], 1e-300):
        raise RankAmbiguous(
            f"singular-value gap too small: {kept[-1]:.3e} vs {dropped[0] if len(dropped) else 0:.3e}"
        )
    return vt[A.shape[1] - nullity:].T.copy()


def rank(A, tol_rank=1e-8, gap=1e3):
    """Numerical rank with the same gap guard as `nullspace`."""
    A = _as_dense(A)
    if A.size == 0 or min(A.shape) == 0:
        return 0
    s = scipy.linalg.svdvals(A)
    thresh = tol_rank * max(1.0, s[0])
    r = int(np.sum(s > thresh))
    kept, dropped = s[:r], s[r:]
    if len(kept) and len(dropped) and kept[-1] < gap * max(dropped[0], 1e-300):
        raise RankAmbiguous(
            f"singular-value gap too small: {kept[-1]:.3e} vs {dropped[0]:.3e}"
        )
    return r


def mass_orthonormalize(V, M, tol=1e-12):
    """Orthonormalize the columns of V in the inner product given by M."""
    V = _as_dense(V)
    if V.shape[1] == 0:
        return V
    G = V.T @ (M @ V)
    w, q = scipy.linalg.eigh(G)
    keep = w > tol * max(w.max(), 1.0)
    return V @ (q[:, keep] / np.sqrt(w[keep]))


def gap_guarded_basis(V, M, tol_rank=1e-8, gap=1e3, expected=None):
    """M-orthonormal basis of span(V) with an unambiguous rank decision.

    Eigenvalues of the M-Gram matrix are split at tol_rank^2 (relative); the
    kept/dropped groups must be separated by the factor gap^2, mirroring the
    guard in `nullspace`.
    """
    V = _as_dense(V)
    if V.shape[1] == 0:
        return V
    G = V.T @ (M @ V)
    w, q = scipy.linalg.eigh(G)
    scale = max(w.max(), 1.0) if w.size else 1.0
    # eigenvalues below the eigensolver noise floor carry no rank information
    noise = G.shape[0] * np.finfo(float).eps * scale
    thresh = max(tol_rank**2 * scale, noise)
    keep = w > thresh
    if expected is not None and keep.sum() != expected:
        raise RankAmbiguous(
            f"basis dimension {int(keep.sum())} != expected {expected}"
        )
    kept = w[keep]
    dropped = np.abs(w[~keep])
    if kept.size and dropped.size:
        floor = max(dropped.max(), noise)
        if kept.min() < gap * floor:
            raise RankAmbiguous(
                f"no clear spectral gap: kept {kept.min():.3e} vs dropped "
                f"{dropped.max():.3e}"
            )
    return V @ (q[:, keep] / np.sqrt(kept))


def mass_project(V, M, x):
    """M-orthogonal projection of x onto the span of (M-orthonormal) columns V."""
    if V.shape[1] == 0:
        return np.zeros_like(x)
    return V @ (V.T @ (M @ x))


def principal_angles(U, V, M=None):
    """Principal angles (radians) between two column spans, optionally M-metric."""
    if U.shape[1] == 0 or V.shape[1] == 0:
        return np.zeros(0)
    if M is None:
        M = np.eye(U.shape[0])
    U = mass_orthonormalize(U, M)
    V = mass_orthonormalize(V, M)
    s = scipy.linalg.svdvals(U.T @ (M @ V))
    return np.arccos(np.clip(s, -1.0, 1.0))


def subspace_residual(V, M, x):
    """Relative M-norm distance from x to span(V) (V must be M-orthonormal)."""
    nx = np.sqrt(abs(x @ (M @ x)))
    if nx == 0:
        return 0.0
    r = x - mass_project(V, M, x)
    return float(np.sqrt(abs(r @ (M @ r))) / nx)


def solve_minnorm(A, b):
    """Minimum-norm least-squares solution and the residual norm."""
    A = _as_dense(A)
    x, *_ = scipy.linalg.lstsq(A, b, lapack_driver="gelsd")
    resid = np.linalg.norm(A @ x - b)
    return x, resid
