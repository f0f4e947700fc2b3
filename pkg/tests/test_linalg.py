"""Gap-guarded rank/nullspace utilities."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from hodgedn import linalg
from hodgedn.errors import RankAmbiguous


def test_rank_of_zero_matrix():
    assert linalg.rank(np.zeros((4, 3))) == 0


def test_rank_clear_gap():
    A = np.diag([1.0, 0.5, 1e-14])
    assert linalg.rank(A) == 2


def test_rank_ambiguous_raises():
    A = np.diag([1.0, 1e-7, 1e-8, 1e-9])  # no 1e3 gap at the cutoff
    with pytest.raises(RankAmbiguous):
        linalg.rank(A)


def test_nullspace_expected_dimension():
    A = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    N = linalg.nullspace(A, expected=1)
    assert N.shape == (3, 1)
    assert np.linalg.norm(A @ N) < 1e-12


def test_nullspace_expected_mismatch_raises():
    A = np.eye(3)
    with pytest.raises(RankAmbiguous):
        linalg.nullspace(A, expected=1)


def test_mass_orthonormalize():
    rng = np.random.default_rng(0)
    M = np.diag(rng.uniform(0.5, 2.0, size=6))
    V = rng.standard_normal((6, 3))
    Q = linalg.mass_orthonormalize(V, M)
    assert np.allclose(Q.T @ (M @ Q), np.eye(Q.shape[1]), atol=1e-12)


def test_principal_angles_identical_subspace():
    rng = np.random.default_rng(1)
    V = rng.standard_normal((8, 3))
    Q, _ = np.linalg.qr(V)
    angles = linalg.principal_angles(Q, Q)
    assert angles.max(initial=0.0) < 1e-10


def test_principal_angles_orthogonal_subspaces():
    U = np.eye(6)[:, :2]
    V = np.eye(6)[:, 3:5]
    angles = linalg.principal_angles(U, V)
    assert abs(angles.min() - np.pi / 2) < 1e-12


def test_solve_minnorm_consistent():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((6, 4))
    x = rng.standard_normal((4, 2))
    b = A @ x
    sol, resid = linalg.solve_minnorm(A, b)
    assert resid < 1e-10
    assert np.allclose(A @ sol, b, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(hst.integers(min_value=1, max_value=6),
       hst.integers(min_value=0, max_value=5),
       hst.integers(min_value=0, max_value=2 ** 31 - 1))
def test_rank_and_nullspace_consistent(m, r, seed):
    # a matrix built from r well-separated singular directions has rank r
    rng = np.random.default_rng(seed)
    r = min(r, m)
    U, _ = np.linalg.qr(rng.standard_normal((m, m)))
    V, _ = np.linalg.qr(rng.standard_normal((m, m)))
    s = np.zeros(m)
    s[:r] = rng.uniform(0.5, 2.0, size=r)
    A = (U * s) @ V.T
    assert linalg.rank(A) == r
    N = linalg.nullspace(A)
    assert N.shape[1] == m - r
    if N.size:
        assert np.linalg.norm(A @ N) < 1e-10
