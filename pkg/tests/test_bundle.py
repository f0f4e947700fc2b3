"""Whitney mass/wedge operators: positivity, exact calculus identities."""

import numpy as np
import pytest

from hodgedn import generators
from hodgedn.bundle import OperatorBundle

MESHES = {
    "interval": 8,
    "square": 4,
    "disk": 6,
    "annulus": 8,
    "solid_torus": 4,
}

_cache = {}


def bundle(shape):
    if shape not in _cache:
        _cache[shape] = OperatorBundle(generators.generate(shape, MESHES[shape]))
    return _cache[shape]


@pytest.mark.parametrize("shape", sorted(MESHES))
def test_mass_symmetric_positive_definite(shape):
    b = bundle(shape)
    rng = np.random.default_rng(0)
    for k in range(b.n + 1):
        M = b.mass(k).toarray()
        assert np.allclose(M, M.T, atol=1e-14)
        x = rng.standard_normal(M.shape[0])
        assert x @ (M @ x) > 0


@pytest.mark.parametrize("shape", sorted(MESHES))
def test_green_identity_exact(shape):
    b = bundle(shape)
    rng = np.random.default_rng(1)
    for k in range(1, b.n + 1):
        for _ in range(10):
            alpha = rng.standard_normal(b.d(k - 1).shape[1])
            beta = rng.standard_normal(b.d(k - 1).shape[0])
            res = b.green_residual(k, alpha, beta)
            scale = max(np.linalg.norm(alpha) * np.linalg.norm(beta), 1.0)
            assert abs(res) / scale < 1e-12


@pytest.mark.parametrize("shape", ["square", "disk", "annulus"])
def test_stokes_identity_exact(shape):
    b = bundle(shape)
    rng = np.random.default_rng(2)
    for k in range(b.n):
        for _ in range(10):
            x = rng.standard_normal(len(b.complex.simplices[k]))
            y = rng.standard_normal(len(b.complex.simplices[b.n - 1 - k]))
            res = b.stokes_residual(k, x, y)
            scale = max(np.linalg.norm(x) * np.linalg.norm(y), 1.0)
            assert abs(res) / scale < 1e-12


def test_wedge_unit_law():
    b = bundle("disk")
    ones = np.ones(len(b.complex.simplices[0]))
    rng = np.random.default_rng(3)
    for k in range(b.n + 1):
        x = rng.standard_normal(len(b.complex.simplices[k]))
        assert np.allclose(b.derham_wedge(0, k, ones, x), x, atol=1e-13)


def test_wedge_anticommutative():
    b = bundle("disk")
    rng = np.random.default_rng(4)
    x = rng.standard_normal(len(b.complex.simplices[1]))
    y = rng.standard_normal(len(b.complex.simplices[1]))
    assert np.allclose(b.derham_wedge(1, 1, x, y),
                       -b.derham_wedge(1, 1, y, x), atol=1e-13)


def test_wedge_total_integral_matches_mass_pairing_on_scalars():
    # integral of f wedge (top form) equals the L2 pairing with the
    # piecewise-constant reconstruction only in the limit; but the integral
    # of the top-degree wedge of the all-ones function with itself must be
    # the mesh volume
    b = bundle("square")
    ones0 = np.ones(len(b.complex.simplices[0]))
    top = b.derham_wedge(0, b.n, ones0, np.ones(len(b.complex.simplices[b.n])))
    assert abs(b.integral(top) - 1.0) < 1e-12  # unit square volume


def test_volume_positive_every_shape():
    # the orientation vector is the cochain representing the positive volume
    # form; its integral must be strictly positive on every shape
    for shape in MESHES:
        b = bundle(shape)
        vol = b.integral(np.asarray(b.complex.orientation, dtype=float))
        assert vol > 0
