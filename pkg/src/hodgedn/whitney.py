"""Exact element integrals of lowest-order Whitney forms.

All integrands are quadratic polynomials in the barycentric coordinates times
constant forms, so every integral here is closed-form exact:

    int_T lambda_a lambda_b = vol(T) (1 + delta_ab) / ((m+1)(m+2))

and the constant-form factors are Gram determinants of the barycentric
gradients.  Works for simplices of any dimension m embedded in R^e (e >= m),
which covers boundary complexes as well as full-dimensional meshes.
"""

from itertools import combinations
from math import factorial

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateSimplex


class ElementGeometry:
    """Geometry of one m-simplex: volume, barycentric gradients, frame sign."""

    def __init__(self, points):
        points = np.asarray(points, dtype=float)
        m = len(points) - 1
        A = (points[1:] - points[0]).T  # e x m
        gram = A.T @ A
        det = np.linalg.det(gram)
        if det <= 0:
            raise DegenerateSimplex("simplex with nonpositive Gram determinant")
        self.volume = np.sqrt(det) / factorial(m)
        ginv = np.linalg.inv(gram)
        grads = np.zeros((m + 1, A.shape[0]))
        grads[1:] = (A @ ginv).T
        grads[0] = -grads[1:].sum(axis=0)
        self.grads = grads
        self.dim = m
        # orthonormal tangent frame and the sign of the vertex-order orientation
        q, r = np.linalg.qr(A)
        self.frame = q
        self.frame_sign = 1.0 if np.prod(np.diag(r)) > 0 else -1.0
        # int lambda_a lambda_b
        self.lam2 = self.volume * (np.ones((m + 1, m + 1)) + np.eye(m + 1)) / (
            (m + 1) * (m + 2)
        )


def _terms(face):
    """Whitney form of `face` as [(coeff, scalar vertex, gradient vertices)]."""
    k = len(face) - 1
    if k == 0:
        return [(1.0, face[0], ())]
    c = float(factorial(k))
    return [
        (c * (-1.0) ** j, face[j], face[:j] + face[j + 1:])
        for j in range(k + 1)
    ]


def local_mass(geom, faces_a, faces_b=None):
    """Matrix of <w_sigma, w_tau>_T over two lists of local faces."""
    faces_b = faces_a if faces_b is None else faces_b
    G = geom.grads @ geom.grads.T
    out = np.zeros((len(faces_a), len(faces_b)))
    for i, fa in enumerate(faces_a):
        for j, fb in enumerate(faces_b):
            acc = 0.0
            for ca, va, ga in _terms(fa):
                for cb, vb, gb in _terms(fb):
                    acc += ca * cb * geom.lam2[va, vb] * np.linalg.det(
                        G[np.ix_(ga, gb)]
                    )
            out[i, j] = acc
    return out


def local_wedge(geom, faces_a, faces_b, orientation=1.0):
    """Matrix of int_T w_sigma ^ w_tau (degrees summing to dim T).

    `orientation` is the sign of the simplex orientation relative to its
    ascending vertex order.
    """
    gf = geom.grads @ geom.frame  # gradient coordinates in the oriented frame
    sign = orientation * geom.frame_sign
    out = np.zeros((len(faces_a), len(faces_b)))
    for i, fa in enumerate(faces_a):
        for j, fb in enumerate(faces_b):
            acc = 0.0
            for ca, va, ga in _terms(fa):
                for cb, vb, gb in _terms(fb):
                    idx = list(ga) + list(gb)
                    if len(set(idx)) != len(idx):
                        continue
                    acc += ca * cb * geom.lam2[va, vb] * np.linalg.det(gf[idx, :])
            out[i, j] = sign * acc
    return out


def _local_faces(k, m):
    return list(combinations(range(m + 1), k + 1))


def element_geometries(complex_):
    tops = complex_.simplices[complex_.dim]
    return [ElementGeometry(complex_.vertices[row]) for row in tops]


def _global_face_indices(complex_, k):
    """(N_top, C) global indices of the local k-faces of each top simplex."""
    m = complex_.dim
    tops = complex_.simplices[m]
    locs = _local_faces(k, m)
    index = complex_._index[k]
    out = np.empty((len(tops), len(locs)), dtype=np.int64)
    for t, row in enumerate(tops):
        for c, loc in enumerate(locs):
            out[t, c] = index[tuple(row[list(loc)])]
    return out


def assemble_mass(complex_, k, geoms=None):
    """Global Whitney mass matrix on k-cochains (sparse SPD)."""
    m = complex_.dim
    geoms = geoms or element_geometries(complex_)
    locs = _local_faces(k, m)
    gidx = _global_face_indices(complex_, k)
    rows, cols, vals = [], [], []
    for t, geom in enumerate(geoms):
        loc = local_mass(geom, locs)
        gi = gidx[t]
        rows.extend(np.repeat(gi, len(locs)))
        cols.extend(np.tile(gi, len(locs)))
        vals.extend(loc.ravel())
    n = complex_.num(k)
    out = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return (out + out.T) * 0.5


def assemble_wedge_pairing(complex_, k, geoms=None):
    """Global pairing int_M w^k ^ w^(m-k) using the stored orientation."""
    m = complex_.dim
    geoms = geoms or element_geometries(complex_)
    locs_a = _local_faces(k, m)
    locs_b = _local_faces(m - k, m)
    gi_a = _global_face_indices(complex_, k)
    gi_b = _global_face_indices(complex_, m - k)
    rows, cols, vals = [], [], []
    for t, geom in enumerate(geoms):
        loc = local_wedge(geom, locs_a, locs_b, complex_.orientation[t])
        rows.extend(np.repeat(gi_a[t], len(locs_b)))
        cols.extend(np.tile(gi_b[t], len(locs_a)))
        vals.extend(loc.ravel())
    return sp.csr_matrix(
        (vals, (rows, cols)), shape=(complex_.num(k), complex_.num(m - k))
    )


def derham_wedge(complex_, k, l, alpha, beta):
    """Cochain wedge: integrate the pointwise Whitney wedge over (k+l)-simplices.

    Exact for the polynomial integrand, hence satisfies the unit law, graded
    anticommutativity and the Leibniz rule exactly at cochain level.
    """
    d = k + l
    if d > complex_.dim:
        return np.zeros(0)
    simp = complex_.simplices[d]
    locs_a = _local_faces(k, d)
    locs_b = _local_faces(l, d)
    idx_k = complex_._index[k]
    idx_l = complex_._index[l]
    out = np.zeros(len(simp))
    for t, row in enumerate(simp):
        geom = ElementGeometry(complex_.vertices[row])
        loc = local_wedge(geom, locs_a, locs_b, 1.0)
        va = np.array([alpha[idx_k[tuple(row[list(f)])]] for f in locs_a])
        vb = np.array([beta[idx_l[tuple(row[list(f)])]] for f in locs_b])
        out[t] = va @ loc @ vb
    return out
