"""Simplicial complexes: skeleton extraction, orientation, boundary, OFF i/o.

Simplices of every dimension are stored with ascending vertex order and
lexicographically sorted rows; orientation is carried separately as a sign per
top simplex relative to that sorted order.  Coboundary matrices then satisfy
d(k+1) @ d(k) == 0 by pure combinatorics.
"""

from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .errors import (DegenerateSimplex, NotManifold, NotOrientable, ParseError)


def _canon_rows(arr):
    """Sort each row ascending and lexsort the rows; return (rows, unique_index)."""
    arr = np.sort(np.asarray(arr, dtype=np.int64), axis=1)
    order = np.lexsort(arr.T[::-1])
    return arr[order]


class SimplicialComplex:
    """A finite oriented simplicial complex embedded in R^m.

    Parameters
    ----------
    vertices : (V, m) float array of coordinates.
    top : (N, n+1) int array of top-simplex vertex indices.
    orientation : optional (N,) array of +-1 signs of each top simplex relative
        to its ascending vertex order.  If omitted it is computed from signed
        volumes when m == n, otherwise by sign propagation across ridges.
    """

    def __init__(self, vertices, top, orientation=None, validate=True):
        self.vertices = np.asarray(vertices, dtype=float)
        if self.vertices.ndim != 2:
            raise ParseError("vertex array must be 2-d")
        top = np.asarray(top, dtype=np.int64)
        if top.ndim != 2 or top.shape[0] == 0:
            raise ParseError("need a non-empty 2-d array of top simplices")
        if top.min() < 0 or top.max() >= len(self.vertices):
            raise ParseError("simplex vertex index out of range")
        if any(len(set(row)) != len(row) for row in top):
            raise ParseError("degenerate simplex record (repeated vertex)")
        self.dim = top.shape[1] - 1

        # canonical top simplices; remember the sign of the sorting permutation
        perm_sign = np.array([_perm_sign(row) for row in top])
        sorted_top = np.sort(top, axis=1)
        order = np.lexsort(sorted_top.T[::-1])
        sorted_top = sorted_top[order]
        perm_sign = perm_sign[order]
        if len(np.unique(sorted_top, axis=0)) != len(sorted_top):
            raise ParseError("duplicate top simplex")

        # skeleton: simplices[k] is (N_k, k+1), rows ascending + lexsorted
        self.simplices = [None] * (self.dim + 1)
        self.simplices[self.dim] = sorted_top
        for k in range(self.dim - 1, -1, -1):
            faces = []
            parent = self.simplices[k + 1]
            for idx in combinations(range(k + 2), k + 1):
                faces.append(parent[:, idx])
            self.simplices[k] = np.unique(np.vstack(faces), axis=0)
        self._index = [
            {tuple(row): i for i, row in enumerate(s)} for s in self.simplices
        ]

        self._d = self._build_coboundaries()

        candidate = None
        if orientation is not None:
            self.orientation = np.asarray(orientation, dtype=np.int64)[order]
        elif self.dim == 0:
            self.orientation = np.ones(len(sorted_top), dtype=np.int64)
        elif self.vertices.shape[1] == self.dim:
            vol = self._signed_volumes()
            if np.any(vol == 0):
                raise DegenerateSimplex("zero-volume top simplex")
            self.orientation = np.sign(vol).astype(np.int64)
        else:
            # embedded in higher dimension: try the orientation implied by the
            # input vertex order, fall back to sign propagation
            self.orientation = None
            candidate = perm_sign

        if self.dim >= 1:
            self._check_manifold_and_orient(validate, candidate)
        else:
            self._boundary_faces = np.zeros(0, dtype=np.int64)
            self._boundary_signs = np.zeros(0, dtype=np.int64)

        self._boundary = None

    # -- basic queries ------------------------------------------------------

    def num(self, k):
        return len(self.simplices[k])

    def index_of(self, k, verts):
        return self._index[k][tuple(sorted(verts))]

    def d(self, k):
        """Coboundary matrix C^k -> C^(k+1) in the sorted-row bases."""
        return self._d[k]

    @property
    def is_closed(self):
        return len(self._boundary_faces) == 0

    # -- construction helpers ----------------------------------------------

    def _build_coboundaries(self):
        mats = []
        for k in range(self.dim):
            rows, cols, vals = [], [], []
            upper = self.simplices[k + 1]
            index = self._index[k]
            for i, s in enumerate(upper):
                for j in range(k + 2):
                    face = tuple(np.delete(s, j))
                    rows.append(i)
                    cols.append(index[face])
                    vals.append((-1) ** j)
            mats.append(
                sp.csr_matrix(
                    (vals, (rows, cols)),
                    shape=(len(upper), len(self.simplices[k])),
                    dtype=np.float64,
                )
            )
        return mats

    def _signed_volumes(self):
        p = self.vertices[self.simplices[self.dim]]
        edges = p[:, 1:, :] - p[:, :1, :]
        return np.linalg.det(edges)

    def _check_manifold_and_orient(self, validate, candidate=None):
        n = self.dim
        tops = self.simplices[n]
        ridge_index = self._index[n - 1]
        cofaces = [[] for _ in range(self.num(n - 1))]
        for i, s in enumerate(tops):
            for j in range(n + 1):
                face = tuple(np.delete(s, j))
                cofaces[ridge_index[face]].append((i, (-1) ** j))
        counts = np.array([len(c) for c in cofaces])
        if validate and counts.max(initial=0) > 2:
            raise NotManifold(
                f"ridge with {counts.max()} cofaces (first at index {int(np.argmax(counts))})"
            )

        if self.orientation is None and candidate is not None:
            ok = all(
                candidate[a] * sa + candidate[b] * sb == 0
                for pair in cofaces
                if len(pair) == 2
                for (a, sa), (b, sb) in [pair]
            )
            if ok:
                self.orientation = candidate

        if self.orientation is None:
            # propagate signs across shared ridges, seeding each component with +1
            sign = np.zeros(len(tops), dtype=np.int64)
            for seed in range(len(tops)):
                if sign[seed]:
                    continue
                sign[seed] = 1
                stack = [seed]
                while stack:
                    t = stack.pop()
                    for j in range(n + 1):
                        face = tuple(np.delete(tops[t], j))
                        pair = cofaces[ridge_index[face]]
                        if len(pair) != 2:
                            continue
                        (a, sa), (b, sb) = pair
                        other, so = (b, sb) if a == t else (a, sa)
                        st = sa if a == t else sb
                        want = -sign[t] * st * so
                        if sign[other] == 0:
                            sign[other] = want
                            stack.append(other)
                        elif sign[other] != want:
                            raise NotOrientable("orientation conflict across a ridge")
            self.orientation = sign
        elif validate:
            for pair_list in cofaces:
                if len(pair_list) == 2:
                    (a, sa), (b, sb) = pair_list
                    if self.orientation[a] * sa + self.orientation[b] * sb != 0:
                        raise NotOrientable("orientation conflict across a ridge")

        self._boundary_faces = np.array(
            [i for i, c in enumerate(cofaces) if len(c) == 1], dtype=np.int64
        )
        self._boundary_signs = np.array(
            [
                self.orientation[cofaces[i][0][0]] * cofaces[i][0][1]
                for i in self._boundary_faces
            ],
            dtype=np.int64,
        )

    # -- boundary complex ----------------------------------------------------

    @property
    def boundary(self):
        """BoundaryComplex of this complex, or None if the complex is closed."""
        if self.is_closed:
            return None
        if self._boundary is None:
            self._boundary = BoundaryComplex(self)
        return self._boundary


class BoundaryComplex:
    """The boundary of a SimplicialComplex, with maps back to the parent.

    Attributes
    ----------
    complex : SimplicialComplex of dimension n-1 (with induced orientation).
    vertex_map : boundary vertex index -> parent vertex index.
    simplex_maps : list over k of arrays mapping boundary k-simplex indices to
        parent k-simplex indices.
    """

    def __init__(self, parent):
        n = parent.dim
        faces = parent.simplices[n - 1][parent._boundary_faces]
        self.vertex_map = np.unique(faces)
        inverse = {v: i for i, v in enumerate(self.vertex_map)}
        relabeled = np.vectorize(inverse.__getitem__)(faces)
        self.complex = SimplicialComplex(
            parent.vertices[self.vertex_map],
            relabeled,
            orientation=parent._boundary_signs,
            validate=False,
        )
        # relabeling is monotone, so sorted rows map to sorted rows
        self.simplex_maps = []
        for k in range(n):
            rows = self.vertex_map[self.complex.simplices[k]]
            self.simplex_maps.append(
                np.array([parent._index[k][tuple(r)] for r in rows], dtype=np.int64)
            )
        self.parent = parent

    def trace_matrix(self, k):
        """0/1 restriction matrix from parent k-cochains to boundary k-cochains."""
        nb = self.complex.num(k)
        return sp.csr_matrix(
            (np.ones(nb), (np.arange(nb), self.simplex_maps[k])),
            shape=(nb, self.parent.num(k)),
        )

    def interior_indices(self, k):
        """Indices of parent k-simplices not contained in the boundary."""
        mask = np.ones(self.parent.num(k), dtype=bool)
        if k < self.parent.dim:
            mask[self.simplex_maps[k]] = False
        return np.nonzero(mask)[0]


def _perm_sign(row):
    row = list(row)
    sign = 1
    for i in range(len(row)):
        m = min(range(i, len(row)), key=row.__getitem__)
        if m != i:
            row[i], row[m] = row[m], row[i]
            sign = -sign
    return sign


# -- OFF input/output --------------------------------------------------------


def load_off(path):
    """Read an OFF file.  Records of 2/3/4 indices are edges/triangles/tets."""
    with open(path) as fh:
        tokens = []
        for line in fh:
            line = line.split("#")[0].strip()
            if line:
                tokens.extend(line.split())
    pos = 0

    def take(n):
        nonlocal pos
        if pos + n > len(tokens):
            raise ParseError("unexpected end of OFF file")
        out = tokens[pos:pos + n]
        pos += n
        return out

    if tokens and tokens[0].upper() == "OFF":
        pos = 1
    try:
        nv, nf, _ = (int(t) for t in take(3))
        verts = np.array([[float(x) for x in take(3)] for _ in range(nv)])
        cells = []
        size = None
        for _ in range(nf):
            m = int(take(1)[0])
            if size is None:
                if m not in (2, 3, 4):
                    raise ParseError(f"unsupported record size {m}")
                size = m
            elif m != size:
                raise ParseError("mixed simplex record sizes")
            cells.append([int(x) for x in take(size)])
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(f"malformed OFF token: {exc}") from None
    if not cells:
        raise ParseError("OFF file has no simplex records")
    # drop trailing embedding coordinates that are identically zero
    while verts.shape[1] > size - 1 and np.all(verts[:, -1] == 0.0):
        verts = verts[:, :-1]
    return SimplicialComplex(verts, np.array(cells))


def write_off(complex_, path):
    """Write the top simplices of a complex as an OFF file (coords padded to 3-d)."""
    verts = complex_.vertices
    if verts.shape[1] < 3:
        verts = np.hstack([verts, np.zeros((len(verts), 3 - verts.shape[1]))])
    tops = complex_.simplices[complex_.dim]
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(verts)} {len(tops)} 0\n")
        for p in verts:
            fh.write(" ".join(repr(float(x)) for x in p[:3]) + "\n")
        for row, sign in zip(tops, complex_.orientation):
            row = list(row)
            if sign < 0 and len(row) >= 2:
                row[0], row[1] = row[1], row[0]
            fh.write(str(len(row)) + " " + " ".join(str(int(v)) for v in row) + "\n")
