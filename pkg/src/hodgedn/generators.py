"""Built-in mesh families: interval, square, disk, annulus, solid torus, ball."""

import numpy as np

from .errors import ResolutionTooSmall
from .simplicial import SimplicialComplex

SHAPES = ("interval", "square", "disk", "annulus", "solid_torus", "ball")

_MIN_RES = {
    "interval": 1,
    "square": 1,
    "disk": 1,
    "annulus": 3,
    "solid_torus": 3,
    "ball": 1,
}


def _require(shape, res, minimum):
    if res < minimum:
        raise ResolutionTooSmall(
            f"shape {shape!r} needs resolution >= {minimum}, got {res}"
        )


def interval(res):
    """[0, 1] split into `res` edges."""
    _require("interval", res, 1)
    verts = np.linspace(0.0, 1.0, res + 1).reshape(-1, 1)
    edges = np.column_stack([np.arange(res), np.arange(1, res + 1)])
    return SimplicialComplex(verts, edges)


def _grid_triangles(nx, ny):
    """Uniform-diagonal triangulation of an (nx x ny)-cell grid."""
    def vid(i, j):
        return i * (ny + 1) + j

    tris = []
    for i in range(nx):
        for j in range(ny):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            tris.append([a, b, c])
            tris.append([a, c, d])
    return np.array(tris)


def _boundary_cycles(tris):
    """Boundary edges of a triangle mesh, grouped into vertex cycles."""
    from collections import Counter, defaultdict

    count = Counter()
    for tri in tris:
        for e in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[0], tri[2])):
            count[tuple(sorted(e))] += 1
    bedges = [e for e, c in count.items() if c == 1]
    adj = defaultdict(list)
    for a, b in bedges:
        adj[a].append((a, b))
        adj[b].append((a, b))
    seen = set()
    cycles = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp_edges, stack = [], [start]
        seen.add(start)
        while stack:
            v = stack.pop()
            for e in adj[v]:
                comp_edges.append(e)
                for w in e:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
        cycles.append(sorted(set(comp_edges)))
    return cycles


def _odd_boundary(verts, tris, project=None):
    """Split one boundary edge per even boundary cycle.

    The lowest-order boundary wedge pairing on a cycle with an even number of
    vertices has a radical (the alternating cochain); an odd vertex count
    makes the pairing nondegenerate, which the boundary-flux assembly needs.
    `project` optionally maps a new midpoint back onto the curved boundary.
    """
    verts = list(map(np.asarray, verts))
    tris = [list(t) for t in tris]
    used = set()
    for cycle in _boundary_cycles(tris):
        nverts = len({v for e in cycle for v in e})
        if nverts % 2 == 1:
            continue
        for a, b in cycle:
            owners = [i for i, t in enumerate(tris) if a in t and b in t]
            if len(owners) == 1 and owners[0] not in used:
                ti = owners[0]
                used.add(ti)
                mid = 0.5 * (verts[a] + verts[b])
                if project is not None:
                    mid = project(mid, verts[a], verts[b])
                m = len(verts)
                verts.append(np.asarray(mid))
                c = next(v for v in tris[ti] if v not in (a, b))
                tris[ti] = [a, m, c]
                tris.append([m, b, c])
                break
    return np.array(verts), np.array(tris)


def _radial_project(mid, va, vb):
    """Put a midpoint back on the circle through its two endpoints."""
    r = 0.5 * (np.linalg.norm(va) + np.linalg.norm(vb))
    return mid * (r / np.linalg.norm(mid))


def square(res):
    """Unit square, (res x res) cells, two triangles each.

    One boundary edge is split so the boundary cycle has odd length.
    """
    _require("square", res, 1)
    t = np.linspace(0.0, 1.0, res + 1)
    xx, yy = np.meshgrid(t, t, indexing="ij")
    verts = np.column_stack([xx.ravel(), yy.ravel()])
    verts, tris = _odd_boundary(verts, _grid_triangles(res, res))
    return SimplicialComplex(verts, tris)


def disk(res):
    """Unit disk: a (2*res)^2 square grid warped radially onto the disk.

    One boundary edge is split so the boundary cycle has odd length.
    """
    _require("disk", res, 1)
    n = 2 * res
    t = np.linspace(-1.0, 1.0, n + 1)
    xx, yy = np.meshgrid(t, t, indexing="ij")
    verts = np.column_stack([xx.ravel(), yy.ravel()])
    norms = np.linalg.norm(verts, axis=1)
    sup = np.maximum(np.abs(verts[:, 0]), np.abs(verts[:, 1]))
    scale = np.divide(sup, norms, out=np.ones_like(norms), where=norms > 0)
    verts, tris = _odd_boundary(
        verts * scale[:, None], _grid_triangles(n, n), project=_radial_project
    )
    return SimplicialComplex(verts, tris)


def annulus(res, layers=None):
    """Annulus with radii [1, 2]: `res` angular segments, radial layers."""
    _require("annulus", res, 3)
    layers = layers or max(2, res // 4)
    verts = []
    for l in range(layers + 1):
        r = 1.0 + l / layers
        for j in range(res):
            ang = 2.0 * np.pi * j / res
            verts.append([r * np.cos(ang), r * np.sin(ang)])

    def vid(l, j):
        return l * res + j % res

    tris = []
    for l in range(layers):
        for j in range(res):
            a, b = vid(l, j), vid(l, j + 1)
            c, d = vid(l + 1, j), vid(l + 1, j + 1)
            tris.append([a, b, d])
            tris.append([a, d, c])
    verts, tris = _odd_boundary(np.array(verts), np.array(tris),
                                project=_radial_project)
    return SimplicialComplex(verts, tris)


def _prisms_to_tets(bottom, top, key):
    """Split a triangular prism consistently using a global vertex key.

    Each quad side gets the diagonal from the lower-key bottom vertex to the
    higher-key top vertex, so neighbouring prisms agree on shared faces.
    """
    order = sorted(range(3), key=lambda i: key[i])
    p = [bottom[i] for i in order]
    q = [top[i] for i in order]
    return [
        [p[0], p[1], p[2], q[2]],
        [p[0], p[1], q[1], q[2]],
        [p[0], q[0], q[1], q[2]],
    ]


def solid_torus(res, cross_res=None):
    """Solid torus: disk cross-section swept along a circle of `res` segments."""
    _require("solid_torus", res, 3)
    cross = disk(cross_res or 1)
    nv = cross.num(0)
    big = 2.0
    verts = []
    for t in range(res):
        ang = 2.0 * np.pi * t / res
        c, s = np.cos(ang), np.sin(ang)
        for u, v in cross.vertices:
            rad = big + u
            verts.append([rad * c, rad * s, v])

    def vid(t, i):
        return (t % res) * nv + i

    tets = []
    for t in range(res):
        for tri in cross.simplices[2]:
            bottom = [vid(t, i) for i in tri]
            top = [vid(t + 1, i) for i in tri]
            tets.extend(_prisms_to_tets(bottom, top, key=list(tri)))
    return SimplicialComplex(np.array(verts), np.array(tets))


def ball(res):
    """Unit ball: Freudenthal-triangulated cube grid warped onto the ball."""
    _require("ball", res, 1)
    n = 2 * res
    t = np.linspace(-1.0, 1.0, n + 1)
    xx, yy, zz = np.meshgrid(t, t, t, indexing="ij")
    verts = np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])
    norms = np.linalg.norm(verts, axis=1)
    sup = np.max(np.abs(verts), axis=1)
    scale = np.divide(sup, norms, out=np.ones_like(norms), where=norms > 0)
    verts = verts * scale[:, None]

    def vid(i, j, k):
        return (i * (n + 1) + j) * (n + 1) + k

    axes = np.eye(3, dtype=int)
    perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    tets = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                base = np.array([i, j, k])
                for p in perms:
                    path = [base]
                    for ax in p:
                        path.append(path[-1] + axes[ax])
                    tets.append([vid(*v) for v in path])
    return SimplicialComplex(verts, np.array(tets))


def generate(shape, res):
    """Build one of the named shapes at the given resolution."""
    if shape not in SHAPES:
        raise ValueError(f"unknown shape {shape!r}; choose from {SHAPES}")
    return {
        "interval": interval,
        "square": square,
        "disk": disk,
        "annulus": annulus,
        "solid_torus": solid_torus,
        "ball": ball,
    }[shape](res)
