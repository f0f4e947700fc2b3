"""Mesh generators: sizes, topology, boundary parity of the circle splits."""

import numpy as np
import pytest

from hodgedn import generators
from hodgedn.betti import betti_table
from hodgedn.errors import ResolutionTooSmall

# frozen oracle values: (absolute betti, relative betti, boundary betti)
EXPECTED = {
    "interval": ((1, 0), (0, 1), (2,)),
    "square": ((1, 0, 0), (0, 0, 1), (1, 1)),
    "disk": ((1, 0, 0), (0, 0, 1), (1, 1)),
    "annulus": ((1, 1, 0), (0, 1, 1), (2, 2)),
    "solid_torus": ((1, 1, 0, 0), (0, 0, 1, 1), (1, 2, 1)),
    "ball": ((1, 0, 0, 0), (0, 0, 0, 1), (1, 0, 1)),
}

RES = {"interval": 8, "square": 4, "disk": 6, "annulus": 8,
       "solid_torus": 6, "ball": 2}


@pytest.mark.parametrize("shape", sorted(EXPECTED))
def test_betti_matches_frozen_oracle(shape):
    cx = generators.generate(shape, RES[shape])
    table = betti_table(cx)
    assert table.absolute == EXPECTED[shape][0]
    assert table.relative == EXPECTED[shape][1]
    assert table.boundary == EXPECTED[shape][2]


@pytest.mark.parametrize("shape", sorted(EXPECTED))
def test_betti_stable_under_refinement(shape):
    res = RES[shape] + (1 if shape == "ball" else 2)
    table = betti_table(generators.generate(shape, res))
    assert table.absolute == EXPECTED[shape][0]


EXPECTED_BOUNDARY_CIRCLES = {"disk": 1, "annulus": 2, "square": 1}


@pytest.mark.parametrize("shape", sorted(EXPECTED_BOUNDARY_CIRCLES))
def test_boundary_is_disjoint_circles(shape):
    # the boundary of a surface mesh is a disjoint union of circles: every
    # boundary vertex has exactly two neighbours, and the number of connected
    # components matches the known topology of the shape
    cx = generators.generate(shape, RES[shape])
    bd = cx.boundary.complex
    from collections import defaultdict
    adj = defaultdict(list)
    for a, b in bd.simplices[1]:
        adj[a].append(b)
        adj[b].append(a)
    assert all(len(nbrs) == 2 for nbrs in adj.values())
    seen = set()
    components = 0
    for start in list(adj):
        if start in seen:
            continue
        components += 1
        comp = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
    assert components == EXPECTED_BOUNDARY_CIRCLES[shape]


def test_resolution_too_small():
    with pytest.raises(ResolutionTooSmall):
        generators.generate("interval", 0)


def test_unknown_shape():
    with pytest.raises(ValueError):
        generators.generate("torus", 8)


def test_euler_characteristics():
    for shape, (absolute, _, _) in EXPECTED.items():
        cx = generators.generate(shape, RES[shape])
        sizes = [len(s) for s in cx.simplices]
        chi = sum((-1) ** k * n for k, n in enumerate(sizes))
        chi_betti = sum((-1) ** k * b for k, b in enumerate(absolute))
        assert chi == chi_betti
