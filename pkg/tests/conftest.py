"""Shared fixtures: cached structures, flux operators, and class frames."""

import numpy as np
import pytest

from hodgedn import dn, generators, topology
from hodgedn.bundle import OperatorBundle
from hodgedn.graded import GradedStructure

# configurations on which the boundary flux operator is assembled;
# key -> (shape, res, s or None for the plain backend)
DN_CONFIGS = {
    "interval": ("interval", 8, None),
    "square": ("square", 4, None),
    "disk": ("disk", 8, None),
    "annulus": ("annulus", 8, None),
    "interval_x_s1_s0": ("interval", 8, 0),
    "interval_x_s1_s1": ("interval", 8, 1),
    "square_x_s1_s0": ("square", 4, 0),
    "square_x_s1_s1": ("square", 4, 1),
    "disk_x_s1_s0": ("disk", 3, 0),
    "disk_x_s1_s1": ("disk", 3, 1),
}

# interior-only configurations (no flux operator; boundary pairing is not
# perfect on a torus/sphere boundary)
INTERIOR_CONFIGS = {
    "solid_torus": ("solid_torus", 6, None),
    "ball": ("ball", 2, None),
}

ALL_CONFIGS = {**DN_CONFIGS, **INTERIOR_CONFIGS}

_cache = {}


def build(key):
    if key not in _cache:
        shape, res, s = ALL_CONFIGS[key]
        bundle = OperatorBundle(generators.generate(shape, res))
        if s is None:
            _cache[key] = GradedStructure.plain(bundle)
        else:
            _cache[key] = GradedStructure.product(bundle, s, 1)
    return _cache[key]


def build_dn(key):
    ck = ("dn", key)
    if ck not in _cache:
        st = build(key)
        _cache[ck] = {p: dn.assemble_dn(st, p) for p in (0, 1)}
    return _cache[ck]


def build_frame(key):
    ck = ("frame", key)
    if ck not in _cache:
        _cache[ck] = topology.ClassFrame(build(key))
    return _cache[ck]


@pytest.fixture(params=sorted(ALL_CONFIGS))
def any_config(request):
    return request.param


@pytest.fixture(params=sorted(DN_CONFIGS))
def dn_config(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(0)
