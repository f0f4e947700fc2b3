"""Exact sequence, comparison diagram, cup product, equivariant summary."""

import numpy as np
import pytest
from conftest import DN_CONFIGS, build, build_dn, build_frame

from hodgedn import generators, topology
from hodgedn.bundle import OperatorBundle
from hodgedn.graded import GradedStructure


def _sequence(key):
    st = build(key)
    return topology.check_exact_sequence(st, dn_maps=build_dn(key),
                                         frame=build_frame(key))


def test_sequence_exact_everywhere(dn_config):
    chk = _sequence(dn_config)
    assert chk.passed
    for entry in chk.exactness:
        assert entry["exact"], entry
        assert entry["rank_in"] == entry["dim_kernel"], entry


def test_sequence_commutativity_machine_exact(dn_config):
    chk = _sequence(dn_config)
    assert chk.max_commutativity < 1e-10
    assert chk.max_angle <= 1e-6


def test_class_functionals_kill_coboundaries(dn_config, rng):
    # absolute class coordinates of an exact cochain are machine zero: the
    # whole sequence construction rests on this
    st = build(dn_config)
    frame = build_frame(dn_config)
    for p in (0, 1):
        v = st.D(1 - p) @ rng.standard_normal(st.dim(1 - p))
        coords = frame.abs_coords(p, v)
        assert np.linalg.norm(coords) < 1e-10 * max(np.linalg.norm(v), 1.0)


def test_relative_class_kills_trace_free_coboundaries(dn_config, rng):
    st = build(dn_config)
    frame = build_frame(dn_config)
    for p in (0, 1):
        ii = st.interior(1 - p)
        x = np.zeros(st.dim(1 - p))
        x[ii] = rng.standard_normal(len(ii))
        w = st.D(1 - p) @ x
        coords = frame.rel_coords(p, w)
        assert np.linalg.norm(coords) < 1e-9 * max(np.linalg.norm(w), 1.0)


def test_boundary_class_kills_boundary_coboundaries(dn_config, rng):
    st = build(dn_config)
    frame = build_frame(dn_config)
    bd = st.boundary
    for p in (0, 1):
        theta = bd.D(1 - p) @ rng.standard_normal(bd.dim(1 - p))
        coords = frame.bd_coords(p, theta)
        assert np.linalg.norm(coords) < 1e-10 * max(np.linalg.norm(theta), 1.0)


def test_node_coordinate_extraction_exact(dn_config):
    st = build(dn_config)
    frame = build_frame(dn_config)
    for a in (0, 1):
        U = frame.node_basis(a)
        for j in range(U.shape[1]):
            coords, resid = frame.node_coords(a, U[:, j])
            e = np.zeros(U.shape[1])
            e[j] = 1.0
            assert np.allclose(coords, e, atol=1e-9)
            assert resid < 1e-9


def test_cup_product_disk_machine_exact():
    recs = topology.cup_product_residuals(
        build("disk"), dn_maps=build_dn("disk"), frame=build_frame("disk"),
        rng=np.random.default_rng(0))
    nonvac = [r for r in recs if not r["vacuous"]]
    assert nonvac, "disk must provide a nonvacuous cup pair"
    assert max(r["residual"] for r in nonvac) < 1e-10


def test_cup_product_annulus_converges():
    coarse = build("annulus")
    fine = GradedStructure.plain(OperatorBundle(
        generators.generate("annulus", 16)))
    report = topology.check_cup_product(coarse, fine,
                                        rng=np.random.default_rng(0))
    assert report["passed"]
    assert report["fine_residual"] <= 5e-2
    assert report["ratio"] >= 1.33


def test_cup_product_vacuous_configs_reported():
    from hodgedn.errors import EmptyBoundarySubspace
    key = "interval_x_s1_s1"
    recs = topology.cup_product_residuals(
        build(key), dn_maps=build_dn(key), frame=build_frame(key),
        rng=np.random.default_rng(0))
    assert all(r["vacuous"] for r in recs)
    with pytest.raises(EmptyBoundarySubspace):
        topology.check_cup_product(build(key), build(key),
                                   rng=np.random.default_rng(0))


def test_equivariant_rotation_ranks():
    def make(shape, res):
        def f(s):
            return GradedStructure.product(
                OperatorBundle(generators.generate(shape, res)), s, 1)
        return f

    for shape, res in (("interval", 8), ("square", 4), ("disk", 3)):
        rep = topology.equivariant_report(make(shape, res), 1)
        assert rep["passed"], rep
        for row in rep["rows"]:
            if row["s"] != 0:
                assert row["rank"] == 0
            assert row["rank"] == row["expected"]


def test_five_term_dims_all_configs(any_config):
    table = topology.five_term_dims(build(any_config))
    for p in (0, 1):
        e = table[p]
        assert e["full"] == e["neumann"] + e["dirichlet"] + e["exact_coexact"]


def test_boundary_harmonics_match_oracle(dn_config):
    st = build(dn_config)
    bd = st.boundary
    for p in (0, 1):
        H = topology.boundary_harmonics(st, p)
        assert H.shape[1] == bd.exact_betti(p)
