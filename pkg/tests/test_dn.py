"""Boundary flux operator: algebraic identities, kernel/range, recovery."""

import numpy as np
import pytest
from conftest import DN_CONFIGS, build, build_dn

from hodgedn import dn, linalg
from hodgedn.errors import OutOfDomain, SolverFailure


def test_assembly_residuals(dn_config):
    maps = build_dn(dn_config)
    for p, mp in maps.items():
        assert mp.residuals["constrained_solve"] < 1e-7
        assert mp.residuals["symmetry"] < 1e-9 * max(
            1.0, float(np.linalg.norm(mp.flux_gram)))


def test_flux_gram_positive_semidefinite(dn_config):
    maps = build_dn(dn_config)
    for mp in maps.values():
        if mp.flux_gram.size:
            w = np.linalg.eigvalsh(0.5 * (mp.flux_gram + mp.flux_gram.T))
            assert w.min(initial=0.0) >= -1e-10 * max(w.max(initial=1.0), 1.0)


def test_operator_squares_to_zero(dn_config):
    maps = build_dn(dn_config)
    for p, mp in maps.items():
        comp = maps[mp.out_parity].matrix @ mp.matrix
        scale = max(np.linalg.norm(maps[mp.out_parity].matrix) *
                    np.linalg.norm(mp.matrix), 1e-300)
        assert np.linalg.norm(comp) / scale < 1e-7


def test_kills_and_lands_in_closed_cochains(dn_config):
    st = build(dn_config)
    maps = build_dn(dn_config)
    bd = st.boundary
    for p, mp in maps.items():
        Dpre = bd.D(1 - p).toarray()
        scale = max(np.linalg.norm(mp.matrix), 1.0)
        assert np.linalg.norm(mp.matrix @ Dpre) <= (
            1e-7 * scale * max(np.linalg.norm(Dpre), 1.0))
        Dpost = bd.D(mp.out_parity).toarray()
        assert np.linalg.norm(Dpost @ mp.matrix) <= (
            1e-7 * scale * max(np.linalg.norm(Dpost), 1.0))


def test_kernel_equals_closed_traces(dn_config):
    maps = build_dn(dn_config)
    for p, mp in maps.items():
        ker = mp.kernel_basis()
        assert ker.shape[1] == mp.W_in.shape[1]
        angles = linalg.principal_angles(ker, mp.W_in)
        assert angles.max(initial=0.0) < 1e-6


def test_range_inside_complementary_closed_traces(dn_config):
    maps = build_dn(dn_config)
    for p, mp in maps.items():
        if mp.rank == 0:
            continue
        ran = mp.range_basis()
        # W_out is orthonormal in the boundary mass inner product
        Mb = maps[p].structure.boundary.M(mp.out_parity)
        proj = mp.W_out @ (mp.W_out.T @ (Mb @ ran))
        assert np.linalg.norm(ran - proj) < 1e-8 * max(np.linalg.norm(ran), 1.0)


def test_energy_pairing_nonnegative(dn_config, rng):
    st = build(dn_config)
    maps = build_dn(dn_config)
    bd = st.boundary
    for p, mp in maps.items():
        for _ in range(20):
            theta = rng.standard_normal(mp.matrix.shape[1])
            val = float(bd.integral(
                bd.wedge(p, theta, mp.out_parity, mp.matrix @ theta)))
            assert val >= -1e-7 * max(theta @ theta, 1.0)


def test_quotient_dimension_bound(dn_config):
    st = build(dn_config)
    maps = build_dn(dn_config)
    bd = st.boundary
    for p, mp in maps.items():
        ka = dn.kernel_range_analysis(mp, maps[mp.out_parity])
        bound = min(bd.exact_betti(p), st.exact_betti(p))
        assert ka["quotient_dim"] <= bound


def test_recovery_rank_matches_oracle(dn_config):
    st = build(dn_config)
    maps = build_dn(dn_config)
    for p in (0, 1):
        pc = (st.n - p) % 2
        _, info = dn.recovery_operator(maps[p], maps[pc])
        assert info["rank"] == st.exact_betti((st.n + 1 + p) % 2)
        assert info["correction_on_closed"] < 1e-10


def test_hilbert_transform_domain_guard(dn_config, rng):
    st = build(dn_config)
    maps = build_dn(dn_config)
    from hodgedn import bvp, topology
    for p, mp in maps.items():
        nb = mp.matrix.shape[1]
        out_dim = mp.matrix.shape[0]
        if out_dim == 0:
            continue
        harmonic = bvp.harmonic_spaces(st, mp.out_parity)
        phi = mp.matrix @ rng.standard_normal(nb)
        # in-range data must be accepted
        dn.hilbert_transform(mp, phi, harmonic)
        # generic data is not in ran + trace(harmonics) unless that space
        # is everything
        dom_dim = mp.rank + harmonic.HN.shape[1]
        if dom_dim < out_dim:
            bad = rng.standard_normal(out_dim)
            with pytest.raises(OutOfDomain):
                dn.hilbert_transform(mp, bad, harmonic)


def test_torus_boundary_not_representable():
    # on a 3-manifold with torus boundary the closed-trace spaces of the two
    # parities cannot pair perfectly, and assembly must refuse
    from hodgedn import generators
    from hodgedn.bundle import OperatorBundle
    from hodgedn.graded import GradedStructure
    st = GradedStructure.plain(OperatorBundle(
        generators.generate("solid_torus", 4)))
    with pytest.raises(SolverFailure):
        dn.assemble_dn(st, 0)
