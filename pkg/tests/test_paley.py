"""Dyadic decomposition: partition, blocks, Besov norms, paraproducts."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import lplab as lp
from lplab.errors import DomainError, GridMismatchError, PreconditionError
from lplab.field import field_from_padded_physical, inner_l2, l2_norm_spectral, product_grid_size
from lplab.grid import Grid, SpectrumProfile
from lplab.paley import (
    BesovIndex,
    DyadicPartition,
    besov_norm,
    block_lp_norm,
    build_partition,
    check_partition,
    chi_profile,
    d_sequence,
    default_partition,
    dyadic_block,
    lattice_radii,
    low_cutoff,
    paraproduct,
    phi_profile,
    remainder,
)
from conftest import assert_close


class TestProfiles:
    def test_plateau_values(self):
        assert chi_profile(0.5) == 1.0
        assert chi_profile(0.75) == 1.0
        assert chi_profile(2.0) == 0.0
        assert chi_profile(4.0 / 3.0) == 0.0

    def test_phi_support(self):
        assert phi_profile(0.7) == 0.0
        assert phi_profile(2.7) == 0.0
        assert phi_profile(1.5) == 1.0
        rho = np.linspace(0.01, 3.0, 500)
        vals = phi_profile(rho)
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)

    def test_range_formula(self, grid32):
        part = build_partition(grid32)
        assert part.j_min == -2
        assert part.j_max == int(np.ceil(np.log2(np.sqrt(3) * 16))) + 1


class TestPartitionIdentities:
    def test_telescoping_sum_on_lattice(self, grid32):
        part = build_partition(grid32)
        rho = lattice_radii(grid32)
        rho = rho[rho > 0]
        total = sum(part.phi_at_scale(j, rho) for j in part.js)
        assert np.max(np.abs(total - 1.0)) < 1e-12

    def test_check_partition_default(self, grid32):
        rep = check_partition(build_partition(grid32), grid32)
        assert rep.max_violation < 1e-12
        assert rep.passes()

    def test_perturbed_phi_reported(self, grid32):
        part = build_partition(grid32)
        bad = DyadicPartition(part.j_min, part.j_max, phi=lambda r: 1.01 * phi_profile(r))
        rep = check_partition(bad, grid32)
        assert rep.block_sum == pytest.approx(0.01, rel=1e-6)
        assert not rep.passes()

    def test_truncated_range_reports_deficit(self, grid32):
        part = DyadicPartition(0, 2)
        rep = check_partition(part, grid32)
        assert rep.block_sum > 0.5
        # the smallest lattice radius is no longer covered
        deficit_at_one = abs(sum(part.phi_at_scale(j, np.array([1.0]))[0] for j in part.js) - 1.0)
        assert deficit_at_one > 0.5


class TestBlocks:
    def test_single_mode_two_adjacent_blocks(self, grid16):
        f = lp.mode_field(grid16, (1, 0, 0))
        part = default_partition(grid16)
        active = [j for j in part.js if l2_norm_spectral(dyadic_block(f, j)) > 0]
        assert 1 <= len(active) <= 2
        assert active == sorted(active) and active[-1] - active[0] <= 1
        total = lp.VectorField.zeros(grid16, 1)
        for j in part.js:
            total = total + dyadic_block(f, j)
        assert np.max(np.abs(total.spec - f.spec)) < 1e-14

    def test_blocks_disjoint_beyond_one_scale(self, scalar16):
        for j in (-1, 0, 1, 2):
            twice = dyadic_block(dyadic_block(scalar16, j), j + 2)
            assert np.max(np.abs(twice.spec)) == 0.0

    def test_almost_orthogonality(self, u16):
        b0 = dyadic_block(u16, 0)
        b2 = dyadic_block(u16, 2)
        assert inner_l2(b0, b2) == 0.0

    def test_reconstruction(self, u16):
        part = default_partition(u16.grid)
        total = lp.VectorField.zeros(u16.grid, 3)
        for j in part.js:
            total = total + dyadic_block(u16, j)
        assert l2_norm_spectral(total - u16) < 1e-12 * l2_norm_spectral(u16)

    def test_range_validation(self, u16):
        part = default_partition(u16.grid)
        with pytest.raises(DomainError):
            dyadic_block(u16, part.j_max + 1)
        with pytest.raises(DomainError):
            low_cutoff(u16, part.j_min - 1)


class TestCutoffs:
    def test_above_nyquist_is_identity(self, u16):
        part = default_partition(u16.grid)
        out = low_cutoff(u16, part.j_max)
        assert np.max(np.abs(out.spec - u16.spec)) < 1e-14

    def test_far_below_kills_band_limited(self, u16):
        out = low_cutoff(u16, -2)
        assert np.max(np.abs(out.spec)) == 0.0

    def test_equals_partial_block_sum(self, u16):
        part = default_partition(u16.grid)
        for j in (0, 2, 4):
            acc = lp.VectorField.zeros(u16.grid, 3)
            for jp in range(part.j_min, j):
                acc = acc + dyadic_block(u16, jp)
            cut = low_cutoff(u16, j)
            assert l2_norm_spectral(acc - cut) < 1e-12 * max(l2_norm_spectral(u16), 1e-300)


def single_block_field(grid, j0=2):
    """Spectrum confined to the plateau of one block (neighbors vanish)."""
    radius = int(round(1.5 * 2**j0))  # phi == 1 there
    f = lp.random_scalar(grid, SpectrumProfile(2.0, radius, radius), seed=5)
    part = default_partition(grid)
    for j in part.js:
        if j != j0:
            assert l2_norm_spectral(dyadic_block(f, j)) == 0.0
    return f


class TestBesovNorms:
    def test_single_block_every_r(self, grid32):
        f = single_block_field(grid32, j0=2)
        for p in (1.0, 2.0, np.inf):
            ref = 2.0 ** (2 * 1.7) * block_lp_norm(f, 2, p)
            for r in (1.0, 2.0, np.inf):
                assert_close(besov_norm(f, (1.7, p, r)), ref, 1e-13)

    def test_l2_equivalence_with_sobolev(self, grid32):
        f = lp.random_scalar(grid32, SpectrumProfile(2.0, 1, 10), seed=8)
        s = 1.5
        b22 = besov_norm(f, (s, 2.0, 2.0))
        h = lp.sobolev_norm(f, s)
        assert h / 2.0 <= b22 <= 2.0 * h
        b21 = besov_norm(f, (s, 2.0, 1.0))
        assert h <= 2.0 * b21

    @settings(max_examples=15, deadline=None)
    @given(
        r1=st.sampled_from([1.0, 1.5, 2.0, 4.0]),
        r2=st.sampled_from([1.0, 1.5, 2.0, 4.0, np.inf]),
        s=st.floats(min_value=-1.0, max_value=3.0),
    )
    def test_r_monotonicity(self, r1, r2, s):
        if r2 < r1:
            r1, r2 = r2, r1
        grid = Grid(2, 16)
        f = lp.random_scalar(grid, SpectrumProfile(2.0, 1, 5), seed=4)
        assert besov_norm(f, (s, 2.0, r2)) <= besov_norm(f, (s, 2.0, r1)) * (1 + 1e-12)

    def test_index_validation(self):
        with pytest.raises(DomainError):
            BesovIndex(1.0, 0.5, 1.0)
        with pytest.raises(DomainError):
            BesovIndex(1.0, 2.0, 0.0)


class TestDSequence:
    def test_single_block_delta(self, grid32):
        f = single_block_field(grid32, j0=2)
        seq = d_sequence(f, (2.5, 2.0, 1.0))
        d = seq.as_dict()
        assert d[2] == pytest.approx(1.0, abs=1e-12)
        assert all(v == 0.0 for j, v in d.items() if j != 2)

    def test_normalization(self, scalar16):
        for r in (1.0, 2.0, np.inf):
            seq = d_sequence(scalar16, (2.5, 2.0, r))
            assert np.all(seq.values >= 0.0)
            if np.isinf(r):
                norm = np.max(seq.values)
            else:
                norm = np.sum(seq.values**r) ** (1.0 / r)
            assert norm == pytest.approx(1.0, abs=1e-10)

    def test_zero_field_rejected(self, grid16):
        with pytest.raises(DomainError):
            d_sequence(lp.VectorField.zeros(grid16, 1), (2.5, 2.0, 1.0))


class TestParaproducts:
    def test_zero_factor(self, scalar16):
        z = lp.VectorField.zeros(scalar16.grid, 1)
        assert l2_norm_spectral(paraproduct(scalar16, z)) == 0.0
        assert l2_norm_spectral(paraproduct(z, scalar16)) < 1e-14

    def test_linearity(self, grid16, profile16):
        u = lp.random_scalar(grid16, profile16, seed=1)
        v1 = lp.random_scalar(grid16, profile16, seed=2)
        v2 = lp.random_scalar(grid16, profile16, seed=3)
        lhs = paraproduct(u, v1 + v2)
        rhs = paraproduct(u, v1) + paraproduct(u, v2)
        assert l2_norm_spectral(lhs - rhs) < 1e-12 * max(l2_norm_spectral(lhs), 1e-300)

    def test_low_high_separation(self, grid32):
        u = lp.mode_field(grid32, (1, 0, 0))  # low frequency
        v = single_block_field(grid32, j0=2)  # block at scale 4..8
        M = product_grid_size(grid32, 11)
        product = field_from_padded_physical(grid32, u.phys_padded(M) * v.phys_padded(M))
        tuv = paraproduct(u, v)
        assert l2_norm_spectral(tuv - product) < 1e-10 * l2_norm_spectral(product)
        tvu = paraproduct(v, u)
        assert l2_norm_spectral(tvu) < 1e-14

    def test_validation(self, grid16, grid32, profile16):
        a = lp.random_scalar(grid16, profile16, seed=1)
        b = lp.random_scalar(grid32, profile16, seed=1)
        with pytest.raises(GridMismatchError):
            paraproduct(a, b)
        vec = lp.random_solenoidal(grid16, profile16, seed=2)
        with pytest.raises(PreconditionError):
            paraproduct(vec, a)
        const = lp.VectorField.from_physical(grid16, np.ones((1,) + grid16.physical_shape))
        with pytest.raises(PreconditionError):
            paraproduct(const, a)


class TestRemainder:
    def test_symmetry(self, grid16, profile16):
        u = lp.random_scalar(grid16, profile16, seed=1)
        v = lp.random_scalar(grid16, profile16, seed=2)
        r1 = remainder(u, v)
        r2 = remainder(v, u)
        assert l2_norm_spectral(r1 - r2) < 1e-12 * max(l2_norm_spectral(r1), 1e-300)

    def test_disjoint_scales_vanish(self):
        grid = Grid(3, 64)
        u = single_block_field(grid, j0=1)
        v = single_block_field(grid, j0=3)
        assert l2_norm_spectral(remainder(u, v)) == 0.0

    def test_bony_identity(self, grid16):
        prof = SpectrumProfile(2.0, 1, 5)
        u = lp.random_scalar(grid16, prof, seed=21)
        v = lp.random_scalar(grid16, prof, seed=22)
        M = product_grid_size(grid16, 10)
        uv = field_from_padded_physical(grid16, u.phys_padded(M) * v.phys_padded(M))
        recon = paraproduct(u, v) + paraproduct(v, u) + remainder(u, v)
        residual = l2_norm_spectral(uv - recon)
        scale = lp.lp_norm(u, np.inf) * lp.lp_norm(v, 2)
        assert residual < 1e-10 * scale
