"""Seeded field generation and the FLD1 snapshot format."""

import json

import numpy as np
import pytest

import lplab as lp
from lplab.errors import DomainError, InvalidDataError
from lplab.field import l2_norm_spectral
from lplab.grid import Grid, SpectrumProfile
from lplab.snapshot import field_from_bytes, field_to_bytes, read_field, write_field


class TestRandomFields:
    def test_deterministic(self, grid16, profile16):
        a = lp.random_solenoidal(grid16, profile16, seed=42)
        b = lp.random_solenoidal(grid16, profile16, seed=42)
        assert np.array_equal(a.spec, b.spec)
        c = lp.random_solenoidal(grid16, profile16, seed=43)
        assert not np.array_equal(a.spec, c.spec)

    def test_roles_are_independent_streams(self, grid16, profile16):
        a = lp.random_solenoidal(grid16, profile16, seed=42, role=0)
        b = lp.random_solenoidal(grid16, profile16, seed=42, role=1)
        assert not np.array_equal(a.spec, b.spec)

    def test_divergence_free_and_mean_free(self, u16):
        assert l2_norm_spectral(lp.divergence(u16)) < 1e-12 * lp.sobolev_norm(u16, 1.0)
        assert u16.is_mean_free()

    def test_band_support(self, grid16):
        prof = SpectrumProfile(2.0, 2, 4)
        f = lp.random_scalar(grid16, prof, seed=3)
        r = grid16.k_radius
        outside = (r < 2 - 1e-9) | (r > 4 + 1e-9)
        assert np.max(np.abs(f.spec[0][outside])) == 0.0

    def test_spectral_slope(self):
        grid = Grid(3, 32)
        prof = SpectrumProfile(3.0, 1, grid.N // 3)
        f = lp.random_solenoidal(grid, prof, seed=11)
        slope = lp.fit_spectral_slope(f, 1, grid.N // 3)
        assert abs(slope - (-3.0)) < 0.5

    def test_empty_band_rejected(self, grid16):
        # integer bands with lo > hi never reach the lattice: rejected at construction
        with pytest.raises(DomainError):
            SpectrumProfile(2.0, 5, 4)
        # a band exceeding the dealias cutoff of the target grid is rejected at draw time
        with pytest.raises(DomainError):
            lp.random_scalar(grid16, SpectrumProfile(2.0, 1, 6), seed=0)

    def test_matched_band_refines_across_grids(self):
        prof = SpectrumProfile(2.0, 1, 5)
        a = lp.random_solenoidal(Grid(3, 16), prof, seed=9)
        b = lp.random_solenoidal(Grid(3, 32), prof, seed=9)
        # identical coefficients on the shared band
        assert lp.sobolev_norm(a, 1.5) == pytest.approx(lp.sobolev_norm(b, 1.5), rel=1e-13)

    def test_fields_refuse_cross_grid_arithmetic(self, grid16, grid32, profile16):
        a = lp.random_scalar(grid16, profile16, seed=1)
        b = lp.random_scalar(grid32, profile16, seed=1)
        with pytest.raises(lp.GridMismatchError):
            _ = a + b


class TestSnapshotFormat:
    def test_header_layout(self, grid16, profile16):
        u = lp.random_solenoidal(grid16, profile16, seed=5)
        blob = field_to_bytes(u)
        assert blob[:4] == b"FLD1"
        assert blob[4] == 3 and blob[5] == 3
        assert int.from_bytes(blob[6:10], "little") == 16
        assert len(blob) == 10 + 8 * 3 * 16**3

    def test_row_major_component_major_order(self, grid8):
        u = lp.mode_field(grid8, (0, 0, 1), m=2, component=1)
        blob = field_to_bytes(u)
        body = np.frombuffer(blob, dtype="<f8", offset=10)
        comp0, comp1 = body[: 8**3], body[8**3 :]
        assert np.max(np.abs(comp0)) == 0.0
        x = np.arange(8) * 2 * np.pi / 8
        assert np.allclose(comp1[:8], np.cos(x))  # last axis fastest

    def test_round_trip(self, u16):
        back = field_from_bytes(field_to_bytes(u16))
        assert back.grid == u16.grid and back.m == u16.m
        assert np.array_equal(back.phys, u16.phys)

    def test_rejects_corruption(self, u16):
        blob = bytearray(field_to_bytes(u16))
        blob[0:4] = b"XXXX"
        with pytest.raises(InvalidDataError):
            field_from_bytes(bytes(blob))
        with pytest.raises(InvalidDataError):
            field_from_bytes(field_to_bytes(u16)[:-8])

    def test_sidecar(self, tmp_path, u16):
        meta = {"seed": 7, "profile": {"alpha": 2.0}}
        path = write_field(tmp_path / "u.fld", u16, metadata=meta)
        loaded, loaded_meta = read_field(path)
        assert loaded_meta == meta
        assert json.loads((tmp_path / "u.fld.json").read_text()) == meta
        assert np.array_equal(loaded.phys, u16.phys)
