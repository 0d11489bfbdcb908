"""Seeded random field generation with a portable counter-based stream.

Recipe (documented so other implementations can reproduce the fields):

1. The stream is Philox4x64-10 keyed with ``(seed, role)``; ``role``
   distinguishes independently drawn fields inside one sample (0 for the
   first field, 1 for the second, ...).  64-bit words are mapped to
   doubles in [0, 1) by ``word >> 11`` times ``2**-53`` (numpy's
   ``Generator.random``).
2. Uniform pairs are converted to standard normals by the Box-Muller map
   ``z1 = sqrt(-2 log u1) cos(2 pi u2)``, ``z2 = ... sin(...)``.
3. Normals fill a C-ordered array of shape ``(m, C, ..., C, 2)`` where
   ``C = 2*k_hi + 1`` indexes wavevector components ``-k_hi .. k_hi``
   (axis index ``k + k_hi``), and the trailing axis is (Re, Im).
4. The complex coefficient at wavevector k is ``(Re + i Im)/sqrt(2)``
   scaled by the profile standard deviation at radius |k| (zero outside
   the band), then Hermitian-symmetrized via ``(c(k) + conj(c(-k)))/2``,
   embedded into the grid spectrum, mean-zeroed, and (for velocity
   fields) Leray-projected.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .field import VectorField, leray_project, zero_mean
from .grid import Grid, SpectrumProfile


def _standard_normals(seed: int, role: int, shape: tuple[int, ...]) -> np.ndarray:
    """Box-Muller normals from a Philox stream keyed by (seed, role)."""
    bitgen = np.random.Philox(key=np.array([seed, role], dtype=np.uint64))
    rng = np.random.Generator(bitgen)
    u = rng.random(shape + (2,))
    radius = np.sqrt(-2.0 * np.log1p(-u[..., 0]))  # log1p avoids log(0)
    angle = 2.0 * np.pi * u[..., 1]
    out = np.empty(shape + (2,))
    out[..., 0] = radius * np.cos(angle)
    out[..., 1] = radius * np.sin(angle)
    return out


def _band_coefficients(grid: Grid, profile: SpectrumProfile, seed: int, role: int, m: int) -> np.ndarray:
    """Hermitian-symmetric coefficients on the band cube, embedded in the grid."""
    profile.validate_for(grid)
    C = 2 * profile.k_hi + 1
    cube_shape = (m,) + (C,) * grid.n
    z = _standard_normals(seed, role, cube_shape)
    coeff = (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)

    axes_k = np.arange(C) - profile.k_hi
    grids = np.meshgrid(*([axes_k] * grid.n), indexing="ij")
    radius = np.sqrt(sum(g.astype(np.float64) ** 2 for g in grids))
    if not np.any((radius >= profile.k_lo) & (radius <= profile.k_hi)):
        raise DomainError(f"band [{profile.k_lo}, {profile.k_hi}] contains no lattice point")
    coeff *= profile.std_at(radius)

    # Hermitian symmetrization: reverse every spatial axis to index -k.
    rev = coeff[(slice(None),) + (slice(None, None, -1),) * grid.n]
    coeff = 0.5 * (coeff + np.conj(rev))

    # Embed into the half-spectrum: keep k_last >= 0, wrap full axes mod N.
    spec = np.zeros((m,) + grid.spectral_shape, dtype=np.complex128)
    half = coeff[..., profile.k_hi :]  # k_last = 0 .. k_hi
    src_idx = [axes_k % grid.N] * (grid.n - 1)
    dst = np.ix_(np.arange(m), *src_idx, np.arange(profile.k_hi + 1))
    spec[dst] = half
    return spec


def random_field(
    grid: Grid,
    profile: SpectrumProfile,
    seed: int,
    m: int = 1,
    role: int = 0,
    solenoidal: bool = False,
) -> VectorField:
    """Random zero-mean field with the given shell spectrum."""
    spec = _band_coefficients(grid, profile, seed, role, m)
    f = VectorField.from_spectral(grid, spec)
    f = zero_mean(f)
    if solenoidal:
        if m != grid.n:
            raise DomainError(f"solenoidal fields need m = n = {grid.n} components")
        f = zero_mean(leray_project(f))
    return f


def random_solenoidal(grid: Grid, profile: SpectrumProfile, seed: int, role: int = 0) -> VectorField:
    """Random divergence-free velocity field (Leray-projected Gaussians)."""
    return random_field(grid, profile, seed, m=grid.n, role=role, solenoidal=True)


def random_scalar(grid: Grid, profile: SpectrumProfile, seed: int, role: int = 0) -> VectorField:
    """Random zero-mean scalar field with the given shell spectrum."""
    return random_field(grid, profile, seed, m=1, role=role)


def shell_spectrum(f: VectorField, k_max: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """RMS coefficient magnitude per integer shell (shells by rounded |k|)."""
    grid = f.grid
    if k_max is None:
        k_max = grid.N // 2
    shells = np.rint(grid.k_radius).astype(int)
    w = grid.hermitian_weights
    power = np.sum(w * (f.spec.real**2 + f.spec.imag**2), axis=0)
    counts = np.zeros(k_max + 1)
    sums = np.zeros(k_max + 1)
    sel = shells <= k_max
    np.add.at(counts, shells[sel], (w * f.m * np.ones_like(power))[sel])
    np.add.at(sums, shells[sel], power[sel])
    radii = np.arange(k_max + 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        rms = np.sqrt(sums / counts)
    return radii, rms


def fit_spectral_slope(f: VectorField, k_lo: int, k_hi: int) -> float:
    """Least-squares slope of log(shell RMS) against log(shell radius)."""
    radii, rms = shell_spectrum(f, k_hi)
    sel = (radii >= max(k_lo, 1)) & (radii <= k_hi) & np.isfinite(rms) & (rms > 0)
    x = np.log(radii[sel].astype(float))
    y = np.log(rms[sel])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)
