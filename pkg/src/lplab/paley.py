"""Dyadic frequency decomposition: blocks, cutoffs, Besov norms, paraproducts.

The radial partition of unity is built from a single smooth cutoff profile
``chi`` (1 on |xi| <= 3/4, 0 on |xi| >= 4/3) with the annulus profile
obtained by telescoping, ``phi(xi) = chi(xi/2) - chi(xi)``.  The four
partition identities then hold by construction and are still checked
numerically by :func:`check_partition`.

All block multipliers are applied spectrally; block L^p norms use Parseval
for p = 2 and padded-grid quadrature otherwise (band-limited blocks are
sampled more densely there, which matters for p = infinity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, GridMismatchError, PreconditionError
from .field import (
    VectorField,
    axis_content,
    field_from_padded_physical,
    lp_norm,
    padded_physical_array,
    product_grid_size,
)
from .grid import Grid

SUPPORT_LO = 0.75  # chi == 1 below this radius
SUPPORT_HI = 4.0 / 3.0  # chi == 0 above this radius


def _bump(x: np.ndarray) -> np.ndarray:
    """exp(-1/x) continued by 0 for x <= 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_step(x: np.ndarray) -> np.ndarray:
    """C^infinity transition: 0 for x <= 0, 1 for x >= 1."""
    g0 = _bump(x)
    g1 = _bump(1.0 - np.asarray(x, dtype=np.float64))
    return g0 / (g0 + g1)


def chi_profile(rho: np.ndarray) -> np.ndarray:
    """Radial low-pass profile: 1 on [0, 3/4], 0 on [4/3, inf)."""
    rho = np.asarray(rho, dtype=np.float64)
    t = (rho - SUPPORT_LO) / (SUPPORT_HI - SUPPORT_LO)
    return 1.0 - smooth_step(t)


def phi_profile(rho: np.ndarray) -> np.ndarray:
    """Annulus profile supported in [3/4, 8/3], by telescoping chi."""
    rho = np.asarray(rho, dtype=np.float64)
    return chi_profile(rho / 2.0) - chi_profile(rho)


@dataclass(frozen=True)
class DyadicPartition:
    """Radial partition of unity with its resolved block range."""

    j_min: int
    j_max: int
    chi: Callable[[np.ndarray], np.ndarray] = chi_profile
    phi: Callable[[np.ndarray], np.ndarray] = phi_profile

    def __post_init__(self) -> None:
        if self.j_max < self.j_min:
            raise DomainError(f"empty block range [{self.j_min}, {self.j_max}]")

    @property
    def js(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def contains(self, j: int) -> bool:
        return self.j_min <= j <= self.j_max

    def phi_at_scale(self, j: int, rho: np.ndarray) -> np.ndarray:
        return self.phi(np.asarray(rho, dtype=np.float64) * 2.0 ** (-j))

    def chi_at_scale(self, j: int, rho: np.ndarray) -> np.ndarray:
        return self.chi(np.asarray(rho, dtype=np.float64) * 2.0 ** (-j))


def build_partition(grid: Grid) -> DyadicPartition:
    """Standard partition covering all nonzero lattice radii of ``grid``."""
    j_max = math.ceil(math.log2(math.sqrt(grid.n) * grid.N / 2.0)) + 1
    return DyadicPartition(j_min=-2, j_max=j_max)


@lru_cache(maxsize=64)
def _default_partition(grid: Grid) -> DyadicPartition:
    return build_partition(grid)


def default_partition(grid: Grid) -> DyadicPartition:
    return _default_partition(grid)


class _PartitionTables:
    """Per-(partition, grid) cache of tabulated multipliers."""

    def __init__(self, partition: DyadicPartition, grid: Grid):
        self.partition = partition
        self.grid = grid
        self._phi: dict[int, np.ndarray] = {}
        self._chi: dict[int, np.ndarray] = {}
        self._active: dict[int, bool] = {}

    def phi_j(self, j: int) -> np.ndarray:
        tab = self._phi.get(j)
        if tab is None:
            tab = self.partition.phi_at_scale(j, self.grid.k_radius)
            tab.setflags(write=False)
            self._phi[j] = tab
            self._active[j] = bool(np.any(tab != 0.0))
        return tab

    def chi_j(self, j: int) -> np.ndarray:
        tab = self._chi.get(j)
        if tab is None:
            tab = self.partition.chi_at_scale(j, self.grid.k_radius)
            tab.setflags(write=False)
            self._chi[j] = tab
        return tab

    def active(self, j: int) -> bool:
        if j not in self._active:
            self.phi_j(j)
        return self._active[j]

    def active_js(self) -> list[int]:
        return [j for j in self.partition.js if self.active(j)]


@lru_cache(maxsize=64)
def _tables(partition: DyadicPartition, grid: Grid) -> _PartitionTables:
    return _PartitionTables(partition, grid)


def _resolve(f: VectorField, partition: DyadicPartition | None) -> _PartitionTables:
    part = partition if partition is not None else default_partition(f.grid)
    return _tables(part, f.grid)


# -- blocks and cutoffs -------------------------------------------------------


def dyadic_block(f: VectorField, j: int, partition: DyadicPartition | None = None) -> VectorField:
    """Frequency localization of ``f`` to the annulus ``2**j * [3/4, 8/3]``."""
    tab = _resolve(f, partition)
    if not tab.partition.contains(j):
        raise DomainError(f"block index {j} outside range [{tab.partition.j_min}, {tab.partition.j_max}]")
    return VectorField.from_spectral(f.grid, f.spec * tab.phi_j(j))


def low_cutoff(f: VectorField, j: int, partition: DyadicPartition | None = None) -> VectorField:
    """Frequency localization of ``f`` below scale ``2**j`` (chi multiplier)."""
    tab = _resolve(f, partition)
    if not tab.partition.contains(j):
        raise DomainError(f"cutoff index {j} outside range [{tab.partition.j_min}, {tab.partition.j_max}]")
    return VectorField.from_spectral(f.grid, f.spec * tab.chi_j(j))


# -- Besov norms --------------------------------------------------------------


@dataclass(frozen=True)
class BesovIndex:
    """Regularity / integrability / summability triple (s, p, r)."""

    s: float
    p: float
    r: float

    def __post_init__(self) -> None:
        if self.p < 1 or self.r < 1:
            raise DomainError(f"p and r must be >= 1, got p={self.p}, r={self.r}")


def _as_index(idx) -> BesovIndex:
    if isinstance(idx, BesovIndex):
        return idx
    return BesovIndex(*idx)


def block_lp_norm(f: VectorField, j: int, p: float, partition: DyadicPartition | None = None) -> float:
    """L^p norm of one dyadic block (Parseval for p=2, padded grid otherwise)."""
    tab = _resolve(f, partition)
    if not tab.active(j):
        return 0.0
    mult = tab.phi_j(j)
    if p == 2:
        grid = f.grid
        power = np.sum(grid.hermitian_weights * mult**2 * (f.spec.real**2 + f.spec.imag**2))
        return float(np.sqrt(grid.volume * power))
    block = VectorField.from_spectral(f.grid, f.spec * mult)
    return lp_norm(block, p, oversample=True)


class BlockSeries(NamedTuple):
    """Values indexed by block scale j."""

    js: np.ndarray
    values: np.ndarray

    def as_dict(self) -> dict[int, float]:
        return {int(j): float(v) for j, v in zip(self.js, self.values)}


def block_norm_series(f: VectorField, p: float, partition: DyadicPartition | None = None) -> BlockSeries:
    tab = _resolve(f, partition)
    js = np.array(list(tab.partition.js), dtype=int)
    vals = np.array([block_lp_norm(f, int(j), p, tab.partition) for j in js])
    return BlockSeries(js, vals)


def besov_norm(f: VectorField, idx, partition: DyadicPartition | None = None) -> float:
    """Homogeneous Besov norm: the l^r sum of ``2**(j s) ||block_j||_p``.

    A seminorm: the mean mode lies in no block and never contributes.
    """
    index = _as_index(idx)
    series = block_norm_series(f, index.p, partition)
    weighted = 2.0 ** (series.js * index.s) * series.values
    if np.isinf(index.r):
        return float(np.max(weighted)) if weighted.size else 0.0
    return float(np.sum(weighted**index.r) ** (1.0 / index.r))


def d_sequence(f: VectorField, idx, partition: DyadicPartition | None = None) -> BlockSeries:
    """Normalized block weights ``d_j = 2**(js) ||block_j||_p / ||f||_Besov``.

    The sequence has unit l^r norm by construction.
    """
    index = _as_index(idx)
    series = block_norm_series(f, index.p, partition)
    weighted = 2.0 ** (series.js * index.s) * series.values
    if np.isinf(index.r):
        total = float(np.max(weighted)) if weighted.size else 0.0
    else:
        total = float(np.sum(weighted**index.r) ** (1.0 / index.r))
    if total <= 0.0:
        raise DomainError("d-sequence of the zero field is undefined")
    return BlockSeries(series.js, weighted / total)


# -- paraproducts -------------------------------------------------------------


def _check_pair(u: VectorField, v: VectorField) -> None:
    if u.grid != v.grid:
        raise GridMismatchError("paraproduct factors must share a grid")
    if u.m != 1 or v.m != 1:
        raise PreconditionError("paraproducts are defined for scalar fields")
    if not (u.is_mean_free() and v.is_mean_free()):
        raise PreconditionError("paraproduct factors must be mean-free")


def _padded_block_physicals(f: VectorField, tab: _PartitionTables, M: int) -> dict[int, np.ndarray]:
    out = {}
    for j in tab.active_js():
        out[j] = padded_physical_array(f.spec[0] * tab.phi_j(j), f.grid, M)
    return out


def paraproduct(u: VectorField, v: VectorField, partition: DyadicPartition | None = None) -> VectorField:
    """Low-high part of the product: sum_j (cutoff_{j-1} u) (block_j v).

    Products are evaluated pointwise on the padded grid and truncated back;
    the low cutoff is accumulated by telescoping the blocks of ``u``, which
    agrees with the chi multiplier exactly on mean-free lattice data.
    """
    _check_pair(u, v)
    tab = _resolve(u, partition)
    part = tab.partition
    grid = u.grid
    M = product_grid_size(grid, axis_content(u.spec, grid) + axis_content(v.spec, grid))
    u_blocks = _padded_block_physicals(u, tab, M)
    acc = np.zeros((M,) * grid.n)
    low = np.zeros((M,) * grid.n)
    added_to = part.j_min - 1  # blocks <= added_to are in `low`
    for j in part.js:
        target = j - 2
        while added_to < target:
            added_to += 1
            blk = u_blocks.get(added_to)
            if blk is not None:
                low = low + blk
        if tab.active(j):
            acc += low * padded_physical_array(v.spec[0] * tab.phi_j(j), grid, M)
    return field_from_padded_physical(grid, acc[np.newaxis])


def remainder(u: VectorField, v: VectorField, partition: DyadicPartition | None = None) -> VectorField:
    """Frequency-balanced part of the product: blocks within one scale."""
    _check_pair(u, v)
    tab = _resolve(u, partition)
    grid = u.grid
    M = product_grid_size(grid, axis_content(u.spec, grid) + axis_content(v.spec, grid))
    u_blocks = _padded_block_physicals(u, tab, M)
    v_blocks = _padded_block_physicals(v, tab, M)
    acc = np.zeros((M,) * grid.n)
    for k, ub in u_blocks.items():
        for j in (k - 1, k, k + 1):
            vb = v_blocks.get(j)
            if vb is not None:
                acc += ub * vb
    return field_from_padded_physical(grid, acc[np.newaxis])


# -- partition verification ---------------------------------------------------


@dataclass(frozen=True)
class PartitionReport:
    """Worst-case deviations of the four partition identities on a lattice."""

    low_plus_blocks: float  # | chi + sum_{j>=0} phi_j - 1 |, all radii
    block_sum: float  # | sum_j phi_j - 1 |, nonzero radii
    disjoint_blocks: float  # max phi_j phi_j' over |j-j'| >= 2
    low_clears_blocks: float  # max chi phi_j over j >= 1
    worst_block_sum_radius: float

    @property
    def max_violation(self) -> float:
        return max(self.low_plus_blocks, self.block_sum, self.disjoint_blocks, self.low_clears_blocks)

    def passes(self, tol: float = 1e-12) -> bool:
        return self.max_violation < tol


def lattice_radii(grid: Grid) -> np.ndarray:
    """Sorted distinct values of |k| over the wavevector lattice."""
    return np.unique(grid.k_radius)


def check_partition(partition: DyadicPartition, grid: Grid) -> PartitionReport:
    """Evaluate the four partition-of-unity identities on every lattice radius."""
    rho = lattice_radii(grid)
    nz = rho[rho > 0]
    js = list(partition.js)
    phis = {j: partition.phi_at_scale(j, nz) for j in js}
    chi0 = partition.chi(nz)

    total = np.zeros_like(nz)
    for j in js:
        total += phis[j]
    block_sum = float(np.max(np.abs(total - 1.0))) if nz.size else 0.0
    worst_radius = float(nz[np.argmax(np.abs(total - 1.0))]) if nz.size else 0.0

    nonneg = np.zeros_like(rho)
    for j in js:
        if j >= 0:
            nonneg += partition.phi_at_scale(j, rho)
    low_plus = float(np.max(np.abs(partition.chi(rho) + nonneg - 1.0)))

    disjoint = 0.0
    for a_pos, j in enumerate(js):
        for jp in js[a_pos + 2 :]:
            overlap = float(np.max(phis[j] * phis[jp])) if nz.size else 0.0
            disjoint = max(disjoint, overlap)

    clears = 0.0
    for j in js:
        if j >= 1:
            clears = max(clears, float(np.max(chi0 * phis[j])) if nz.size else 0.0)

    return PartitionReport(
        low_plus_blocks=low_plus,
        block_sum=block_sum,
        disjoint_blocks=disjoint,
        low_clears_blocks=clears,
        worst_block_sum_radius=worst_radius,
    )
