"""Advection nonlinearity and the commutator objects built from it.

Every pointwise product is evaluated on the 3/2-padded grid and truncated
back to the stored lattice, so the operations here are exact convolutions
of the stored spectra.  Fractional-derivative commutators, block-advection
commutators, and the four-term decomposition of the block commutator all
live here; the ensemble statistics built on top live in :mod:`lplab.ineq`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import DomainError
from .field import (
    VectorField,
    axis_content,
    derivative_spec,
    field_from_padded_physical,
    inner_l2,
    l2_norm_spectral,
    lambda_s,
    lp_norm,
    padded_physical_array,
    product_grid_size,
    require_solenoidal,
    sobolev_norm,
    zero_mean,
    _check_same_grid,
)
from .paley import DyadicPartition, _resolve, dyadic_block, paraproduct, remainder

# A sample is degenerate when its right-hand side is this small relative to
# the sample scale; ratios are not formed for degenerate samples.
DEGENERACY_REL = 1e-14


@dataclass(frozen=True)
class CommutatorSample:
    """One measured (LHS, RHS) pair of a bilinear/trilinear estimate."""

    label: str
    s: float
    s1: float | None
    s2: float | None
    lhs: float
    rhs: float
    degenerate: bool
    flags: dict = dc_field(default_factory=dict)

    @property
    def ratio(self) -> float:
        if self.degenerate:
            return float("nan")
        return self.lhs / self.rhs


def _make_sample(label: str, s: float, s1, s2, lhs: float, rhs: float, **flags) -> CommutatorSample:
    degenerate = rhs <= DEGENERACY_REL * max(lhs, rhs)
    return CommutatorSample(label, s, s1, s2, lhs, rhs, degenerate, dict(flags))


# -- advection ----------------------------------------------------------------


def advect(u: VectorField, v: VectorField, check: bool = True) -> VectorField:
    """Convective derivative ``(u . grad) v`` with dealiased products.

    ``u`` must be solenoidal (within the documented tolerance); the mean
    mode of the result is removed.
    """
    _check_same_grid(u, v)
    grid = u.grid
    if u.m != grid.n:
        raise DomainError(f"advecting field needs m = n = {grid.n} components, got {u.m}")
    if check:
        require_solenoidal(u, "advection")
    M = product_grid_size(grid, axis_content(u.spec, grid) + axis_content(v.spec, grid))
    up = u.phys_padded(M)
    acc = np.zeros((v.m,) + (M,) * grid.n)
    for l in range(v.m):
        for i in range(grid.n):
            dpad = padded_physical_array(derivative_spec(v, l, i), grid, M)
            acc[l] += up[i] * dpad
    return zero_mean(field_from_padded_physical(grid, acc))


# -- fractional-derivative commutator ------------------------------------------


def lambda_commutator(
    u: VectorField,
    B: VectorField,
    s: float,
    advection: VectorField | None = None,
    check: bool = True,
) -> VectorField:
    """Commutator of the |k|^s multiplier with advection by ``u``.

    Returns ``Lambda^s[(u.grad)B] - (u.grad)(Lambda^s B)``.  The estimate
    this feeds is only claimed for s >= 1; smaller s is allowed but warned.
    """
    if s < 1:
        warnings.warn(f"commutator estimate is only claimed for s >= 1 (got s={s})", stacklevel=2)
    if check:
        require_solenoidal(u, "commutator")
    w = advection if advection is not None else advect(u, B, check=False)
    return lambda_s(w, s) - advect(u, lambda_s(B, s), check=False)


def validate_commutator_exponents(n: int, s: float, s1: float, s2: float) -> None:
    """Admissibility of (s, s1, s2) for the commutator estimate."""
    if s < 1:
        raise DomainError(f"s must satisfy s >= 1, got s={s}")
    if s1 < 1:
        raise DomainError(f"s1 must satisfy s1 >= 1, got s1={s1}")
    if not s1 < n / 2.0 + 1.0:
        raise DomainError(f"s1 must satisfy s1 < n/2 + 1 = {n / 2.0 + 1.0}, got s1={s1}")
    if s2 <= 0:
        raise DomainError(f"s2 must be positive, got s2={s2}")
    target = s + n / 2.0 + 1.0
    if abs(s1 + s2 - target) > 1e-12:
        raise DomainError(f"exponents must satisfy s1 + s2 = s + n/2 + 1 = {target}, got {s1 + s2}")


def commutator_estimate_sample(
    u: VectorField,
    B: VectorField,
    s: float,
    s1: float,
    s2: float,
    label: str = "commutator",
    advection: VectorField | None = None,
) -> CommutatorSample:
    """Measured sides of the commutator estimate at admissible exponents.

    LHS is the L2 norm of the commutator, RHS the symmetrized product of
    Sobolev norms ``|u|_{s1} |B|_{s2} + |u|_{s2} |B|_{s1}``.
    """
    validate_commutator_exponents(u.grid.n, s, s1, s2)
    comm = lambda_commutator(u, B, s, advection=advection)
    lhs = l2_norm_spectral(comm)
    rhs = sobolev_norm(u, s1) * sobolev_norm(B, s2) + sobolev_norm(u, s2) * sobolev_norm(B, s1)
    return _make_sample(label, s, s1, s2, lhs, rhs)


def trilinear_pairing(
    u: VectorField,
    s: float,
    s_low: float | None = None,
    label: str = "trilinear",
    advection: VectorField | None = None,
) -> CommutatorSample:
    """Pairing of the advection term against the field at smoothness ``s``.

    LHS is ``|( Lambda^s (u.grad)u, Lambda^s u )|``; RHS the triple product
    ``|u|_{H^s} |u|_{H^{s+1}} |u|_{H^{s_low}}`` with ``s_low = n/2`` by
    default.  The sample also records the reduction of the pairing to the
    commutator pairing, which holds because the transport term is skew.
    """
    if s < 1:
        raise DomainError(f"trilinear pairing requires s >= 1, got s={s}")
    require_solenoidal(u, "trilinear pairing")
    grid = u.grid
    if s_low is None:
        s_low = grid.n / 2.0
    w = advection if advection is not None else advect(u, u, check=False)
    lsu = lambda_s(u, s)
    pairing = inner_l2(lambda_s(w, s), lsu)
    comm = lambda_commutator(u, u, s, advection=w, check=False)
    pairing_comm = inner_l2(comm, lsu)
    lhs = abs(pairing)
    ns, ns1 = sobolev_norm(u, s), sobolev_norm(u, s + 1.0)
    rhs = ns * ns1 * sobolev_norm(u, s_low)
    identity_scale = max(lp_norm(u, np.inf) * ns * ns1, 1e-300)
    return _make_sample(
        label,
        s,
        None,
        None,
        lhs,
        rhs,
        identity_residual=abs(pairing - pairing_comm),
        identity_scale=identity_scale,
        pairing=pairing,
    )


# -- block commutators ----------------------------------------------------------


def _cutoff_padded(u: VectorField, j: int, tab, M: int | None = None) -> np.ndarray:
    """Padded samples of the low cutoff at scale j (no range validation)."""
    return padded_physical_array(u.spec * tab.chi_j(j), u.grid, M)


def transport_term(u: VectorField, k: int, partition: DyadicPartition | None = None) -> VectorField:
    """The frozen-coefficient transport ``sum_i (cutoff_{k-1} u_i) d_i (block_k u)``."""
    grid = u.grid
    tab = _resolve(u, partition)
    low_spec = u.spec * tab.chi_j(k - 1)
    phi_k = tab.phi_j(k)
    block_spec = u.spec * phi_k
    M = product_grid_size(grid, axis_content(low_spec, grid) + axis_content(block_spec, grid))
    low = padded_physical_array(low_spec, grid, M)
    acc = np.zeros((u.m,) + (M,) * grid.n)
    for l in range(u.m):
        for i in range(grid.n):
            dpad = padded_physical_array(1j * grid.k_components_deriv[i] * block_spec[l], grid, M)
            acc[l] += low[i] * dpad
    return field_from_padded_physical(grid, acc)


def besov_block_commutator(
    u: VectorField,
    k: int,
    partition: DyadicPartition | None = None,
    advection: VectorField | None = None,
    check: bool = True,
) -> VectorField:
    """Block of the advection term minus its frozen-coefficient transport.

    ``block_k[(u.grad)u] - sum_i (cutoff_{k-1} u_i) d_i (block_k u)``.
    """
    tab = _resolve(u, partition)
    if not tab.partition.contains(k):
        raise DomainError(f"block index {k} outside range [{tab.partition.j_min}, {tab.partition.j_max}]")
    if check:
        require_solenoidal(u, "block commutator")
    w = advection if advection is not None else advect(u, u, check=False)
    term1 = dyadic_block(w, k, tab.partition)
    term2 = transport_term(u, k, tab.partition)
    return term1 - term2


def bony_q_commutator(
    v: VectorField,
    f: VectorField,
    j: int,
    partition: DyadicPartition | None = None,
    check: bool = True,
) -> VectorField:
    """Commutator of advection by ``v`` with the block at scale j.

    Sign convention: ``(v.grad)(block_j f) - block_j((v.grad) f)``; only its
    norm enters the estimates, so the sign is fixed merely to prevent drift.
    """
    tab = _resolve(v, partition)
    if not tab.partition.contains(j):
        raise DomainError(f"block index {j} outside range [{tab.partition.j_min}, {tab.partition.j_max}]")
    if check:
        require_solenoidal(v, "block-advection commutator")
    t1 = advect(v, dyadic_block(f, j, tab.partition), check=False)
    t2 = dyadic_block(advect(v, f, check=False), j, tab.partition)
    return t1 - t2


# -- four-term decomposition ------------------------------------------------------


class BlockCommutatorParts:
    """Scale-indexed workspace for decomposing one field's block commutators.

    Everything that does not depend on the block index k (cutoff and block
    physicals, transported products, the swapped paraproducts and the
    remainders) is computed once, so sweeping k costs only the local terms.
    """

    def __init__(self, u: VectorField, partition: DyadicPartition | None = None, check: bool = True):
        if check:
            require_solenoidal(u, "block commutator decomposition")
        self.u = u
        self.grid = grid = u.grid
        self.tab = tab = _resolve(u, partition)
        self.part = part = tab.partition
        n = grid.n
        self.active = [j for j in part.js if tab.active(j)]
        self.M = M = product_grid_size(grid, 2 * axis_content(u.spec, grid))

        self.low_pad = {j: _cutoff_padded(u, j - 1, tab, M) for j in self.active}
        self.deriv = {}
        prodsum = np.zeros((n,) + (M,) * grid.n)
        for j in self.active:
            phi_j = tab.phi_j(j)
            dj = np.empty((n, n) + (M,) * grid.n)
            for l in range(n):
                for i in range(n):
                    dj[l, i] = padded_physical_array(
                        1j * grid.k_components_deriv[i] * (u.spec[l] * phi_j), grid, M
                    )
            self.deriv[j] = dj
            for l in range(n):
                for i in range(n):
                    prodsum[l] += self.low_pad[j][i] * dj[l, i]
        # sum over j of (cutoff_{j-1} u . grad)(block_j u), as a lattice spectrum
        self.transported_sum = field_from_padded_physical(grid, prodsum).spec

        para = np.zeros((n,) + grid.spectral_shape, dtype=np.complex128)
        rem = np.zeros((n,) + grid.spectral_shape, dtype=np.complex128)
        for l in range(n):
            for i in range(n):
                du_li = VectorField.from_spectral(grid, derivative_spec(u, l, i)[np.newaxis])
                ui = u.component(i)
                para[l] += paraproduct(du_li, ui, part).spec[0]
                rem[l] += remainder(ui, du_li, part).spec[0]
        self.para_sum = para
        self.rem_sum = rem

    def decompose(self, k: int) -> tuple[VectorField, VectorField, VectorField, VectorField]:
        grid, tab, n = self.grid, self.tab, self.grid.n
        if not self.part.contains(k):
            raise DomainError(f"block index {k} outside range [{self.part.j_min}, {self.part.j_max}]")
        phi_k = tab.phi_j(k)
        M = self.M
        low_k = _cutoff_padded(self.u, k - 1, tab, M)

        acc1 = np.zeros((n,) + (M,) * grid.n)
        acc2_sub = np.zeros((n,) + (M,) * grid.n)
        for j in self.active:
            phi_j = tab.phi_j(j)
            if not np.any(phi_j * phi_k != 0.0):
                continue
            for l in range(n):
                for i in range(n):
                    dkj = padded_physical_array(
                        1j * grid.k_components_deriv[i] * (self.u.spec[l] * phi_j * phi_k), grid, M
                    )
                    acc1[l] += (self.low_pad[j][i] - low_k[i]) * dkj
                    acc2_sub[l] += self.low_pad[j][i] * dkj
        t1 = field_from_padded_physical(grid, acc1)
        t2 = VectorField.from_spectral(grid, self.transported_sum * phi_k) - field_from_padded_physical(
            grid, acc2_sub
        )
        t3 = VectorField.from_spectral(grid, self.para_sum * phi_k)
        t4 = VectorField.from_spectral(grid, self.rem_sum * phi_k)
        return t1, t2, t3, t4


def decompose_t1_t2_t3_t4(
    u: VectorField,
    k: int,
    partition: DyadicPartition | None = None,
    check: bool = True,
) -> tuple[VectorField, VectorField, VectorField, VectorField]:
    """Split the block commutator into its four structural parts.

    (t1) re-centered low cutoffs against nearby block pairs,
    (t2) the block/transport commutator summed over scales,
    (t3) the low-high paraproducts with the roles of the factors swapped,
    (t4) the frequency-balanced remainders.
    Their sum reproduces :func:`besov_block_commutator` up to round-off.
    Sweeping many k of one field is cheaper via :class:`BlockCommutatorParts`.
    """
    return BlockCommutatorParts(u, partition, check=check).decompose(k)
