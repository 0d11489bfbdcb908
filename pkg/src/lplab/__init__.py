"""lplab: dyadic-analysis toolkit and inequality lab on the periodic torus.

Field algebra (transforms, multipliers, norms, projections), a dyadic
frequency decomposition with Besov norms and paraproducts, the advection
commutators built from them, an ensemble harness that measures empirical
constants for the estimates they satisfy, and a pseudospectral flow
integrator that tracks the blowup-diagnostic norms along trajectories.
"""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    GridMismatchError,
    InvalidDataError,
    LplabError,
    PreconditionError,
)
from .grid import Grid, SpectrumProfile
from .field import (
    VectorField,
    apply_multiplier,
    divergence,
    gradient,
    inner_l2,
    lambda_s,
    leray_project,
    lp_norm,
    mode_field,
    sobolev_norm,
    to_physical,
    to_spectral,
    zero_mean,
)
from .random_fields import (
    fit_spectral_slope,
    random_field,
    random_scalar,
    random_solenoidal,
)
from .paley import (
    BesovIndex,
    DyadicPartition,
    PartitionReport,
    besov_norm,
    block_lp_norm,
    build_partition,
    check_partition,
    d_sequence,
    default_partition,
    dyadic_block,
    low_cutoff,
    paraproduct,
    remainder,
)
from .nonlinear import (
    CommutatorSample,
    advect,
    besov_block_commutator,
    bony_q_commutator,
    commutator_estimate_sample,
    decompose_t1_t2_t3_t4,
    lambda_commutator,
    trilinear_pairing,
    validate_commutator_exponents,
)
from .snapshot import field_from_bytes, field_to_bytes, read_field, write_field

__all__ = [name for name in dir() if not name.startswith("_")]
