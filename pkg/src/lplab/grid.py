"""Periodic torus discretization and the spectra used to seed random fields.

The domain is the torus [0, 2pi)^n with an integer wavevector lattice.  All
spectral data lives on the half-spectrum produced by a real FFT of the last
axis; the stored coefficients are Fourier-series coefficients, i.e.

    u(x) = sum_k  c(k) exp(i k.x),

so the multiplier of the gradient is ``i k`` and ``|k|^2`` is exactly the
symbol of ``-Laplacian``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError

# Zero-padding factor applied to every quadratic (pointwise) product.
PAD_FACTOR = 3, 2  # numerator, denominator


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Torus discretization: ``n`` spatial dimensions, ``N`` points per axis.

    The side length is fixed at 2pi, wavevector components run over the
    integer residues in (-N/2, N/2].  ``N`` must be a power of two, at
    least 8; ``n`` must be 2 or 3.
    """

    n: int
    N: int

    def __post_init__(self) -> None:
        if self.n not in (2, 3):
            raise DomainError(f"spatial dimension must be 2 or 3, got {self.n}")
        if self.N < 8 or not _is_power_of_two(self.N):
            raise DomainError(f"N must be a power of two >= 8, got {self.N}")

    # -- shapes ---------------------------------------------------------

    @property
    def physical_shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def spectral_shape(self) -> tuple[int, ...]:
        """Half-spectrum shape (real FFT of the last axis)."""
        return (self.N,) * (self.n - 1) + (self.N // 2 + 1,)

    @property
    def padded_N(self) -> int:
        num, den = PAD_FACTOR
        return (num * self.N) // den

    @property
    def padded_shape(self) -> tuple[int, ...]:
        return (self.padded_N,) * self.n

    @property
    def cell_volume(self) -> float:
        """Uniform quadrature weight (2pi/N)^n."""
        return (2.0 * np.pi / self.N) ** self.n

    @property
    def volume(self) -> float:
        return (2.0 * np.pi) ** self.n

    # -- wavevectors ----------------------------------------------------

    @cached_property
    def axis_frequencies(self) -> tuple[np.ndarray, ...]:
        """Integer frequencies along each axis of the half-spectrum."""
        full = np.rint(np.fft.fftfreq(self.N) * self.N).astype(np.int64)
        half = np.arange(self.N // 2 + 1, dtype=np.int64)
        return (full,) * (self.n - 1) + (half,)

    @cached_property
    def k_components(self) -> tuple[np.ndarray, ...]:
        """Wavevector components broadcast to the half-spectrum shape."""
        out = []
        for axis, freq in enumerate(self.axis_frequencies):
            shape = [1] * self.n
            shape[axis] = freq.size
            out.append(freq.astype(np.float64).reshape(shape))
        return tuple(out)

    @cached_property
    def k_components_deriv(self) -> tuple[np.ndarray, ...]:
        """Wavevectors for odd (ik) multipliers: Nyquist planes zeroed.

        The |k_j| = N/2 plane is self-conjugate, so an odd multiplier on it
        has no Hermitian-symmetric extension; dealiased data never reaches it.
        """
        out = []
        for comp in self.k_components:
            c = np.where(np.abs(comp) == self.N // 2, 0.0, comp)
            c.setflags(write=False)
            out.append(c)
        return tuple(out)

    @cached_property
    def k_squared(self) -> np.ndarray:
        ksq = np.zeros(self.spectral_shape)
        for comp in self.k_components:
            ksq = ksq + comp * comp
        ksq.setflags(write=False)
        return ksq

    @cached_property
    def k_radius(self) -> np.ndarray:
        r = np.sqrt(self.k_squared)
        r.setflags(write=False)
        return r

    @cached_property
    def hermitian_weights(self) -> np.ndarray:
        """Multiplicity of each stored mode in full-lattice sums.

        Modes with 0 < k_last < N/2 represent a conjugate pair; the
        k_last = 0 and k_last = N/2 planes are self-conjugate.
        """
        w = np.full(self.spectral_shape, 2.0)
        w[..., 0] = 1.0
        w[..., -1] = 1.0
        w.setflags(write=False)
        return w

    # -- dealiasing -----------------------------------------------------

    @property
    def dealias_cutoff(self) -> int:
        """Largest retained |k_j| per axis under the 2/3 rule."""
        return self.N // 3

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        cut = self.dealias_cutoff
        mask = np.ones(self.spectral_shape, dtype=bool)
        for comp in self.k_components:
            mask &= np.abs(comp) <= cut
        mask.setflags(write=False)
        return mask

    @cached_property
    def max_radius(self) -> float:
        """Largest |k| on the lattice (the corner mode)."""
        return float(np.sqrt(self.n) * (self.N // 2))


@dataclass(frozen=True)
class SpectrumProfile:
    """Shell spectrum controlling random field ensembles.

    Coefficients in the band ``k_lo <= |k| <= k_hi`` are drawn with standard
    deviation ``amplitude * |k|**(-alpha)``; everything outside is zero.
    """

    alpha: float
    k_lo: int
    k_hi: int
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if self.k_lo < 1:
            raise DomainError(f"k_lo must be >= 1, got {self.k_lo}")
        if self.k_hi < self.k_lo:
            raise DomainError(f"empty band [{self.k_lo}, {self.k_hi}]")
        if not self.amplitude > 0:
            raise DomainError(f"amplitude must be positive, got {self.amplitude}")

    def validate_for(self, grid: Grid) -> None:
        if self.k_hi > grid.dealias_cutoff:
            raise DomainError(
                f"band upper edge {self.k_hi} exceeds the dealias cutoff "
                f"{grid.dealias_cutoff} of an N={grid.N} grid"
            )

    def std_at(self, radius: np.ndarray) -> np.ndarray:
        """Standard deviation of the complex coefficient at radius |k|."""
        r = np.asarray(radius, dtype=np.float64)
        inband = (r >= self.k_lo) & (r <= self.k_hi)
        safe = np.where(r > 0, r, 1.0)
        return np.where(inband, self.amplitude * safe ** (-self.alpha), 0.0)
