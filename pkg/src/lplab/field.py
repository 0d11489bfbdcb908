"""Field algebra on the torus: transforms, multipliers, norms, projections.

A :class:`VectorField` is immutable and caches both representations.  The
spectral representation is the half-spectrum of a real FFT, which makes
Hermitian symmetry (real physical samples) true by construction.  Pointwise
products of fields are always evaluated on a 3/2 zero-padded grid and
truncated back, so every quadratic quantity on the stored lattice is exact.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
import scipy.fft as _fft

from .errors import DomainError, GridMismatchError, InvalidDataError, PreconditionError
from .grid import Grid

# Relative tolerance used by the divergence-free precondition checks:
# a field counts as solenoidal when ||div u||_L2 <= DIV_TOL * ||grad u||_L2.
DIV_TOL = 1e-10

_MEAN_TOL = 1e-12


class VectorField:
    """An ``m``-component field with dual physical/spectral representations.

    Construct via :meth:`from_physical` or :meth:`from_spectral`.  Arrays are
    stored with a leading component axis (scalars have ``m = 1``) and are
    frozen; the representation that was not supplied is computed lazily and
    cached, as are padded physical evaluations used for products.
    """

    __slots__ = ("grid", "m", "_spec", "_phys", "_phys_pad")

    def __init__(self, grid: Grid, m: int, spec=None, phys=None):
        self.grid = grid
        self.m = m
        self._spec = spec
        self._phys = phys
        self._phys_pad: dict[int, np.ndarray] = {}

    # -- constructors ----------------------------------------------------

    @classmethod
    def from_physical(cls, grid: Grid, samples: np.ndarray) -> "VectorField":
        samples = np.asarray(samples, dtype=np.float64)
        if samples.shape == grid.physical_shape:
            samples = samples[np.newaxis]
        if samples.ndim != grid.n + 1 or samples.shape[1:] != grid.physical_shape:
            raise InvalidDataError(
                f"expected samples shaped (m,) + {grid.physical_shape}, got {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise InvalidDataError("physical samples contain non-finite values")
        samples = samples.copy()
        samples.setflags(write=False)
        return cls(grid, samples.shape[0], phys=samples)

    @classmethod
    def from_spectral(cls, grid: Grid, coeffs: np.ndarray) -> "VectorField":
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.shape == grid.spectral_shape:
            coeffs = coeffs[np.newaxis]
        if coeffs.ndim != grid.n + 1 or coeffs.shape[1:] != grid.spectral_shape:
            raise InvalidDataError(
                f"expected coefficients shaped (m,) + {grid.spectral_shape}, got {coeffs.shape}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise InvalidDataError("spectral coefficients contain non-finite values")
        coeffs = coeffs.copy()
        coeffs.setflags(write=False)
        return cls(grid, coeffs.shape[0], spec=coeffs)

    @classmethod
    def zeros(cls, grid: Grid, m: int = 1) -> "VectorField":
        return cls.from_spectral(grid, np.zeros((m,) + grid.spectral_shape, dtype=np.complex128))

    # -- representations ---------------------------------------------------

    @property
    def has_spectral(self) -> bool:
        return self._spec is not None

    @property
    def has_physical(self) -> bool:
        return self._phys is not None

    @property
    def spec(self) -> np.ndarray:
        """Fourier-series coefficients, shape ``(m,) + grid.spectral_shape``."""
        if self._spec is None:
            scale = 1.0 / self.grid.N ** self.grid.n
            spec = _fft.rfftn(self._phys, axes=self._axes()) * scale
            spec.setflags(write=False)
            self._spec = spec
        return self._spec

    @property
    def phys(self) -> np.ndarray:
        """Real samples on the grid, shape ``(m,) + grid.physical_shape``."""
        if self._phys is None:
            scale = float(self.grid.N ** self.grid.n)
            phys = _fft.irfftn(self._spec, s=self.grid.physical_shape, axes=self._axes()) * scale
            phys.setflags(write=False)
            self._phys = phys
        return self._phys

    def phys_padded(self, M: int | None = None) -> np.ndarray:
        """Samples on a zero-padded grid (default 3/2; cached per size)."""
        M = self.grid.padded_N if M is None else M
        cached = self._phys_pad.get(M)
        if cached is None:
            cached = padded_physical_array(self.spec, self.grid, M)
            cached.setflags(write=False)
            self._phys_pad[M] = cached
        return cached

    def _axes(self) -> tuple[int, ...]:
        return tuple(range(1, self.grid.n + 1))

    # -- small helpers -----------------------------------------------------

    def component(self, i: int) -> "VectorField":
        return VectorField(self.grid, 1, spec=self.spec[i : i + 1])

    def mean_coefficient(self) -> np.ndarray:
        return self.spec[(slice(None),) + (0,) * self.grid.n]

    def is_mean_free(self, rel: float = _MEAN_TOL) -> bool:
        scale = max(float(np.max(np.abs(self.spec))), 1e-300)
        return bool(np.max(np.abs(self.mean_coefficient())) <= rel * scale)

    def __add__(self, other: "VectorField") -> "VectorField":
        _check_same_grid(self, other)
        return VectorField.from_spectral(self.grid, self.spec + other.spec)

    def __sub__(self, other: "VectorField") -> "VectorField":
        _check_same_grid(self, other)
        return VectorField.from_spectral(self.grid, self.spec - other.spec)

    def __mul__(self, c: float) -> "VectorField":
        return VectorField.from_spectral(self.grid, self.spec * c)

    __rmul__ = __mul__

    def __repr__(self) -> str:  # pragma: no cover
        rep = "+".join(r for r, ok in (("phys", self.has_physical), ("spec", self.has_spectral)) if ok)
        return f"VectorField(n={self.grid.n}, N={self.grid.N}, m={self.m}, {rep})"


def _check_same_grid(f: VectorField, g: VectorField) -> None:
    if f.grid != g.grid:
        raise GridMismatchError(f"grids differ: {f.grid} vs {g.grid}")


# -- transforms ------------------------------------------------------------


def to_spectral(f: VectorField) -> VectorField:
    """Materialize the spectral representation (both are cached afterwards)."""
    f.spec
    return f


def to_physical(f: VectorField) -> VectorField:
    """Materialize the physical representation (both are cached afterwards)."""
    f.phys
    return f


# -- zero padding ------------------------------------------------------------


def pad_spectrum(spec: np.ndarray, grid: Grid, M: int | None = None) -> np.ndarray:
    """Re-grid half-spectrum coefficients onto the half-spectrum of an M-grid.

    For M >= N this zero-pads; for M < N it gathers the retained band, which
    is only lossless when the per-axis content fits below the new Nyquist
    (callers size M from :func:`axis_content`).
    """
    M = grid.padded_N if M is None else M
    N = grid.N
    if M >= N:
        pos = N // 2  # positive frequencies 0 .. N/2-1, tail -N/2 .. -1
        last = N // 2 + 1
    else:
        pos = min(N // 2, (M - 1) // 2 + 1)  # keep |freq| < M/2
        last = pos
    out_shape = spec.shape[: -grid.n] + (M,) * (grid.n - 1) + (M // 2 + 1,)
    out = np.zeros(out_shape, dtype=np.complex128)
    n_full = grid.n - 1
    base = spec.ndim - grid.n
    neg = pos if M >= N else pos - 1  # length of the negative tail
    for bits in range(1 << n_full):
        s_src: list = [slice(None)] * spec.ndim
        s_dst: list = [slice(None)] * spec.ndim
        for a in range(n_full):
            if bits >> a & 1:
                s_src[base + a] = slice(N - neg, N)  # frequencies -neg .. -1
                s_dst[base + a] = slice(M - neg, M)
            else:
                s_src[base + a] = slice(0, pos)
                s_dst[base + a] = slice(0, pos)
        s_src[-1] = slice(0, last)
        s_dst[-1] = slice(0, last)
        out[tuple(s_dst)] = spec[tuple(s_src)]
    return out


def truncate_padded_spectrum(pad_spec: np.ndarray, grid: Grid) -> np.ndarray:
    """Inverse of :func:`pad_spectrum`: keep the modes of the N-lattice."""
    n_full = grid.n - 1
    M = pad_spec.shape[-2] if n_full else 2 * (pad_spec.shape[-1] - 1)
    N = grid.N
    out_shape = pad_spec.shape[: -grid.n] + grid.spectral_shape
    out = np.zeros(out_shape, dtype=np.complex128)
    base = pad_spec.ndim - grid.n
    for bits in range(1 << n_full):
        s_src: list = [slice(None)] * pad_spec.ndim
        s_dst: list = [slice(None)] * pad_spec.ndim
        for a in range(n_full):
            if bits >> a & 1:
                s_src[base + a] = slice(M - N // 2, M)
                s_dst[base + a] = slice(N // 2, N)
            else:
                s_src[base + a] = slice(0, N // 2)
                s_dst[base + a] = slice(0, N // 2)
        s_src[-1] = slice(0, N // 2 + 1)
        s_dst[-1] = slice(0, N // 2 + 1)
        out[tuple(s_dst)] = pad_spec[tuple(s_src)]
    return out


def field_from_padded_physical(grid: Grid, samples: np.ndarray) -> VectorField:
    """Forward-transform padded samples and truncate to the stored lattice."""
    axes = tuple(range(1, grid.n + 1))
    M = samples.shape[1]
    scale = 1.0 / float(M) ** grid.n
    pad_spec = _fft.rfftn(samples, axes=axes) * scale
    return VectorField.from_spectral(grid, truncate_padded_spectrum(pad_spec, grid))


def padded_physical_array(spec: np.ndarray, grid: Grid, M: int | None = None) -> np.ndarray:
    """Padded samples of raw half-spectrum coefficients (any leading axes)."""
    M = grid.padded_N if M is None else M
    axes = tuple(range(spec.ndim - grid.n, spec.ndim))
    pad = pad_spectrum(spec, grid, M)
    return _fft.irfftn(pad, s=(M,) * grid.n, axes=axes) * float(M) ** grid.n


def axis_content(spec: np.ndarray, grid: Grid, tol: float = 0.0) -> int:
    """Largest per-axis |k_j| carrying a coefficient above ``tol``."""
    mask = np.abs(spec) > tol
    mask = mask.reshape((-1,) + grid.spectral_shape).any(axis=0)
    content = 0
    for axis, freq in enumerate(grid.axis_frequencies):
        other = tuple(a for a in range(grid.n) if a != axis)
        hit = mask.any(axis=other)
        if np.any(hit):
            content = max(content, int(np.max(np.abs(freq[hit]))))
    return content


def product_grid_size(grid: Grid, content_sum: int) -> int:
    """Smallest fast grid on which a product of the given total content is
    alias-free for every stored lattice mode (capped at the 3/2 grid)."""
    target = grid.N // 2 + content_sum + 1
    M = max(grid.N, _fft.next_fast_len(target, real=True))
    return min(M, grid.padded_N)


def oversampled_size(grid: Grid, content: int) -> int:
    """Sampling grid for sup norms and non-even-p quadrature of banded data.

    Four samples per content wavenumber keep the sup-norm quadrature error
    near the percent level; full-band data falls back to the 3/2 grid.
    """
    return min(grid.padded_N, _fft.next_fast_len(max(4 * content + 1, 8), real=True))


# -- multipliers -------------------------------------------------------------


def apply_multiplier(
    f: VectorField,
    sigma: Callable[[np.ndarray], np.ndarray],
    sigma_zero: float = 0.0,
) -> VectorField:
    """Apply the radial Fourier multiplier ``sigma(|k|)``.

    ``sigma`` is evaluated on the nonzero lattice radii; its value at the
    mean mode must be supplied explicitly (0 for homogeneous multipliers).
    """
    grid = f.grid
    r = grid.k_radius
    values = np.asarray(sigma(r), dtype=np.float64)
    if values.shape != r.shape:
        values = np.broadcast_to(values, r.shape).copy()
    zero_idx = (0,) * grid.n
    values = values.copy()
    values[zero_idx] = sigma_zero
    if not np.all(np.isfinite(values)):
        raise DomainError("multiplier is non-finite at a resolved lattice radius")
    return VectorField.from_spectral(grid, f.spec * values)


def multiplier_values(grid: Grid, sigma: Callable[[np.ndarray], np.ndarray], sigma_zero: float = 0.0) -> np.ndarray:
    """Tabulate a radial multiplier on the half-spectrum (0-mode explicit)."""
    values = np.asarray(sigma(grid.k_radius), dtype=np.float64)
    values = values.copy()
    values[(0,) * grid.n] = sigma_zero
    if not np.all(np.isfinite(values)):
        raise DomainError("multiplier is non-finite at a resolved lattice radius")
    values.setflags(write=False)
    return values


def lambda_s(f: VectorField, s: float) -> VectorField:
    """Fractional derivative of order ``s``: the |k|^s multiplier, 0 at k=0."""
    if s < 0 and not f.is_mean_free():
        raise DomainError("negative-order multiplier requires a mean-free field")
    grid = f.grid
    r = grid.k_radius
    zero_idx = (0,) * grid.n
    if s == 0:
        vals = np.ones_like(r)
    else:
        safe = r.copy()
        safe[zero_idx] = 1.0
        vals = safe**s
    vals[zero_idx] = 0.0
    return VectorField.from_spectral(grid, f.spec * vals)


# -- norms and pairings -------------------------------------------------------


def sobolev_norm(f: VectorField, s: float) -> float:
    """Homogeneous Sobolev norm: the L2 norm of the |k|^s multiplier image.

    The mean mode is excluded; for ``s >= 0`` the value is the usual
    seminorm of any field, for ``s < 0`` the field must be mean-free.
    """
    if s < 0 and not f.is_mean_free():
        raise DomainError("negative smoothness requires a mean-free field")
    grid = f.grid
    zero_idx = (0,) * grid.n
    if s == 0:
        weight = grid.hermitian_weights.copy()
    else:
        safe = grid.k_radius.copy()
        safe[zero_idx] = 1.0
        weight = grid.hermitian_weights * safe ** (2.0 * s)
    weight[zero_idx] = 0.0
    total = np.sum(weight * (f.spec.real**2 + f.spec.imag**2))
    return float(np.sqrt(grid.volume * total))


def l2_norm_spectral(f: VectorField) -> float:
    """Plain L2 norm evaluated by Parseval (includes the mean mode)."""
    grid = f.grid
    total = np.sum(grid.hermitian_weights * (f.spec.real**2 + f.spec.imag**2))
    return float(np.sqrt(grid.volume * total))


def inner_l2(f: VectorField, g: VectorField) -> float:
    """L2 inner product summed over components, evaluated spectrally."""
    _check_same_grid(f, g)
    if f.m != g.m:
        raise InvalidDataError(f"component counts differ: {f.m} vs {g.m}")
    grid = f.grid
    total = np.sum(grid.hermitian_weights * np.real(np.conj(f.spec) * g.spec))
    return float(grid.volume * total)


def lp_norm(f: VectorField, p: float, oversample: bool = False) -> float:
    """Discrete L^p norm, uniform weights (2pi/N)^n; p = inf is the sup.

    Pointwise magnitude is the Euclidean norm over components.  With
    ``oversample`` the quadrature runs on a denser sampling of the field
    (four samples per content wavenumber, capped at the 3/2 grid), which
    reduces quadrature error for band-limited data; block norms use it.
    """
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if oversample:
        samples = f.phys_padded(oversampled_size(f.grid, axis_content(f.spec, f.grid)))
    else:
        samples = f.phys
    n_axis = samples.shape[0]
    if n_axis == 1:
        mag2 = samples[0] ** 2
    else:
        mag2 = np.sum(samples**2, axis=0)
    if np.isinf(p):
        return float(np.sqrt(np.max(mag2)))
    npts = samples.shape[1]
    cell = (2.0 * np.pi / npts) ** f.grid.n
    if p == 2:
        return float(np.sqrt(np.sum(mag2) * cell))
    return float((np.sum(mag2 ** (p / 2.0)) * cell) ** (1.0 / p))


# -- differential operators ---------------------------------------------------


def gradient(f: VectorField) -> VectorField:
    """Spectral gradient; components ordered ``(l, i) -> l * n + i``."""
    grid = f.grid
    out = np.empty((f.m * grid.n,) + grid.spectral_shape, dtype=np.complex128)
    for l in range(f.m):
        for i, k in enumerate(grid.k_components_deriv):
            out[l * grid.n + i] = 1j * k * f.spec[l]
    return VectorField.from_spectral(grid, out)


def divergence(f: VectorField) -> VectorField:
    grid = f.grid
    if f.m != grid.n:
        raise InvalidDataError(f"divergence needs m = n = {grid.n} components, got {f.m}")
    out = np.zeros((1,) + grid.spectral_shape, dtype=np.complex128)
    for i, k in enumerate(grid.k_components_deriv):
        out[0] += 1j * k * f.spec[i]
    return VectorField.from_spectral(grid, out)


def derivative_spec(f: VectorField, component: int, axis: int) -> np.ndarray:
    """Spectral coefficients of d/dx_axis applied to one component."""
    return 1j * f.grid.k_components_deriv[axis] * f.spec[component]


def leray_project(f: VectorField) -> VectorField:
    """L2-orthogonal projection onto divergence-free fields (k=0 untouched)."""
    grid = f.grid
    if f.m != grid.n:
        raise InvalidDataError(f"projection needs m = n = {grid.n} components, got {f.m}")
    ksq = grid.k_squared.copy()
    ksq[(0,) * grid.n] = 1.0
    kdotf = np.zeros(grid.spectral_shape, dtype=np.complex128)
    for i, k in enumerate(grid.k_components):
        kdotf += k * f.spec[i]
    kdotf /= ksq
    out = np.empty_like(f.spec)
    for i, k in enumerate(grid.k_components):
        out[i] = f.spec[i] - k * kdotf
    return VectorField.from_spectral(grid, out)


def require_solenoidal(u: VectorField, where: str = "operation") -> None:
    """Enforce the divergence-free precondition at the documented tolerance."""
    div = l2_norm_spectral(divergence(u))
    grad = sobolev_norm(u, 1.0)
    if div > DIV_TOL * max(grad, 1e-300):
        raise PreconditionError(
            f"{where} requires a solenoidal field: ||div u|| = {div:.3e} "
            f"> {DIV_TOL:.0e} * ||grad u|| = {DIV_TOL * grad:.3e}"
        )


def zero_mean(f: VectorField) -> VectorField:
    spec = f.spec.copy()
    spec[(slice(None),) + (0,) * f.grid.n] = 0.0
    return VectorField.from_spectral(f.grid, spec)


# -- coordinates / sample fields ---------------------------------------------


def coordinate_arrays(grid: Grid) -> tuple[np.ndarray, ...]:
    """Meshgrid of physical coordinates (ij indexing)."""
    x = np.arange(grid.N) * (2.0 * np.pi / grid.N)
    return tuple(np.meshgrid(*([x] * grid.n), indexing="ij"))


def mode_field(grid: Grid, k: Sequence[int], m: int = 1, component: int = 0, amplitude: float = 1.0) -> VectorField:
    """``amplitude * cos(k.x)`` placed in one component (exact coefficients)."""
    spec = np.zeros((m,) + grid.spectral_shape, dtype=np.complex128)
    kk = [int(v) for v in k]
    if len(kk) != grid.n:
        raise InvalidDataError(f"wavevector must have {grid.n} components")
    N = grid.N
    if kk[-1] < 0:  # cos is even; use the stored representative
        kk = [-v for v in kk]
    idx = tuple(v % N for v in kk[:-1]) + (kk[-1],)
    if 0 < kk[-1] < N // 2:
        spec[(component,) + idx] = amplitude / 2.0  # conjugate is implicit
    else:
        cidx = tuple((-v) % N for v in kk[:-1]) + (kk[-1],)
        spec[(component,) + idx] += amplitude / 2.0
        spec[(component,) + cidx] += amplitude / 2.0
    return VectorField.from_spectral(grid, spec)
