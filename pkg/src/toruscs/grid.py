"""Discretization of the flat torus T^n = (R / 2piZ)^n.

Conventions used throughout the package:

    psi_hat(k) = (2pi)^{-n} * integral_{T^n} exp(-i k.y) psi(y) dy
    psi(y)     = sum_k psi_hat(k) exp(i k.y)
    <a, b>     = integral conj(a) b  = (2pi)^n sum_k conj(a_hat(k)) b_hat(k)

Retained modes are k in Z^n with |k_j| <= K, ordered lexicographically with
each axis running -K..K (first axis slowest).  Grid nodes are
x_m = 2pi m / M componentwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * np.pi


def default_samples(K: int) -> int:
    """Smallest power of two that is at least 2K+2."""
    need = 2 * K + 2
    return 1 << (need - 1).bit_length()


@dataclass(frozen=True)
class TorusGrid:
    n: int
    K: int
    M: int
    h: float
    integer_reciprocal: bool

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ConfigError(f"dimension must be 1, 2 or 3, got {self.n}")
        if self.K < 1:
            raise ConfigError(f"band limit K must be >= 1, got {self.K}")
        if self.M < 2 * self.K + 2:
            raise ConfigError(f"need M >= 2K+2 = {2 * self.K + 2}, got M = {self.M}")
        if not (0.0 < self.h <= 1.0) or not np.isfinite(self.h):
            raise ConfigError(f"h must satisfy 0 < h <= 1, got {self.h}")
        if self.integer_reciprocal and not _is_integer_reciprocal(self.h):
            raise ConfigError(f"1/h = {1.0 / self.h!r} is not an integer")

    @classmethod
    def create(cls, n: int, K: int, h: float, M: int | None = None) -> "TorusGrid":
        try:
            n, K, h = int(n), int(K), float(h)
            M = default_samples(K) if M is None else int(M)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad grid parameter: {exc}") from None
        return cls(n, K, M, h, _is_integer_reciprocal(h))

    @property
    def width(self) -> int:
        return 2 * self.K + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.width,) * self.n

    @property
    def size(self) -> int:
        return self.width**self.n

    @property
    def sample_shape(self) -> tuple[int, ...]:
        return (self.M,) * self.n

    @cached_property
    def modes(self) -> np.ndarray:
        """Retained integer modes, shape (size, n), lexicographic order."""
        axis = np.arange(-self.K, self.K + 1)
        mesh = np.meshgrid(*([axis] * self.n), indexing="ij")
        out = np.stack([m.ravel() for m in mesh], axis=1)
        out.setflags(write=False)
        return out

    @cached_property
    def nodes(self) -> np.ndarray:
        """Grid nodes, shape (M^n, n), C order over the sample array."""
        axis = TWO_PI * np.arange(self.M) / self.M
        mesh = np.meshgrid(*([axis] * self.n), indexing="ij")
        out = np.stack([m.ravel() for m in mesh], axis=1)
        out.setflags(write=False)
        return out

    def mode_index(self, k) -> int:
        k = np.atleast_1d(np.asarray(k, dtype=int))
        if k.shape != (self.n,) or np.any(np.abs(k) > self.K):
            raise ConfigError(f"mode {k.tolist()} not retained (n={self.n}, K={self.K})")
        idx = 0
        for kj in k:
            idx = idx * self.width + int(kj) + self.K
        return idx

    def with_band(self, K: int, M: int | None = None) -> "TorusGrid":
        return TorusGrid.create(self.n, K, self.h, M)


def _is_integer_reciprocal(h: float) -> bool:
    if not (0.0 < h <= 1.0):
        return False
    r = 1.0 / h
    return abs(r - round(r)) <= 1e-12 * max(1.0, r)


@dataclass(frozen=True, eq=False)
class FourierField:
    """Band-limited function on T^n held by its Fourier coefficients."""

    grid: TorusGrid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.size != self.grid.size:
            raise ConfigError(f"expected {self.grid.size} coefficients, got {c.size}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid: TorusGrid) -> "FourierField":
        return cls(grid, np.zeros(grid.size, dtype=complex))

    @classmethod
    def from_modes(cls, grid: TorusGrid, modes: dict) -> "FourierField":
        c = np.zeros(grid.size, dtype=complex)
        for k, v in modes.items():
            c[grid.mode_index(k)] += v
        return cls(grid, c)

    def __add__(self, other: "FourierField") -> "FourierField":
        _same_grid(self, other)
        return FourierField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "FourierField") -> "FourierField":
        _same_grid(self, other)
        return FourierField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "FourierField":
        return FourierField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.sqrt(TWO_PI**self.grid.n) * np.linalg.norm(self.coeffs))

    def normalized(self) -> "FourierField":
        nrm = self.norm()
        if nrm == 0.0:
            raise ConfigError("cannot normalize the zero field")
        return self * (1.0 / nrm)


def _same_grid(a: FourierField, b: FourierField) -> None:
    if a.grid != b.grid:
        raise ConfigError("fields live on different grids")


def _fft_slices(grid: TorusGrid, M: int) -> tuple[np.ndarray, ...]:
    # position of each retained mode in an M^n FFT array
    axis = np.arange(-grid.K, grid.K + 1) % M
    return np.ix_(*([axis] * grid.n))


def coeffs_to_fft(coeffs: np.ndarray, grid: TorusGrid, M: int | None = None) -> np.ndarray:
    """Scatter coefficient vectors (..., size) into FFT layout (..., M, ..., M)."""
    M = grid.M if M is None else M
    lead = coeffs.shape[:-1]
    out = np.zeros(lead + (M,) * grid.n, dtype=complex)
    idx = _fft_slices(grid, M)
    out[(Ellipsis,) + idx] = coeffs.reshape(lead + grid.shape)
    return out


def fft_to_coeffs(spec: np.ndarray, grid: TorusGrid) -> np.ndarray:
    M = spec.shape[-1]
    lead = spec.shape[: spec.ndim - grid.n]
    idx = _fft_slices(grid, M)
    return spec[(Ellipsis,) + idx].reshape(lead + (grid.size,))


def _axes(n: int) -> tuple[int, ...]:
    return tuple(range(-n, 0))


def forward_coeffs(samples, grid: TorusGrid) -> FourierField:
    """Fourier coefficients |k_j| <= K from samples at all M^n grid nodes."""
    s = np.asarray(samples, dtype=complex)
    if s.size != grid.M**grid.n:
        raise ConfigError(f"expected {grid.M ** grid.n} samples, got {s.size}")
    s = s.reshape(grid.sample_shape)
    spec = np.fft.fftn(s, axes=_axes(grid.n)) / grid.M**grid.n
    return FourierField(grid, fft_to_coeffs(spec, grid))


def inverse_samples(field: FourierField, M: int | None = None) -> np.ndarray:
    """Samples on the M^n grid, shape (M,)*n."""
    grid = field.grid
    M = grid.M if M is None else M
    if M < 2 * grid.K + 1:
        raise ConfigError(f"M = {M} cannot resolve band limit K = {grid.K}")
    spec = coeffs_to_fft(field.coeffs, grid, M)
    return np.fft.ifftn(spec, axes=_axes(grid.n)) * M**grid.n


def inner_product(a: FourierField, b: FourierField) -> complex:
    """<a, b>, conjugate-linear in a."""
    _same_grid(a, b)
    return complex(TWO_PI**a.grid.n * np.vdot(a.coeffs, b.coeffs))


def quadrature_inner(a_samples, b_samples, n: int) -> complex:
    """Uniform-grid quadrature of conj(a) b over T^n."""
    a = np.asarray(a_samples)
    M = a.shape[-1]
    return complex((TWO_PI / M) ** n * np.vdot(a.ravel(), np.asarray(b_samples).ravel()))


def periodize(euclid_ft: Callable[[np.ndarray], np.ndarray], grid: TorusGrid) -> FourierField:
    """Fourier coefficients of sum_j phi(. - 2pi j) from phi's euclidean transform.

    ``euclid_ft`` maps an (N, n) integer array of modes to the values
    integral_{R^n} exp(-i k.y) phi(y) dy.  The periodization is then the pure
    restriction psi_hat(k) = (2pi)^{-n} euclid_ft(k).
    """
    vals = np.asarray(euclid_ft(grid.modes), dtype=complex).reshape(-1)
    if vals.size != grid.size:
        raise ConfigError("euclid_ft returned the wrong number of values")
    if not np.all(np.isfinite(vals)):
        raise ConfigError("euclid_ft returned non-finite values")
    return FourierField(grid, vals / TWO_PI**grid.n)
