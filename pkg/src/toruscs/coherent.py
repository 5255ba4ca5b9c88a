"""Gaussian coherent states on R^n and their periodizations on T^n.

The euclidean packet is

    phi_{x,xi}(y) = alpha_h exp((i/h)(x - y).xi) exp(-|x - y|^2 / (2h))

with xi restricted to the lattice h Z^n.  Its transform
integral exp(-i k.y) phi(y) dy equals

    alpha_h (2 pi h)^{n/2} exp(-i k.x) exp(-|h k + xi|^2 / (2h)),

so the periodized state concentrates at the frequency k = -xi/h.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BandLimitError, ConfigError
from .grid import TWO_PI, FourierField, TorusGrid, inverse_samples, periodize

BOUNDARY_RTOL = 1e-14


def alpha(n: int, h: float) -> float:
    """Normalization constant 2^{-n/2} (pi h)^{-3n/4}."""
    if not h > 0:
        raise ConfigError(f"h must be positive, got {h}")
    return 2.0 ** (-n / 2) * (np.pi * h) ** (-3 * n / 4)


def packet_amplitude(n: int, h: float) -> float:
    """alpha_h (2 pi h)^{n/2}, the common prefactor of every transform value."""
    return alpha(n, h) * (TWO_PI * h) ** (n / 2)


@dataclass(frozen=True)
class CoherentPoint:
    """Phase-space point (x, xi) with xi = h * index."""

    x: tuple[float, ...]
    index: tuple[int, ...]
    h: float

    def __post_init__(self):
        x = tuple(float(v) % TWO_PI for v in np.atleast_1d(self.x))
        idx = tuple(int(v) for v in np.atleast_1d(self.index))
        if len(x) != len(idx):
            raise ConfigError("x and xi must have the same dimension")
        if not self.h > 0:
            raise ConfigError(f"h must be positive, got {self.h}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "index", idx)

    @classmethod
    def from_momentum(cls, x, xi, h: float) -> "CoherentPoint":
        """Build from a real momentum, which must lie on h Z^n to 1e-12."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        ratio = xi / h
        idx = np.rint(ratio)
        if np.any(np.abs(ratio - idx) > 1e-12 * np.maximum(1.0, np.abs(ratio))):
            raise ConfigError(f"xi = {xi.tolist()} is not on the lattice h Z^n (h = {h})")
        return cls(tuple(np.atleast_1d(x)), tuple(idx.astype(int)), h)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def xi(self) -> np.ndarray:
        return self.h * np.asarray(self.index, dtype=float)


def gaussian_weight(modes: np.ndarray, index, h: float) -> np.ndarray:
    """exp(-|h k + xi|^2 / (2h)) = exp(-h |k + index|^2 / 2) over rows of ``modes``."""
    d = np.asarray(modes, dtype=float) + np.asarray(index, dtype=float)
    return np.exp(-0.5 * h * np.sum(d * d, axis=-1))


def euclid_gaussian_ft(k, p: CoherentPoint) -> complex | np.ndarray:
    """Euclidean Fourier transform of phi_{x,xi} at integer k (single or (N, n))."""
    k = np.asarray(k, dtype=float)
    single = k.ndim <= 1
    kk = np.atleast_2d(k.reshape(-1, p.n) if single else k)
    phase = np.exp(-1j * (kk @ np.asarray(p.x)))
    out = packet_amplitude(p.n, p.h) * phase * gaussian_weight(kk, p.index, p.h)
    return complex(out[0]) if single else out


def coherent_coeffs(p: CoherentPoint, grid: TorusGrid) -> FourierField:
    """Fourier coefficients of the periodized coherent state Phi_{x,xi}."""
    if p.n != grid.n:
        raise ConfigError("point and grid dimensions differ")
    if abs(p.h - grid.h) > 1e-15 * grid.h:
        raise ConfigError(f"point h = {p.h} differs from grid h = {grid.h}")
    modes = grid.modes
    edge = np.any(np.abs(modes) == grid.K, axis=1)
    worst = float(np.max(gaussian_weight(modes[edge], p.index, p.h)))
    if worst > BOUNDARY_RTOL:
        raise BandLimitError(
            f"coherent state at xi/h = {list(p.index)} still has relative weight "
            f"{worst:.3g} at the band edge K = {grid.K}"
        )
    return periodize(lambda k: euclid_gaussian_ft(k, p), grid)


def coherent_samples(p: CoherentPoint, grid: TorusGrid) -> np.ndarray:
    """Position samples of Phi_{x,xi} on the grid, shape (M,)*n."""
    return inverse_samples(coherent_coeffs(p, grid))


def image_sum(p: CoherentPoint, y: np.ndarray, images: int = 8) -> np.ndarray:
    """Direct sum over translates |j_i| <= images of the euclidean packet at points y (P, n)."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    x = np.asarray(p.x)
    xi = p.xi
    shifts = np.arange(-images, images + 1)
    mesh = np.meshgrid(*([shifts] * p.n), indexing="ij")
    js = np.stack([m.ravel() for m in mesh], axis=1) * TWO_PI
    out = np.zeros(y.shape[0], dtype=complex)
    a = alpha(p.n, p.h)
    for j in js:
        d = x - (y - j)
        out += a * np.exp(1j / p.h * (d @ xi)) * np.exp(-np.sum(d * d, axis=1) / (2 * p.h))
    return out
