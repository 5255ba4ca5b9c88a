"""Spectral propagator exp(-i t Op_h(b) / h) on finite eigenfunction superpositions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fbi import DEFAULT_TOL, reconstruct_error, truncation_radius
from .grid import TWO_PI, FourierField
from .spectral import EigenDecomposition


@dataclass(frozen=True, eq=False)
class Superposition:
    """phi = sum_j c_j psi_j over the eigen-indices ``indices``."""

    dec: EigenDecomposition
    indices: np.ndarray
    coeffs: np.ndarray
    J0: float = 1.0
    Q_exp: float = 1.0

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int).reshape(-1)
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if len(idx) != len(c):
            raise ConfigError("indices and coefficients differ in length")
        if len(idx) == 0:
            raise ConfigError("empty superposition")
        if np.any(idx < 0) or np.any(idx >= len(self.dec)):
            raise ConfigError(f"eigen-index out of range 0..{len(self.dec) - 1}")
        if len(np.unique(idx)) != len(idx):
            raise ConfigError("repeated eigen-index")
        if np.any(np.abs(c) > 1 + 1e-12):
            raise ConfigError("superposition coefficients must satisfy |c_j| <= 1")
        bound = self.J0 * self.dec.grid.h ** (-self.Q_exp)
        if len(idx) > bound * (1 + 1e-12):
            raise ConfigError(f"J = {len(idx)} exceeds J0 h^-Q = {bound:.6g}")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def equal_weights(cls, dec: EigenDecomposition, indices, **kw) -> "Superposition":
        idx = np.asarray(indices, dtype=int)
        return cls(dec, idx, np.full(len(idx), 1 / math.sqrt(len(idx))), **kw)

    @classmethod
    def from_state(cls, dec: EigenDecomposition, psi: FourierField, **kw) -> "Superposition":
        """Expand a field in the full eigenbasis."""
        c = TWO_PI**dec.grid.n * (dec.vectors.conj().T @ psi.coeffs)
        kw.setdefault("J0", float(len(dec)))
        kw.setdefault("Q_exp", 0.0)
        return cls(dec, np.arange(len(dec)), c, **kw)

    @property
    def normalized(self) -> bool:
        return abs(float(np.sum(np.abs(self.coeffs) ** 2)) - 1.0) <= 1e-12

    @property
    def J(self) -> int:
        return len(self.indices)


def _check_time(t: float) -> float:
    t = float(t)
    if not math.isfinite(t):
        raise ConfigError(f"time must be finite, got {t}")
    return t


def evolved_coefficients(s: Superposition, t: float) -> np.ndarray:
    t = _check_time(t)
    E = s.dec.eigenvalues[s.indices]
    return s.coeffs * np.exp(-1j * E * t / s.dec.grid.h)


def propagate(s: Superposition, t: float) -> FourierField:
    """sum_j c_j exp(-i E_j t / h) psi_j."""
    c = evolved_coefficients(s, t)
    return FourierField(s.dec.grid, s.dec.vectors[:, s.indices] @ c)


def evolve(s: Superposition, t: float) -> Superposition:
    """The superposition at time t, as a superposition."""
    return Superposition(s.dec, s.indices, evolved_coefficients(s, t), s.J0, s.Q_exp)


def ell_radius(s: Superposition, tol: float = DEFAULT_TOL) -> float:
    """Largest truncation radius over the eigenfunctions in the superposition."""
    return max(truncation_radius(s.dec.state(int(j)), tol) for j in s.indices)


def invariance_experiment(
    s: Superposition, times, tol: float = DEFAULT_TOL, method: str = "direct", workers: int = 1
) -> tuple[float, list[tuple[float, float]]]:
    """Reconstruction error of U(t) phi at a radius fixed once from the eigenfunctions.

    Returns (radius, [(t, error), ...]).
    """
    times = [_check_time(t) for t in times]
    if not times:
        raise ConfigError("need at least one time")
    R = ell_radius(s, tol)
    rows = [(t, reconstruct_error(propagate(s, t), R, method=method, workers=workers)) for t in times]
    return R, rows
