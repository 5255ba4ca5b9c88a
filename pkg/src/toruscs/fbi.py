"""Toroidal FBI transform: analysis, synthesis and the frame multiplier.

Analysis pairs a field with every periodized coherent state on the lattice
ball {xi = h*a : |xi| <= R}:

    (T psi)(x, xi) = <Phi_{x,xi}, psi>
                   = sum_k A exp(i k.x) exp(-h |k + a|^2 / 2) psi_hat(k),

A = alpha_h (2 pi h)^{n/2}.  For each lattice point this is one inverse FFT
of Gaussian-weighted coefficients.  Synthesis is the exact adjoint for the
phase-space measure h^n (per lattice point) times dx.  Their composition is
diagonal in Fourier space with symbol

    m_R(k) = (h/pi)^{n/2} sum_{|h a| <= R} exp(-h |k + a|^2),

which tends to c(h) = (theta(h) sqrt(h/pi))^n = 1 + O(exp(-pi^2/h)) as R grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coherent import gaussian_weight, packet_amplitude
from .errors import ConfigError, ResourceCapError, UnattainableToleranceError
from .grid import (
    TWO_PI,
    FourierField,
    TorusGrid,
    coeffs_to_fft,
    fft_to_coeffs,
)
from .parallel import map_chunks, tree_sum

DEFAULT_MAX_LATTICE = 200_000
DEFAULT_TOL = 1e-8
# exp(-x) underflows to 0 in double precision beyond this
_UNDERFLOW = 745.0


@dataclass(frozen=True, eq=False)
class PhaseSpaceField:
    """Values on (grid nodes) x (lattice ball), shape (lattice points, M^n)."""

    grid: TorusGrid
    radius: float
    lattice: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.lattice), self.grid.M**self.grid.n):
            raise ConfigError(
                f"values shape {self.values.shape} does not match "
                f"{len(self.lattice)} lattice points x {self.grid.M ** self.grid.n} nodes"
            )

    @property
    def momenta(self) -> np.ndarray:
        return self.grid.h * self.lattice

    def norm(self) -> float:
        return math.sqrt(max(phase_space_inner(self, self).real, 0.0))

    def mass(self, mask: np.ndarray | None = None) -> float:
        """Sum over lattice points of the x-quadrature of the values."""
        cell = (TWO_PI / self.grid.M) ** self.grid.n
        vals = self.values.real if mask is None else self.values.real[mask]
        return float(cell * tree_sum(vals.sum(axis=1))) if len(vals) else 0.0


@dataclass(frozen=True)
class FrameDiagnostics:
    c_tilde: float
    multiplier: np.ndarray
    radius: float
    tail_bound: float


def lattice_points(grid: TorusGrid, R: float, max_lattice: int = DEFAULT_MAX_LATTICE) -> np.ndarray:
    """Integer vectors a with |h a| <= R, lexicographic, shape (L, n)."""
    if not R >= 0 or not np.isfinite(R):
        raise ConfigError(f"radius must be finite and >= 0, got {R}")
    h, n = grid.h, grid.n
    A = int(math.floor(R / h * (1 + 1e-12) + 1e-9))
    box = (2 * A + 1) ** n
    if box > 4 * max_lattice + 64:
        raise ResourceCapError(f"lattice ball of radius {R} exceeds the cap of {max_lattice} points")
    axis = np.arange(-A, A + 1)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    r2 = (R / h) ** 2 * (1 + 1e-12)
    pts = pts[np.sum(pts * pts, axis=1) <= r2]
    if len(pts) > max_lattice:
        raise ResourceCapError(f"lattice ball of radius {R} has {len(pts)} points (cap {max_lattice})")
    return pts


def _weights(grid: TorusGrid, lattice: np.ndarray) -> np.ndarray:
    # (L, N): A * exp(-h |k + a|^2 / 2)
    return packet_amplitude(grid.n, grid.h) * gaussian_weight(
        grid.modes[None, :, :], lattice[:, None, :], grid.h
    )


def analyze(
    psi: FourierField,
    R: float,
    workers: int = 1,
    max_lattice: int = DEFAULT_MAX_LATTICE,
) -> PhaseSpaceField:
    """FBI transform of ``psi`` on every lattice point with |xi| <= R."""
    grid = psi.grid
    lattice = lattice_points(grid, R, max_lattice)
    axes = tuple(range(1, grid.n + 1))
    scale = grid.M**grid.n

    def run(sl: slice) -> np.ndarray:
        coeffs = _weights(grid, lattice[sl]) * psi.coeffs[None, :]
        spec = coeffs_to_fft(coeffs, grid)
        return (np.fft.ifftn(spec, axes=axes) * scale).reshape(len(coeffs), -1)

    parts = map_chunks(run, len(lattice), workers)
    values = np.concatenate(parts) if parts else np.zeros((0, scale), dtype=complex)
    return PhaseSpaceField(grid, float(R), lattice, values)


def synthesize(F: PhaseSpaceField, workers: int = 1) -> FourierField:
    """Adjoint of :func:`analyze` for the measure h^n dx per lattice point."""
    grid = F.grid
    if len(F.lattice) == 0:
        return FourierField.zeros(grid)
    axes = tuple(range(1, grid.n + 1))
    scale = grid.M**grid.n
    hn = grid.h**grid.n

    def run(sl: slice) -> np.ndarray:
        vals = F.values[sl].reshape((-1,) + grid.sample_shape)
        fhat = fft_to_coeffs(np.fft.fftn(vals, axes=axes) / scale, grid)
        return hn * _weights(grid, F.lattice[sl]) * fhat

    contributions = np.concatenate(map_chunks(run, len(F.lattice), workers))
    return FourierField(grid, tree_sum(contributions))


def phase_space_inner(F: PhaseSpaceField, G: PhaseSpaceField) -> complex:
    """sum over lattice of h^n * quadrature_x conj(F) G."""
    if F.grid != G.grid or not np.array_equal(F.lattice, G.lattice):
        raise ConfigError("phase-space fields live on different supports")
    cell = (F.grid.h * TWO_PI / F.grid.M) ** F.grid.n
    rows = np.einsum("ij,ij->i", F.values.conj(), G.values)
    return complex(cell * tree_sum(rows))


def frame_constant(n: int, h: float) -> float:
    """Tight-frame constant (theta(h) sqrt(h/pi))^n, theta(h) = sum_m exp(-h m^2)."""
    if not h > 0:
        raise ConfigError(f"h must be positive, got {h}")
    W = int(math.ceil(math.sqrt(_UNDERFLOW / h))) + 1
    theta = math.fsum(math.exp(-h * m * m) for m in range(-W, W + 1))
    return (theta * math.sqrt(h / math.pi)) ** n


def _poisson_tail(h: float) -> float:
    # 2 sum_{j>=1} exp(-pi^2 j^2 / h)
    terms = []
    j = 1
    while True:
        e = math.pi**2 * j * j / h
        if e > _UNDERFLOW:
            break
        terms.append(math.exp(-e))
        j += 1
    return 2.0 * math.fsum(terms)


def frame_constant_poisson(n: int, h: float) -> float:
    """Same constant through the dual series (1 + 2 sum_j exp(-pi^2 j^2/h))^n."""
    if not h > 0:
        raise ConfigError(f"h must be positive, got {h}")
    return (1.0 + _poisson_tail(h)) ** n


def frame_defect(n: int, h: float) -> float:
    """c(h) - 1 without cancellation."""
    if not h > 0:
        raise ConfigError(f"h must be positive, got {h}")
    return math.expm1(n * math.log1p(_poisson_tail(h)))


def multiplier_table(grid: TorusGrid, R: float, max_lattice: int = DEFAULT_MAX_LATTICE) -> np.ndarray:
    """m_R(k) over the retained modes."""
    lattice = lattice_points(grid, R, max_lattice)
    if len(lattice) == 0:
        return np.zeros(grid.size)
    w = gaussian_weight(grid.modes[:, None, :], lattice[None, :, :], grid.h) ** 2
    return (grid.h / math.pi) ** (grid.n / 2) * w.sum(axis=1)


def frame_multiplier(k, R: float, grid: TorusGrid) -> float:
    """m_R at a single integer vector k (need not be retained)."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    lattice = lattice_points(grid, R)
    if len(lattice) == 0:
        return 0.0
    d = lattice + k[None, :]
    terms = np.exp(-grid.h * np.sum(d * d, axis=1))
    return float((grid.h / math.pi) ** (grid.n / 2) * math.fsum(terms))


def one_minus_multiplier(grid: TorusGrid, R: float, max_lattice: int = DEFAULT_MAX_LATTICE) -> np.ndarray:
    """1 - m_R(k) over the retained modes.

    In one dimension this is assembled as (1 - c) + tail(k) so that values far
    below machine epsilon keep their relative accuracy.
    """
    if grid.n != 1:
        return 1.0 - multiplier_table(grid, R, max_lattice)
    h = grid.h
    lattice_points(grid, R, max_lattice)  # resource guard
    A = int(math.floor(R / h * (1 + 1e-12) + 1e-9))
    k = grid.modes[:, 0]
    # missing lattice terms: j = k + a with a > A, and (by symmetry) a < -A
    starts = np.concatenate([k + A + 1, A + 1 - k])
    span = int(math.ceil(math.sqrt(_UNDERFLOW / h))) + 1
    J = int(np.max(np.abs(starts))) + span
    j = np.arange(-J, J + 1)
    terms = np.exp(-h * (j * j).astype(float))
    # suffix sums accumulated from the small end
    suffix = np.cumsum(terms[::-1])[::-1]
    tails = suffix[starts + J]
    tail = tails[: len(k)] + tails[len(k):]
    return math.sqrt(h / math.pi) * tail - frame_defect(1, h)


def frame_diagnostics(grid: TorusGrid, R: float) -> FrameDiagnostics:
    c = frame_constant(grid.n, grid.h)
    m = multiplier_table(grid, R)
    return FrameDiagnostics(c, m, float(R), float(np.max(c - m)))


def ample_radius(grid: TorusGrid, eps: float = 1e-16) -> float:
    """A lattice radius for which m_R is within ~eps of c(h) on every retained mode."""
    reach = grid.K * math.sqrt(grid.n)
    A = math.ceil(reach + math.sqrt(math.log(1.0 / eps) / grid.h) + 2)
    return A * grid.h


def _check_nonzero(psi: FourierField) -> float:
    nrm = float(np.linalg.norm(psi.coeffs))
    if nrm == 0.0:
        raise ConfigError("reconstruction error is undefined for the zero field")
    return nrm


def multiplier_error(psi: FourierField, R: float, defect: np.ndarray | None = None) -> float:
    """Relative reconstruction error through the closed-form multiplier."""
    nrm = _check_nonzero(psi)
    d = one_minus_multiplier(psi.grid, R) if defect is None else defect
    return float(np.linalg.norm(d * psi.coeffs) / nrm)


def reconstruct_error(psi: FourierField, R: float, method: str = "direct", workers: int = 1) -> float:
    """||psi - T*_R T_R psi|| / ||psi||."""
    if method == "multiplier":
        return multiplier_error(psi, R)
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    nrm = _check_nonzero(psi)
    rec = synthesize(analyze(psi, R, workers=workers), workers=workers)
    return float(np.linalg.norm(psi.coeffs - rec.coeffs) / nrm)


def truncation_radius(psi: FourierField, tol: float = DEFAULT_TOL, max_index: int = 1 << 16) -> float:
    """Smallest R in {h, 2h, ...} with reconstruction error <= tol.

    Doubling on the shell index brackets the answer, bisection pins it.
    """
    grid = psi.grid
    floor = frame_defect(grid.n, grid.h)
    if not tol > floor:
        raise UnattainableToleranceError(
            f"tol = {tol:.3g} is not above the frame defect c(h) - 1 = {floor:.3g} at h = {grid.h}"
        )
    _check_nonzero(psi)
    cache: dict[int, bool] = {}

    def ok(j: int) -> bool:
        if j not in cache:
            cache[j] = multiplier_error(psi, j * grid.h) <= tol
        return cache[j]

    hi = 1
    while not ok(hi):
        hi *= 2
        if hi > max_index:
            raise ResourceCapError(f"no radius up to {max_index * grid.h} reaches tol = {tol:.3g}")
    lo = hi // 2
    if hi == 1:
        return grid.h
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi * grid.h


def husimi(psi: FourierField, R: float, workers: int = 1) -> PhaseSpaceField:
    """Density h^n |T psi|^2 of the normalized field."""
    F = analyze(psi.normalized(), R, workers=workers)
    dens = psi.grid.h**psi.grid.n * np.abs(F.values) ** 2
    return PhaseSpaceField(F.grid, F.radius, F.lattice, dens)
