"""Eigenpairs of quantized elliptic symbols, Weyl counting, localization radii."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConfigError, QuantizationError, ResourceCapError, SolverError
from .fbi import DEFAULT_TOL, truncation_radius
from .grid import TWO_PI, FourierField, TorusGrid
from .quantize import OperatorMatrix, _directions, _quadrature_grid
from .symbols import Symbol

RESIDUAL_RTOL = 1e-9
ORTHO_ATOL = 1e-10
TIE_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Ascending eigenvalues; column j of ``vectors`` holds the coefficients of psi_j.

    Columns are scaled to unit L^2 norm, i.e. (2pi)^n V^H V = I.
    """

    grid: TorusGrid
    eigenvalues: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray

    @property
    def K_used(self) -> int:
        return self.grid.K

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def state(self, j: int) -> FourierField:
        return FourierField(self.grid, self.vectors[:, j])

    def orthonormality_defect(self) -> float:
        G = TWO_PI**self.grid.n * (self.vectors.conj().T @ self.vectors)
        return float(np.max(np.abs(G - np.eye(len(G)))))


def _order_ties(w: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Ascending order; near-equal eigenvalues ordered by their dominant mode index."""
    dominant = np.argmax(np.abs(V), axis=0)
    scale = max(1.0, float(np.max(np.abs(w)))) if len(w) else 1.0
    order = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > TIE_RTOL * scale:
            group = list(range(start, i))
            order.extend(sorted(group, key=lambda j: (dominant[j], j)))
            start = i
    return np.asarray(order, dtype=int)


def eigendecompose(A: OperatorMatrix) -> EigenDecomposition:
    """Full dense Hermitian eigendecomposition with residual and orthogonality checks."""
    if not A.hermitian:
        raise QuantizationError("eigendecompose needs a Hermitian operator matrix")
    H = 0.5 * (A.entries + A.entries.conj().T)
    try:
        w, V = scipy.linalg.eigh(H, driver="evd")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"dense eigensolver failed: {exc}") from None
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(V))):
        raise SolverError("dense eigensolver returned non-finite output")
    order = _order_ties(w, V)
    w, V = w[order], V[:, order]
    # fix phases: dominant component real and positive
    dom = np.argmax(np.abs(V), axis=0)
    phase = V[dom, np.arange(V.shape[1])]
    V = V * (np.abs(phase) / phase)[None, :]
    return assemble_decomposition(A, w, V / math.sqrt(TWO_PI**A.grid.n))


def residual_norms(A: OperatorMatrix, eigenvalues: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """||A v_j - E_j v_j|| in the L^2 norm (unit-norm eigenfunctions)."""
    R = A.entries @ vectors - vectors * eigenvalues[None, :]
    return math.sqrt(TWO_PI**A.grid.n) * np.linalg.norm(R, axis=0)


def assemble_decomposition(A: OperatorMatrix, eigenvalues: np.ndarray, vectors: np.ndarray) -> EigenDecomposition:
    """Wrap eigenpairs (fresh or loaded from a cache) after checking residuals and orthonormality."""
    w = np.asarray(eigenvalues, dtype=float)
    V = np.asarray(vectors, dtype=complex)
    if V.shape != (A.grid.size, len(w)):
        raise SolverError("eigenvector array has the wrong shape")
    res = residual_norms(A, w, V)
    norm_est = float(np.max(np.abs(w))) if len(w) else 0.0
    if np.any(res > RESIDUAL_RTOL * max(norm_est, 1.0)):
        raise SolverError(f"eigen-residual {float(np.max(res)):.3g} exceeds tolerance")
    if np.any(np.diff(w) < -TIE_RTOL * max(norm_est, 1.0)):
        raise SolverError("eigenvalues are not ascending")
    w.setflags(write=False)
    V.setflags(write=False)
    dec = EigenDecomposition(A.grid, w, V, res)
    if dec.orthonormality_defect() > ORTHO_ATOL:
        raise SolverError("eigenvectors failed the orthonormality check")
    return dec


def count_states(dec: EigenDecomposition, E: float, refined: EigenDecomposition | None = None) -> int:
    """Number of eigenvalues <= E, optionally checked against a refined solve."""
    count = int(np.searchsorted(dec.eigenvalues, E, side="right"))
    if refined is not None:
        other = int(np.searchsorted(refined.eigenvalues, E, side="right"))
        if other != count:
            raise SolverError(f"state count below E = {E} changes under band refinement ({count} -> {other})")
    return count


@dataclass(frozen=True)
class SublevelVolume:
    E: float
    volume: float
    stderr: float
    samples: int
    seed: int
    box_radius: float


def bounding_radius(b: Symbol, E: float, step: float = 0.05, r_cap: float = 1e3, probe: int = 64) -> float:
    """Radius beyond which b > E on the probe set; 0 when b > E everywhere probed."""
    xs = _quadrature_grid(b.n, probe if b.n == 1 else max(8, int(round(probe ** (1 / b.n))) * 2))
    dirs = _directions(b.n, 32)

    def below(r: float) -> bool:
        xi = r * dirs
        X = np.repeat(xs, len(xi), axis=0)
        XI = np.tile(xi, (len(xs), 1))
        return bool(np.any(b(X, XI) <= E))

    if b.ellipticity is not None:
        C, c = b.ellipticity
        # C <xi>^m > |E| once <xi> exceeds (|E| / C)^{1/m}
        if b.order_m > 0:
            r_top = max(c, math.sqrt(max((abs(E) / C) ** (2 / b.order_m) - 1.0, 0.0))) + step
        else:
            r_top = None
        if r_top is not None and r_top <= r_cap and not below(r_top):
            steps = int(math.ceil(r_top / step))
            last_hit = -1
            for i in range(steps + 1):
                if below(i * step):
                    last_hit = i
            return 0.0 if last_hit < 0 else (last_hit + 1) * step
    last_hit = -1
    i = 0
    while i * step <= r_cap:
        if below(i * step):
            last_hit = i
        elif last_hit >= 0 and i > 2 * last_hit + 20:
            return (last_hit + 1) * step
        elif last_hit < 0 and i > 200:
            return 0.0
        i += 1
    raise ResourceCapError(f"no bounding radius for the sublevel set E = {E} within {r_cap}")


def sublevel_volume(b: Symbol, E: float, samples: int = 1_000_000, seed: int = 0, batch: int = 200_000) -> SublevelVolume:
    """Monte Carlo volume of {(x, xi) in T^n x R^n : b(x, xi) <= E}.

    Uses a counter-based (Philox) stream, so the estimate is a pure function of
    (samples, seed).
    """
    if samples < 1:
        raise ConfigError("need at least one Monte Carlo sample")
    R = bounding_radius(b, E)
    if R == 0.0:
        return SublevelVolume(float(E), 0.0, 0.0, int(samples), int(seed), 0.0)
    box = TWO_PI**b.n * (2 * R) ** b.n
    rng = np.random.Generator(np.random.Philox(seed))
    hits = 0
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        x = rng.uniform(0.0, TWO_PI, size=(m, b.n))
        xi = rng.uniform(-R, R, size=(m, b.n))
        hits += int(np.count_nonzero(b(x, xi) <= E))
        done += m
    p = hits / samples
    return SublevelVolume(float(E), box * p, box * math.sqrt(p * (1 - p) / samples), int(samples), int(seed), R)


def classical_radius(b: Symbol, E: float) -> float:
    """Largest |xi| on the probed sublevel set {b <= E}."""
    return bounding_radius(b, E, step=0.01)


def localization_radius(dec: EigenDecomposition, E: float, tol: float = DEFAULT_TOL) -> tuple[float, list[float]]:
    """g(E, h): the largest truncation radius over eigenfunctions with E_j <= E.

    Returns (g, per-state radii); g = 0 when no eigenvalue lies below E.
    """
    count = count_states(dec, E)
    radii = [truncation_radius(dec.state(j), tol) for j in range(count)]
    return (max(radii) if radii else 0.0), radii
