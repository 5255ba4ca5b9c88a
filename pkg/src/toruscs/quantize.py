"""Toroidal quantization of symbols as matrices over the retained Fourier modes.

Kohn-Nirenberg:  Op_h(b) e^{i mu.x} = b(x, h mu) e^{i mu.x}, so
                 A[k, mu] = b_hat(k - mu, h mu).
Weyl:            A[k, mu] = b_hat(k - mu, h (k + mu) / 2), which is what the
                 reflected-argument integral definition gives on plane waves.

b_hat(m, xi) is the x-Fourier coefficient of b(., xi).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import BandLimitError, QuantizationError
from .grid import TWO_PI, FourierField, TorusGrid, coeffs_to_fft, default_samples
from .parallel import map_chunks
from .symbols import Symbol

HERMITIAN_ATOL = 1e-12

Kind = Literal["kn", "weyl"]


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    grid: TorusGrid
    entries: np.ndarray
    hermitian: bool
    kind: Kind

    def apply(self, psi: FourierField) -> FourierField:
        return FourierField(psi.grid, self.entries @ psi.coeffs)

    def expectation(self, psi: FourierField) -> complex:
        """<psi, A psi> in the L^2 inner product."""
        return complex(TWO_PI**self.grid.n * np.vdot(psi.coeffs, self.entries @ psi.coeffs))


def _quadrature_grid(n: int, M: int) -> np.ndarray:
    axis = TWO_PI * np.arange(M) / M
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _quadrature_coeffs(b: Symbol, xi: np.ndarray, D: int) -> np.ndarray:
    """b_hat(m, xi_p) for every m in the degree-D box, shape (P, (2D+1)^n)."""
    n = b.n
    Mq = default_samples(D)
    nodes = _quadrature_grid(n, Mq)
    xi = np.atleast_2d(xi)
    out = np.empty((len(xi), (2 * D + 1) ** n), dtype=complex)
    idx = np.ix_(*([np.arange(-D, D + 1) % Mq] * n))
    for p, point in enumerate(xi):
        vals = b.evaluate(nodes, np.broadcast_to(point, nodes.shape))
        if not np.all(np.isfinite(vals)):
            raise QuantizationError(f"non-finite symbol values at xi = {point.tolist()}")
        spec = np.fft.fftn(vals.reshape((Mq,) * n)) / Mq**n
        out[p] = spec[idx].ravel()
    return out


def symbol_coeff(b: Symbol, m, xi, method: str = "auto") -> complex:
    """(2pi)^{-n} integral exp(-i m.y) b(y, xi) dy."""
    m = tuple(int(v) for v in np.atleast_1d(m))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if method == "auto" and b.separable:
        total = 0j
        for t in b.terms:
            c = t.x_coeffs.get(m)
            if c is not None:
                total += c * complex(t.xi_values(xi[None, :])[0])
        if not np.isfinite(total):
            raise QuantizationError(f"non-finite symbol coefficient at xi = {xi.tolist()}")
        return total
    D = b.degree
    if max(abs(v) for v in m) > D:
        return 0j
    row = _quadrature_coeffs(b, xi[None, :], D)[0]
    pos = 0
    for v in m:
        pos = pos * (2 * D + 1) + v + D
    return complex(row[pos])


def _assemble(b: Symbol, grid: TorusGrid, kind: Kind, workers: int) -> np.ndarray:
    if b.n != grid.n:
        raise QuantizationError(f"symbol dimension {b.n} differs from grid dimension {grid.n}")
    D = b.degree
    if D > 2 * grid.K:
        raise BandLimitError(f"symbol x-degree {D} exceeds the representable span 2K = {2 * grid.K}")
    modes = grid.modes
    N = grid.size
    width = 2 * D + 1

    def column_block(sl: slice) -> np.ndarray:
        mu = modes[sl]
        diff = modes[:, None, :] - mu[None, :, :]
        inside = np.all(np.abs(diff) <= D, axis=2)
        rows, cols = np.nonzero(inside)
        d = diff[rows, cols]
        if kind == "kn":
            xi = grid.h * mu[cols]
        else:
            xi = 0.5 * grid.h * (modes[rows] + mu[cols])
        flat = np.zeros(len(rows), dtype=np.int64)
        for j in range(grid.n):
            flat = flat * width + d[:, j] + D
        vals = np.zeros(len(rows), dtype=complex)
        if b.separable:
            for t in b.terms:
                table = np.zeros(width**grid.n, dtype=complex)
                for m, c in t.x_coeffs.items():
                    pos = 0
                    for v in m:
                        pos = pos * width + v + D
                    table[pos] += c
                coeff = table[flat]
                hit = coeff != 0
                if np.any(hit):
                    vals[hit] += coeff[hit] * t.xi_values(xi[hit])
        else:
            # one quadrature per distinct momentum
            uniq, inverse = np.unique(xi, axis=0, return_inverse=True)
            table = _quadrature_coeffs(b, uniq, D)
            vals = table[inverse.ravel(), flat]
        if not np.all(np.isfinite(vals)):
            raise QuantizationError("non-finite matrix entries")
        block = np.zeros((N, len(mu)), dtype=complex)
        block[rows, cols] = vals
        return block

    chunk = max(1, min(N, 4_000_000 // max(N, 1)))
    return np.concatenate(map_chunks(column_block, N, workers, chunk=chunk), axis=1)


def _matrix(b: Symbol, grid: TorusGrid, kind: Kind, workers: int) -> OperatorMatrix:
    A = _assemble(b, grid, kind, workers)
    A.setflags(write=False)
    herm = bool(np.max(np.abs(A - A.conj().T), initial=0.0) <= HERMITIAN_ATOL)
    return OperatorMatrix(grid, A, herm, kind)


def kn_matrix(b: Symbol, grid: TorusGrid, workers: int = 1) -> OperatorMatrix:
    return _matrix(b, grid, "kn", workers)


def weyl_matrix(b: Symbol, grid: TorusGrid, workers: int = 1) -> OperatorMatrix:
    A = _matrix(b, grid, "weyl", workers)
    if not A.hermitian:
        raise QuantizationError("Weyl matrix of a real symbol failed the Hermiticity check")
    return A


def quantize(b: Symbol, grid: TorusGrid, kind: Kind = "kn", workers: int = 1) -> OperatorMatrix:
    if kind == "kn":
        return kn_matrix(b, grid, workers)
    if kind == "weyl":
        return weyl_matrix(b, grid, workers)
    raise ValueError(f"unknown quantization {kind!r}")


def apply_kn(b: Symbol, psi: FourierField) -> FourierField:
    """Op_h(b) psi through one multiplier pass and one pointwise product per term."""
    if not b.separable:
        raise QuantizationError("fast application needs a separable symbol")
    grid = psi.grid
    D = b.degree
    Mi = default_samples(grid.K + D)
    nodes = _quadrature_grid(grid.n, Mi)
    axes = tuple(range(grid.n))
    keep = np.ix_(*([np.arange(-grid.K, grid.K + 1) % Mi] * grid.n))
    out = np.zeros(grid.shape, dtype=complex)
    for t in b.terms:
        mult = t.xi_values(grid.h * grid.modes) * psi.coeffs
        samples = np.fft.ifftn(coeffs_to_fft(mult, grid, Mi), axes=axes) * Mi**grid.n
        ax = t.x_values(nodes).reshape((Mi,) * grid.n)
        spec = np.fft.fftn(ax * samples, axes=axes) / Mi**grid.n
        out += spec[keep]
    return FourierField(grid, out.ravel())


@dataclass(frozen=True)
class ProbeSpec:
    x_points: int = 32
    r_max: float = 50.0
    shells: int = 200
    directions: int = 16


@dataclass(frozen=True)
class EllipticityReport:
    passed: bool
    worst_ratio: float
    worst_x: tuple[float, ...]
    worst_xi: tuple[float, ...]
    C: float
    c: float
    order_m: float


def _directions(n: int, count: int) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        t = TWO_PI * np.arange(count) / count
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    # Fibonacci sphere
    i = np.arange(count) + 0.5
    phi = np.arccos(1 - 2 * i / count)
    theta = np.pi * (1 + 5**0.5) * i
    return np.stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)], axis=1)


def ellipticity_check(b: Symbol, probe: ProbeSpec = ProbeSpec()) -> EllipticityReport:
    """Worst ratio |b| / <xi>^m over a probe set with |xi| >= c; passes iff >= C."""
    if b.ellipticity is None:
        raise QuantizationError("symbol carries no ellipticity constants")
    C, c = b.ellipticity
    xs = _quadrature_grid(b.n, probe.x_points)
    radii = np.linspace(c, max(c, probe.r_max), probe.shells)
    dirs = _directions(b.n, probe.directions)
    xis = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, b.n)
    xis = np.unique(xis, axis=0)
    X = np.repeat(xs, len(xis), axis=0)
    XI = np.tile(xis, (len(xs), 1))
    vals = np.abs(b.evaluate(X, XI))
    ratio = vals / (1.0 + np.sum(XI * XI, axis=1)) ** (b.order_m / 2)
    i = int(np.argmin(ratio))
    worst = float(ratio[i])
    return EllipticityReport(worst >= C, worst, tuple(X[i]), tuple(XI[i]), C, c, b.order_m)
