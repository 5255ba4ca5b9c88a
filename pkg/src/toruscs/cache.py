"""Binary eigendecomposition cache.

Little-endian layout:

    b"TCS1"
    u32 n, u32 K, u32 M, f64 h, u64 dim
    u64 symbol hash (FNV-1a of the canonical symbol text)
    dim x f64 eigenvalues, ascending
    dim*dim x (f64 re, f64 im) eigenvectors, column-major, columns in
        eigenvalue order, rows in lexicographic mode order
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import TorusGrid

MAGIC = b"TCS1"
_HEADER = struct.Struct("<4sIIIdQQ")


def encode(grid: TorusGrid, symbol_hash: int, eigenvalues: np.ndarray, vectors: np.ndarray) -> bytes:
    dim = len(eigenvalues)
    if vectors.shape != (grid.size, dim) or dim != grid.size:
        raise ValueError("eigendecomposition does not match the grid")
    head = _HEADER.pack(MAGIC, grid.n, grid.K, grid.M, grid.h, dim, symbol_hash)
    vals = np.ascontiguousarray(eigenvalues, dtype="<f8").tobytes()
    vecs = np.asarray(vectors, dtype="<c16").tobytes(order="F")
    return head + vals + vecs


def decode(data: bytes) -> tuple[tuple[int, int, int, float, int], np.ndarray, np.ndarray]:
    """Returns ((n, K, M, h, symbol_hash), eigenvalues, vectors)."""
    if len(data) < _HEADER.size:
        raise ValueError("cache file truncated")
    magic, n, K, M, h, dim, sym = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError("not an eigendecomposition cache")
    expected = _HEADER.size + 8 * dim + 16 * dim * dim
    if len(data) != expected:
        raise ValueError(f"cache size {len(data)} != expected {expected}")
    off = _HEADER.size
    vals = np.frombuffer(data, dtype="<f8", count=dim, offset=off).astype(float)
    off += 8 * dim
    vecs = np.frombuffer(data, dtype="<c16", count=dim * dim, offset=off)
    vecs = vecs.reshape((dim, dim), order="F").astype(complex)
    return (n, K, M, h, sym), vals, vecs


def write(path: Path, grid: TorusGrid, symbol_hash: int, eigenvalues, vectors) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(encode(grid, symbol_hash, np.asarray(eigenvalues), np.asarray(vectors)))
    tmp.replace(path)


def read_matching(path: Path, grid: TorusGrid, symbol_hash: int):
    """(eigenvalues, vectors) when the cache at ``path`` matches, else None."""
    path = Path(path)
    if not path.is_file():
        return None
    try:
        (n, K, M, h, sym), vals, vecs = decode(path.read_bytes())
    except ValueError:
        return None
    if (n, K, M, h, sym) != (grid.n, grid.K, grid.M, grid.h, symbol_hash):
        return None
    return vals, vecs
