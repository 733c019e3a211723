"""Exact integer matrices as numpy object arrays of Python ints."""

from __future__ import annotations

import numpy as np


def mat(data, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Coerce ``data`` into a 2-D object array of Python ints.

    Empty inputs are ambiguous (``[]`` could be 0 x n or n x 0), so pass
    ``shape`` whenever it is known.
    """
    if isinstance(data, np.ndarray) and data.dtype == object and data.ndim == 2:
        out = data
    else:
        arr = np.array(data, dtype=object)
        if arr.size == 0:
            if shape is None:
                raise ValueError("empty matrix needs an explicit shape")
            return zeros(*shape)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1) if shape is None or shape[0] == 1 else arr.reshape(-1, 1)
        out = np.empty(arr.shape, dtype=object)
        for idx, v in np.ndenumerate(arr):
            if int(v) != v:
                raise ValueError(f"non-integer entry {v!r}")
            out[idx] = int(v)
    if shape is not None and out.shape != tuple(shape):
        raise ValueError(f"matrix has shape {out.shape}, expected {tuple(shape)}")
    return out


def zeros(m: int, n: int) -> np.ndarray:
    out = np.empty((m, n), dtype=object)
    out.fill(0)
    return out


def eye(n: int) -> np.ndarray:
    out = zeros(n, n)
    for i in range(n):
        out[i, i] = 1
    return out


def vec(data, n: int | None = None) -> np.ndarray:
    """Column vector (n x 1)."""
    vals = [int(v) for v in data]
    if n is not None and len(vals) != n:
        raise ValueError(f"vector has length {len(vals)}, expected {n}")
    out = zeros(len(vals), 1)
    for i, v in enumerate(vals):
        out[i, 0] = v
    return out


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    if a.shape[1] == 0:
        return zeros(a.shape[0], b.shape[1])
    return a.dot(b)


def hstack(blocks: list[np.ndarray], rows: int) -> np.ndarray:
    blocks = [b for b in blocks if b.shape[1]]
    if not blocks:
        return zeros(rows, 0)
    return np.hstack(blocks)


def vstack(blocks: list[np.ndarray], cols: int) -> np.ndarray:
    blocks = [b for b in blocks if b.shape[0]]
    if not blocks:
        return zeros(0, cols)
    return np.vstack(blocks)


def block_diag(blocks: list[np.ndarray]) -> np.ndarray:
    m = sum(b.shape[0] for b in blocks)
    n = sum(b.shape[1] for b in blocks)
    out = zeros(m, n)
    i = j = 0
    for b in blocks:
        out[i:i + b.shape[0], j:j + b.shape[1]] = b
        i += b.shape[0]
        j += b.shape[1]
    return out


def to_lists(a: np.ndarray) -> list[list[int]]:
    return [[int(v) for v in row] for row in a]


def is_zero(a: np.ndarray) -> bool:
    return not any(v != 0 for v in a.flat)
