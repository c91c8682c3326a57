"""
Index bookkeeping and tensor transformation helpers.

Jet-valued tensors are stored as numpy arrays whose last axis holds jet
coefficients, e.g. ``pi[k, i, j, :]`` for ``Pi^k_{ij}``. Transformations
act on constant terms only.
"""

from functools import lru_cache

import numpy as np


def sym_pairs(n: int) -> list[tuple[int, int]]:
    """Return the pairs ``i <= j`` in ascending order."""
    return [(i, j) for i in range(n) for j in range(i, n)]


def unknown_count(n: int) -> int:
    """Number of independent projective connection coefficients."""
    return n * (n - 1) * (n + 2) // 2


def equation_count(n: int, codims) -> int:
    """Number of scalar equations the foliations of a web contribute."""
    return sum(c * (n - c) * (n - c + 1) // 2 for c in codims)


@lru_cache(maxsize=None)
def full_index(n: int) -> dict[tuple[int, int, int], int]:
    """Position of ``Pi^k_{ij}`` (``i <= j``) in the full symmetric list."""
    pairs = sym_pairs(n)
    return {(k, i, j): k * len(pairs) + p for k in range(n) for p, (i, j) in enumerate(pairs)}


@lru_cache(maxsize=None)
def free_unknowns(n: int) -> tuple[tuple[int, int, int], ...]:
    """
    Thomas unknowns left after the trace relations.

    ``Pi^n_{nj}`` (0-based ``k = j' = n - 1``) is eliminated through
    ``Pi^n_{nj} = -sum_{c < n} Pi^c_{cj}``.
    """
    last = n - 1
    return tuple(
        (k, i, j) for k in range(n) for (i, j) in sym_pairs(n) if not (k == last and j == last)
    )


@lru_cache(maxsize=None)
def trace_elimination(n: int) -> np.ndarray:
    """
    Constant ``(full, free)`` matrix expressing every symmetric coefficient.

    Multiplying the free unknown vector by this matrix restores the full
    list, trace relations included.
    """
    index = full_index(n)
    free = {key: col for col, key in enumerate(free_unknowns(n))}
    last = n - 1
    out = np.zeros((len(index), len(free)))
    for (k, i, j), row in index.items():
        if (k, i, j) in free:
            out[row, free[(k, i, j)]] = 1.0
            continue
        other = i  # the pair is (i, n-1)
        for c in range(last):
            out[row, free[(c, *sorted((c, other)))]] -= 1.0
    return out


def symmetric_from_full(values: np.ndarray, n: int) -> np.ndarray:
    """Spread a ``(full, size)`` coefficient list into an ``(n, n, n, size)`` array."""
    out = np.zeros((n, n, n) + values.shape[1:], dtype=values.dtype)
    for (k, i, j), pos in full_index(n).items():
        out[k, i, j] = values[pos]
        out[k, j, i] = values[pos]
    return out


def transform_tensor(tensor: np.ndarray, to_new: np.ndarray, up: int) -> np.ndarray:
    """
    Change coordinates of a constant tensor with ``up`` leading contravariant indices.

    Args:
        tensor (np.ndarray): Components in the old coordinates ``x``.
        to_new (np.ndarray): Jacobian ``d xnew / d x`` at the point.
        up (int): Number of contravariant (leading) indices.

    Returns:
        np.ndarray: Components in the new coordinates.
    """
    back = np.linalg.inv(to_new)
    out = tensor
    for axis in range(tensor.ndim):
        mat = to_new if axis < up else back.T
        out = np.moveaxis(np.tensordot(mat, out, axes=([1], [axis])), 0, axis)
    return out


def max_abs(tensor: np.ndarray) -> float:
    """Largest component magnitude (0 for an empty array)."""
    return float(np.max(np.abs(tensor))) if tensor.size else 0.0
