"""
Graded monomial bases for truncated multivariate Taylor expansions.

A jet in ``nvars`` variables truncated at ``order`` stores one coefficient
per multi-index ``alpha`` with ``|alpha| <= order``. Multi-indices are
ordered by total degree, then in descending lexicographic order, so that the
basis of a lower order is a prefix of the basis of a higher order and
truncation is a slice.

The tables built here are cached per ``(nvars, order)`` and shared by every
jet of that shape.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb

import numpy as np


def basis_size(nvars: int, order: int) -> int:
    """Return the number of multi-indices of total degree at most ``order``."""
    return comb(nvars + order, order)


def _monomials_of_degree(nvars: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        alpha = [0] * nvars
        for var in combo:
            alpha[var] += 1
        out.append(tuple(alpha))
    return sorted(out, reverse=True)


@dataclass(frozen=True)
class MonomialBasis:
    """
    Cached index tables of one jet shape.

    Attributes:
        nvars (int): Number of variables.
        order (int): Truncation order.
        exponents (np.ndarray): ``(size, nvars)`` multi-indices in storage order.
        degrees (np.ndarray): Total degree of each multi-index.
        left (np.ndarray): First factor index of every product pair.
        right (np.ndarray): Second factor index of every product pair.
        scatter (np.ndarray): ``(pairs, size)`` 0/1 matrix summing pair
            products into their target coefficient.
    """

    nvars: int
    order: int
    exponents: np.ndarray = field(repr=False)
    degrees: np.ndarray = field(repr=False)
    index: dict = field(repr=False)
    left: np.ndarray = field(repr=False)
    right: np.ndarray = field(repr=False)
    scatter: np.ndarray = field(repr=False)
    powers: tuple = field(repr=False)

    @property
    def size(self) -> int:
        """Number of stored coefficients."""
        return len(self.exponents)

    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Multiply coefficient arrays along the last axis, with broadcasting."""
        return (x[..., self.left] * y[..., self.right]) @ self.scatter

    def partial_table(self, var: int) -> tuple[np.ndarray, np.ndarray]:
        """
        Return ``(source, factor)`` realizing the partial derivative in ``var``.

        Coefficient ``beta`` of the derivative, for ``|beta| <= order - 1``,
        equals ``factor[beta] * coeffs[source[beta]]``.
        """
        return _partial_table(self.nvars, self.order, var)


@lru_cache(maxsize=None)
def get_basis(nvars: int, order: int) -> MonomialBasis:
    """Build (once) the basis tables of jets with the given shape."""
    exponents = [
        alpha for degree in range(order + 1)
        for alpha in _monomials_of_degree(nvars, degree)
    ]
    index = {alpha: pos for pos, alpha in enumerate(exponents)}
    exps = np.array(exponents, dtype=int).reshape(len(exponents), nvars)
    degrees = exps.sum(axis=1)

    left, right, target = [], [], []
    for i, alpha in enumerate(exponents):
        for j, beta in enumerate(exponents):
            if degrees[i] + degrees[j] > order:
                continue
            left.append(i)
            right.append(j)
            target.append(index[tuple(a + b for a, b in zip(alpha, beta))])
    scatter = np.zeros((len(target), len(exponents)))
    scatter[np.arange(len(target)), target] = 1.0

    # positions of the pure powers x_i^k, used to seed variable jets
    powers = tuple(
        index[tuple(1 if v == var else 0 for v in range(nvars))] if order else -1
        for var in range(nvars)
    )
    return MonomialBasis(
        nvars=nvars,
        order=order,
        exponents=exps,
        degrees=degrees,
        index=index,
        left=np.array(left, dtype=int),
        right=np.array(right, dtype=int),
        scatter=scatter,
        powers=powers,
    )


@lru_cache(maxsize=None)
def _partial_table(nvars: int, order: int, var: int) -> tuple[np.ndarray, np.ndarray]:
    full = get_basis(nvars, order)
    lower = basis_size(nvars, order - 1)
    source = np.empty(lower, dtype=int)
    factor = np.empty(lower)
    for pos in range(lower):
        alpha = list(full.exponents[pos])
        alpha[var] += 1
        source[pos] = full.index[tuple(alpha)]
        factor[pos] = alpha[var]
    return source, factor
