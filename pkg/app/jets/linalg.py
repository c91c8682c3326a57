"""
Dense linear algebra over the truncated-jet ring.

Matrices are stored as ``(rows, cols, size)`` coefficient arrays so that
elimination steps act on whole rows at once. A jet is invertible exactly
when its constant term is, so pivots are ranked by constant-term magnitude;
the higher coefficients of the solution then follow automatically, which
amounts to implicit differentiation of the pointwise solution.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.exceptions import ShapeMismatch, SingularAtPoint
from app.jets.basis import MonomialBasis, basis_size, get_basis
from app.jets.jet import Jet, compose_series, scalar_dtype

LAPLACE_MAX_ROWS = 4


class JetMatrix:
    """
    Rectangular matrix of jets sharing one ``(nvars, order)`` shape.

    Attributes:
        data (np.ndarray): ``(rows, cols, size)`` coefficient array.
        nvars (int): Number of variables of every entry.
        order (int): Truncation order of every entry.
    """

    __array_ufunc__ = None

    def __init__(self, data: np.ndarray, nvars: int, order: int):
        data = np.array(data, dtype=scalar_dtype(data))
        if data.ndim != 3 or data.shape[0] * data.shape[1] == 0:
            raise ShapeMismatch(f"jet matrix needs a non-empty 3-d array, got {data.shape}")
        if data.shape[2] != basis_size(nvars, order):
            raise ShapeMismatch(
                f"entries of length {data.shape[2]} do not match "
                f"jet({nvars} vars, order {order})"
            )
        self.data = data
        self.nvars = nvars
        self.order = order

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Jet]]) -> JetMatrix:
        """Build a matrix from nested lists of jets."""
        first = rows[0][0]
        for row in rows:
            if len(row) != len(rows[0]):
                raise ShapeMismatch("ragged jet matrix rows")
            for entry in row:
                if entry.nvars != first.nvars or entry.order != first.order:
                    raise ShapeMismatch("jet matrix entries differ in shape")
        data = np.array([[entry.coeffs for entry in row] for row in rows])
        return cls(data, first.nvars, first.order)

    @classmethod
    def from_constants(cls, values, nvars: int, order: int) -> JetMatrix:
        """Lift a numeric matrix to constant jets."""
        values = np.asarray(values)
        data = np.zeros(values.shape + (basis_size(nvars, order),), dtype=scalar_dtype(values))
        data[..., 0] = values
        return cls(data, nvars, order)

    @classmethod
    def identity(cls, size: int, nvars: int, order: int) -> JetMatrix:
        """Return the identity matrix."""
        return cls.from_constants(np.eye(size), nvars, order)

    @property
    def shape(self) -> tuple[int, int]:
        """``(rows, cols)``."""
        return self.data.shape[0], self.data.shape[1]

    @property
    def basis(self) -> MonomialBasis:
        """Basis tables of the entries."""
        return get_basis(self.nvars, self.order)

    def __getitem__(self, key: tuple[int, int]) -> Jet:
        row, col = key
        return Jet(self.data[row, col], self.nvars, self.order)

    def constant(self) -> np.ndarray:
        """Return the numeric matrix of constant terms."""
        return self.data[..., 0].copy()

    def rows(self, indices: Sequence[int]) -> JetMatrix:
        """Return the sub-matrix made of the given rows."""
        return JetMatrix(self.data[list(indices)], self.nvars, self.order)

    def __matmul__(self, other: JetMatrix) -> JetMatrix:
        if self.shape[1] != other.shape[0]:
            raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
        if (self.nvars, self.order) != (other.nvars, other.order):
            raise ShapeMismatch("jet matrices differ in entry shape")
        return JetMatrix(_matmul(self.data, other.data, self.basis), self.nvars, self.order)

    def apply(self, vector: Sequence[Jet]) -> list[Jet]:
        """Return the matrix-vector product with a list of jets."""
        vec = _vector_data(vector, self)
        out = self.basis.mul(self.data, vec[None, :, :]).sum(axis=1)
        return [Jet(row, self.nvars, self.order) for row in out]

    def __repr__(self) -> str:
        return f"JetMatrix(shape={self.shape}, nvars={self.nvars}, order={self.order})"


def _vector_data(vector: Sequence[Jet], matrix: JetMatrix) -> np.ndarray:
    for entry in vector:
        if entry.nvars != matrix.nvars or entry.order != matrix.order:
            raise ShapeMismatch("vector entries do not match the matrix entries")
    return np.array([entry.coeffs for entry in vector])


def _matmul(x: np.ndarray, y: np.ndarray, basis: MonomialBasis) -> np.ndarray:
    return basis.mul(x[:, :, None, :], y[None, :, :, :]).sum(axis=1)


def _reciprocal(coeffs: np.ndarray, nvars: int, order: int) -> np.ndarray:
    jet = Jet(coeffs, nvars, order)
    a0 = jet.value
    return compose_series(jet, [(-1) ** k / a0 ** (k + 1) for k in range(order + 1)]).coeffs


def _tol(pivot_tol: Optional[float]) -> float:
    return settings.pivot_tol if pivot_tol is None else pivot_tol


def lu_solve(
    matrix: JetMatrix, rhs: Sequence[Jet], pivot_tol: Optional[float] = None
) -> list[Jet]:
    """
    Solve ``matrix @ s = rhs`` through the truncation order.

    Args:
        matrix (JetMatrix): Square system matrix.
        rhs (Sequence[Jet]): Right-hand side, one jet per row.
        pivot_tol (Optional[float]): Smallest accepted pivot constant term.
            Defaults to settings.pivot_tol.

    Returns:
        list[Jet]: The solution vector.

    Raises:
        SingularAtPoint: No pivot with a large enough constant term remains.
    """
    rows, cols = matrix.shape
    if rows != cols:
        raise ShapeMismatch(f"lu_solve needs a square matrix, got {matrix.shape}")
    if len(rhs) != rows:
        raise ShapeMismatch(f"right-hand side has {len(rhs)} entries for {rows} rows")
    basis = matrix.basis
    tol = _tol(pivot_tol)
    b = _vector_data(rhs, matrix)
    dtype = np.result_type(matrix.data, b)
    a = matrix.data.astype(dtype)
    b = b.astype(dtype)
    inverses = []
    for k in range(rows):
        pivot = k + int(np.argmax(np.abs(a[k:, k, 0])))
        if abs(a[pivot, k, 0]) < tol:
            raise SingularAtPoint(
                f"no unit pivot in column {k} (best constant term "
                f"{abs(a[pivot, k, 0]):.3e} < {tol:g})"
            )
        if pivot != k:
            a[[k, pivot]] = a[[pivot, k]]
            b[[k, pivot]] = b[[pivot, k]]
        inv = _reciprocal(a[k, k], matrix.nvars, matrix.order)
        inverses.append(inv)
        if k + 1 < rows:
            factors = basis.mul(a[k + 1 :, k], inv)
            a[k + 1 :, k:] -= basis.mul(factors[:, None, :], a[k, k:][None, :, :])
            b[k + 1 :] -= basis.mul(factors, b[k])

    solution = np.zeros_like(b)
    for k in range(rows - 1, -1, -1):
        acc = b[k] - basis.mul(a[k, k + 1 :], solution[k + 1 :]).sum(axis=0)
        solution[k] = basis.mul(acc, inverses[k])
    return [Jet(row, matrix.nvars, matrix.order) for row in solution]


def select_pivot_rows(matrix: JetMatrix, pivot_tol: Optional[float] = None) -> list[int]:
    """
    Choose ``cols`` rows forming an invertible square subsystem.

    Rows are picked by Gaussian elimination with partial pivoting on the
    constant-term matrix, taking in each column the remaining row with the
    largest entry.
    """
    tol = _tol(pivot_tol)
    work = matrix.constant()
    rows, cols = work.shape
    remaining = list(range(rows))
    chosen = []
    for k in range(cols):
        best = max(remaining, key=lambda r: abs(work[r, k]))
        if abs(work[best, k]) < tol:
            raise SingularAtPoint(
                f"system is rank deficient at column {k} "
                f"(best pivot {abs(work[best, k]):.3e} < {tol:g})"
            )
        remaining.remove(best)
        chosen.append(best)
        for r in remaining:
            work[r] -= (work[r, k] / work[best, k]) * work[best]
    return sorted(chosen)


def lsq_consistency(
    matrix: JetMatrix, rhs: Sequence[Jet], pivot_tol: Optional[float] = None
) -> tuple[list[Jet], float]:
    """
    Solve an overdetermined system on a pivot-selected square subsystem.

    Returns:
        tuple[list[Jet], float]: The solution of the selected rows and the
        largest constant-term residual of the rows left out. A vanishing
        residual means the full system is consistent at the point.
    """
    rows, cols = matrix.shape
    if rows < cols:
        raise ShapeMismatch(f"lsq_consistency needs rows >= cols, got {matrix.shape}")
    chosen = select_pivot_rows(matrix, pivot_tol)
    solution = lu_solve(matrix.rows(chosen), [rhs[r] for r in chosen], pivot_tol)
    left_out = [r for r in range(rows) if r not in chosen]
    if not left_out:
        return solution, 0.0
    products = matrix.rows(left_out).apply(solution)
    residual = max(abs((p - rhs[r]).value) for p, r in zip(products, left_out))
    return solution, float(residual)


def residual_norm(matrix: JetMatrix, solution: Sequence[Jet], rhs: Sequence[Jet]) -> float:
    """Largest coefficient of ``matrix @ solution - rhs`` over all rows."""
    products = matrix.apply(solution)
    return max((p - r).max_abs() for p, r in zip(products, rhs))


def _det_laplace(a: np.ndarray, basis: MonomialBasis) -> np.ndarray:
    size = a.shape[0]
    if size == 1:
        return a[0, 0]
    if size == 2:
        return basis.mul(a[0, 0], a[1, 1]) - basis.mul(a[0, 1], a[1, 0])
    total = np.zeros_like(a[0, 0])
    for col in range(size):
        minor = np.delete(np.delete(a, 0, axis=0), col, axis=1)
        term = basis.mul(a[0, col], _det_laplace(minor, basis))
        total = total + term if col % 2 == 0 else total - term
    return total


def _det_bird(a: np.ndarray, basis: MonomialBasis) -> np.ndarray:
    size = a.shape[0]

    def mu(x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        diag_sum = np.zeros_like(x[0, 0])
        for i in range(size - 1, -1, -1):
            out[i, i] = diag_sum
            out[i, i + 1 :] = x[i, i + 1 :]
            diag_sum = diag_sum - x[i, i]
        return out

    f = a
    for _ in range(size - 1):
        f = _matmul(mu(f), a, basis)
    return -f[0, 0] if size % 2 == 0 else f[0, 0]


def _det_division_free(a: np.ndarray, basis: MonomialBasis) -> np.ndarray:
    if a.shape[0] <= LAPLACE_MAX_ROWS:
        return _det_laplace(a, basis)
    return _det_bird(a, basis)


def determinant(matrix: JetMatrix, pivot_tol: Optional[float] = None) -> Jet:
    """
    Determinant through the truncation order.

    Elimination with partial pivoting is used while unit pivots exist; when
    it stalls, the remaining block is expanded without divisions (Laplace
    for small blocks, Bird's algorithm otherwise). A vanishing constant term
    is a legal result.
    """
    rows, cols = matrix.shape
    if rows != cols:
        raise ShapeMismatch(f"determinant needs a square matrix, got {matrix.shape}")
    basis = matrix.basis
    tol = _tol(pivot_tol)
    a = matrix.data.copy()
    det = np.zeros_like(a[0, 0])
    det[0] = 1.0
    for k in range(rows):
        pivot = k + int(np.argmax(np.abs(a[k:, k, 0])))
        if abs(a[pivot, k, 0]) < tol:
            det = basis.mul(det, _det_division_free(a[k:, k:], basis))
            return Jet(det, matrix.nvars, matrix.order)
        if pivot != k:
            a[[k, pivot]] = a[[pivot, k]]
            det = -det
        det = basis.mul(det, a[k, k])
        if k + 1 < rows:
            inv = _reciprocal(a[k, k], matrix.nvars, matrix.order)
            factors = basis.mul(a[k + 1 :, k], inv)
            a[k + 1 :, k:] -= basis.mul(factors[:, None, :], a[k, k:][None, :, :])
    return Jet(det, matrix.nvars, matrix.order)
