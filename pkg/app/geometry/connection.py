"""
Canonical projective connection of a web.

Every foliation contributes linear equations in the Thomas coefficients
``Pi^k_{ij}`` expressing that its leaves are totally geodesic. For a
leaf written as a graph over the first ``m`` coordinates with slopes
``Omega[r][a]`` the equations read

    X_a(Omega[r][b]) = sum_{e<m} Omega[r][e] Pi^e(V_a, V_b) - Pi^{m+r}(V_a, V_b)

with ``V_a = e_a + sum_r Omega[r][a] e_{m+r}`` and
``X_a = d/dx^a + sum_r Omega[r][a] d/dx^{m+r}``.

Webs of hypersurfaces use an equivalent parametrization by coefficients
``A^c, B_a^c, C^c_{ab}, D_{ab}``, whose matrices are the ones printed in
the classical proof for ``n = 3``; both parametrizations are solved here.
Solving consumes one derivative: slopes of order ``q`` give Thomas
coefficients of order ``q - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from app.core.exceptions import DimensionMismatch, SingularAtPoint, UnderdeterminedWeb
from app.core.logging_config import logger
from app.geometry.tensors import (
    equation_count,
    free_unknowns,
    full_index,
    sym_pairs,
    symmetric_from_full,
    trace_elimination,
    unknown_count,
)
from app.jets.basis import get_basis
from app.jets.jet import Jet
from app.jets.linalg import JetMatrix, determinant, lsq_consistency, lu_solve, residual_norm
from app.webs.model import FramedSlopes, LinearFrame, Web, prolong

SQUARE = "square"
OVERDETERMINED = "overdetermined"


@dataclass(frozen=True)
class ThomasSymbols:
    """
    Thomas coefficients of a projective connection at a point.

    Attributes:
        pi (np.ndarray): ``(n, n, n, size)`` jet coefficients of
            ``Pi^k_{ij}``, symmetric in ``i, j``.
        nvars (int): Dimension ``n``.
        order (int): Jet order.
        point (np.ndarray): Base point (in the coordinates of the jets).
    """

    pi: np.ndarray = field(repr=False)
    nvars: int
    order: int
    point: Optional[np.ndarray] = None

    @classmethod
    def zero(cls, n: int, order: int) -> ThomasSymbols:
        """Flat connection of the affine coordinates."""
        size = get_basis(n, order).size
        return cls(np.zeros((n, n, n, size)), n, order)

    @classmethod
    def from_free(cls, values: np.ndarray, n: int, order: int, point=None) -> ThomasSymbols:
        """Restore the full symmetric array from the trace-eliminated unknowns."""
        full = np.einsum("fc,c...->f...", trace_elimination(n), values)
        return cls(symmetric_from_full(full, n), n, order, point)

    def component(self, k: int, i: int, j: int) -> Jet:
        """Return ``Pi^k_{ij}`` (0-based indices) as a jet."""
        return Jet(self.pi[k, i, j], self.nvars, self.order)

    def free_values(self) -> np.ndarray:
        """Return the ``(unknowns, size)`` trace-eliminated coefficient list."""
        return np.array([self.pi[k, i, j] for (k, i, j) in free_unknowns(self.nvars)])

    def constant(self) -> np.ndarray:
        """Constant terms, ``(n, n, n)``."""
        return self.pi[..., 0].copy()

    def max_abs(self) -> float:
        """Largest constant-term magnitude."""
        return float(np.max(np.abs(self.pi[..., 0])))

    def __sub__(self, other: ThomasSymbols) -> np.ndarray:
        return self.pi - other.pi


@dataclass(frozen=True)
class ABCDCoefficients:
    """
    Hypersurface-web parametrization of a projective connection.

    Indices run over ``0 .. m - 1`` with ``m = n - 1``.

    Attributes:
        a (np.ndarray): ``A^c`` as ``(m, size)``.
        b (np.ndarray): ``B_a^c`` as ``(m, m, size)`` indexed ``[a, c]``.
        c (np.ndarray): ``C^c_{ab}`` as ``(m, m, m, size)`` indexed ``[c, a, b]``.
        d (np.ndarray): ``D_{ab}`` as ``(m, m, size)``.
        nvars (int): Dimension ``n``.
        order (int): Jet order.
    """

    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)
    d: np.ndarray = field(repr=False)
    nvars: int
    order: int

    @classmethod
    def from_vector(cls, values: np.ndarray, n: int, order: int) -> ABCDCoefficients:
        """Unpack a solution vector in the documented column order."""
        m = n - 1
        pairs = sym_pairs(m)
        size = values.shape[-1]
        pos = 0
        a = values[pos : pos + m]
        pos += m
        b = values[pos : pos + m * m].reshape(m, m, size)
        pos += m * m
        c = np.zeros((m, m, m, size), dtype=values.dtype)
        for cc in range(m):
            for i, j in pairs:
                c[cc, i, j] = c[cc, j, i] = values[pos]
                pos += 1
        d = np.zeros((m, m, size), dtype=values.dtype)
        for i, j in pairs:
            d[i, j] = d[j, i] = values[pos]
            pos += 1
        return cls(a.copy(), b.copy(), c, d, n, order)

    def to_vector(self) -> np.ndarray:
        """Pack into the column order of the assembled systems."""
        m = self.nvars - 1
        pairs = sym_pairs(m)
        parts = list(self.a) + list(self.b.reshape(m * m, -1))
        parts += [self.c[cc, i, j] for cc in range(m) for i, j in pairs]
        parts += [self.d[i, j] for i, j in pairs]
        return np.array(parts)


def abcd_columns(n: int) -> list[str]:
    """Column labels of the hypersurface systems, 1-based like printed matrices."""
    m = n - 1
    pairs = sym_pairs(m)
    cols = [f"A^{c + 1}" for c in range(m)]
    cols += [f"B_{a + 1}^{c + 1}" for a in range(m) for c in range(m)]
    cols += [f"C^{c + 1}_{i + 1}{j + 1}" for c in range(m) for i, j in pairs]
    cols += [f"D_{i + 1}{j + 1}" for i, j in pairs]
    return cols


def abcd_to_thomas(abcd: ABCDCoefficients) -> ThomasSymbols:
    """Convert hypersurface-web coefficients to Thomas coefficients."""
    n = abcd.nvars
    m = n - 1
    last = m
    size = abcd.a.shape[-1]
    pi = np.zeros((n, n, n, size), dtype=abcd.a.dtype)
    pi_nnn = -2.0 / (n + 1) * np.einsum("aa...->...", abcd.b)
    pi_nn = -1.0 / (n + 1) * np.einsum("aab...->b...", abcd.c)
    pi[last, last, last] = pi_nnn
    for cc in range(m):
        pi[cc, last, last] = abcd.a[cc]
        for a in range(m):
            val = abcd.b[a, cc] + (0.5 * pi_nnn if a == cc else 0.0)
            pi[cc, a, last] = pi[cc, last, a] = val
    for b in range(m):
        pi[last, last, b] = pi[last, b, last] = pi_nn[b]
    for cc in range(m):
        for a in range(m):
            for b in range(m):
                val = abcd.c[cc, a, b].copy()
                if a == cc:
                    val = val + pi_nn[b]
                if b == cc:
                    val = val + pi_nn[a]
                pi[cc, a, b] = val
    for a in range(m):
        for b in range(m):
            pi[last, a, b] = -abcd.d[a, b]
    return ThomasSymbols(pi, n, abcd.order)


def thomas_to_abcd(thomas: ThomasSymbols) -> ABCDCoefficients:
    """Inverse of :func:`abcd_to_thomas`."""
    n = thomas.nvars
    m = n - 1
    last = m
    pi = thomas.pi
    a = np.array([pi[cc, last, last] for cc in range(m)])
    b = np.array(
        [
            [
                pi[cc, a_, last] - (0.5 * pi[last, last, last] if a_ == cc else 0.0)
                for cc in range(m)
            ]
            for a_ in range(m)
        ]
    )
    c = np.zeros((m, m, m) + pi.shape[3:], dtype=pi.dtype)
    for cc in range(m):
        for a_ in range(m):
            for b_ in range(m):
                val = pi[cc, a_, b_].copy()
                if a_ == cc:
                    val = val - pi[last, last, b_]
                if b_ == cc:
                    val = val - pi[last, last, a_]
                c[cc, a_, b_] = val
    d = -pi[last, :m, :m]
    return ABCDCoefficients(a, b, c, d.copy(), n, thomas.order)


def ode_coefficients_n2(thomas: ThomasSymbols) -> tuple[Jet, Jet, Jet, Jet]:
    """
    Coefficients of ``y'' = A y'^3 + B y'^2 + C y' + D`` for a planar connection.

    ``B`` here equals twice the hypersurface coefficient ``B_1^1``.
    """
    if thomas.nvars != 2:
        raise DimensionMismatch(f"planar ODE coefficients need n = 2, got {thomas.nvars}")
    p = thomas.component
    return (
        p(0, 1, 1),
        p(0, 0, 1).scale(2.0) - p(1, 1, 1),
        p(0, 0, 0) - p(1, 0, 1).scale(2.0),
        -p(1, 0, 0),
    )


def cubic_ode_residual(thomas: ThomasSymbols, omega: np.ndarray) -> Jet:
    """
    ``X(p) - (A p^3 + B p^2 + C p + D)`` for the slope ``p`` of a planar foliation.

    ``omega`` is the ``(1, 1)`` slope array in the frame ``thomas`` lives in,
    one order above ``thomas``.
    """
    a, b, c, d = ode_coefficients_n2(thomas)
    lhs = prolong(omega, 0, omega[0, 0])
    p = omega[0, 0].truncate(thomas.order)
    return lhs.truncate(thomas.order) - (((a * p + b) * p + c) * p + d)


def _lhs(omega: np.ndarray, r: int, a: int, b: int) -> Jet:
    return prolong(omega, a, omega[r, b])


def assemble_codim1_rows(omega: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Rows of a hypersurface foliation over the ``A, B, C, D`` unknowns.

    Args:
        omega (np.ndarray): ``(1, n - 1)`` slope jets of order ``q``.

    Returns:
        tuple[np.ndarray, np.ndarray]: ``(rows, cols, size)`` coefficients and
        ``(rows, size)`` right-hand sides, both at order ``q - 1``; one row
        per pair ``a <= b``.
    """
    c_dim, m = omega.shape
    if c_dim != 1:
        raise DimensionMismatch(f"hypersurface rows need codim 1, got {c_dim}")
    q = omega[0, 0].order
    slopes = [omega[0, a].truncate(q - 1) for a in range(m)]
    n = m + 1
    pairs = sym_pairs(m)
    cols = len(abcd_columns(n))
    zero = np.zeros_like(slopes[0].coeffs)
    rows, rhs = [], []
    for a, b in pairs:
        row = [zero] * cols
        wa, wb = slopes[a], slopes[b]
        wab = wa * wb
        pos = 0
        for cc in range(m):
            row[pos + cc] = (wab * slopes[cc]).coeffs
        pos += m
        for e in range(m):
            for cc in range(m):
                coef = Jet.zeros(n, q - 1)
                if e == b:
                    coef = coef + wa * slopes[cc]
                if e == a:
                    coef = coef + wb * slopes[cc]
                row[pos + e * m + cc] = coef.coeffs
        pos += m * m
        for cc in range(m):
            row[pos + cc * len(pairs) + pairs.index((a, b))] = slopes[cc].coeffs
        pos += m * len(pairs)
        one = np.zeros_like(zero)
        one[0] = 1.0
        row[pos + pairs.index((a, b))] = one
        rows.append(row)
        rhs.append(_lhs(omega, 0, a, b).coeffs)
    return np.array(rows), np.array(rhs)


def assemble_geodesic_rows(omega: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Rows expressing that the leaves are totally geodesic, over the free Thomas unknowns.

    Args:
        omega (np.ndarray): ``(c, m)`` slope jets of order ``q``.

    Returns:
        tuple[np.ndarray, np.ndarray]: ``(rows, unknowns, size)`` coefficients
        and ``(rows, size)`` right-hand sides at order ``q - 1``; rows are
        ordered by ``r`` then by pairs ``a <= b``.
    """
    c_dim, m = omega.shape
    n = c_dim + m
    q = omega[0, 0].order
    basis = get_basis(n, q - 1)
    size = basis.size
    low = np.array([[omega[r, a].truncate(q - 1).coeffs for a in range(m)] for r in range(c_dim)])

    # tangent vectors V[i, a]
    tangent = np.zeros((n, m, size), dtype=low.dtype)
    for a in range(m):
        tangent[a, a, 0] = 1.0
    tangent[m:] = low
    pairs = sym_pairs(n)
    index = full_index(n)
    reduce = trace_elimination(n)
    rows, rhs = [], []
    for r in range(c_dim):
        weights = np.zeros((n, size), dtype=low.dtype)
        weights[:m] = low[r]
        weights[m + r, 0] = -1.0
        for a, b in sym_pairs(m):
            outer = basis.mul(tangent[:, a][:, None, :], tangent[:, b][None, :, :])
            full = np.zeros((len(index), size), dtype=low.dtype)
            for i, j in pairs:
                sym = outer[i, j] + outer[j, i] if i != j else outer[i, i]
                for e in range(n):
                    full[index[(e, i, j)]] = basis.mul(weights[e], sym)
            rows.append(np.einsum("fc,f...->c...", reduce, full))
            rhs.append(_lhs(omega, r, a, b).coeffs)
    return np.array(rows), np.array(rhs)


@dataclass(frozen=True)
class CanonicalConnection:
    """
    Solution of the compatibility system of a web at one point.

    Attributes:
        thomas (ThomasSymbols): Thomas coefficients in frame coordinates.
        residual (float): Consistency residual (0 for square systems up to
            round-off).
        equations (int): Number of scalar equations.
        unknowns (int): Number of independent unknowns.
        mode (str): ``square`` or ``overdetermined``.
        framed (FramedSlopes): The slope data the system was built from.
    """

    thomas: ThomasSymbols
    residual: float
    equations: int
    unknowns: int
    mode: str
    framed: FramedSlopes = field(repr=False)


def assemble_system(
    web: Web, framed: FramedSlopes, indices: Optional[Sequence[int]] = None, use_abcd=None
) -> tuple[JetMatrix, list[Jet], bool]:
    """
    Stack the rows of the selected foliations.

    Returns:
        tuple[JetMatrix, list[Jet], bool]: Matrix, right-hand side and whether
        the hypersurface parametrization was used.
    """
    n = web.dimension
    indices = list(range(len(web.foliations))) if indices is None else list(indices)
    codims = [web.foliations[i].codim for i in indices]
    if use_abcd is None:
        use_abcd = all(c == 1 for c in codims)
    equations = equation_count(n, codims)
    unknowns = unknown_count(n)
    if equations < unknowns:
        raise UnderdeterminedWeb(equations, unknowns)
    blocks, rhs = [], []
    for i in indices:
        assemble = assemble_codim1_rows if use_abcd else assemble_geodesic_rows
        mat, vec = assemble(framed.slopes[i])
        blocks.append(mat)
        rhs.append(vec)
    order = framed.order - 1
    matrix = JetMatrix(np.concatenate(blocks), n, order)
    vector = [Jet(v, n, order) for v in np.concatenate(rhs)]
    return matrix, vector, use_abcd


def solve_framed(
    web: Web, framed: FramedSlopes, indices: Optional[Sequence[int]] = None, use_abcd=None
) -> CanonicalConnection:
    """Solve the compatibility system of the selected foliations from precomputed slopes."""
    n = web.dimension
    matrix, rhs, abcd = assemble_system(web, framed, indices, use_abcd)
    rows, cols = matrix.shape
    if rows == cols:
        solution = lu_solve(matrix, rhs)
        residual = residual_norm(matrix, solution, rhs)
        mode = SQUARE
    else:
        solution, residual = lsq_consistency(matrix, rhs)
        mode = OVERDETERMINED
    values = np.array([s.coeffs for s in solution])
    order = framed.order - 1
    if abcd:
        thomas = abcd_to_thomas(ABCDCoefficients.from_vector(values, n, order))
    else:
        thomas = ThomasSymbols.from_free(values, n, order)
    thomas = ThomasSymbols(thomas.pi, n, order, framed.point)
    logger.debug(
        f"Solved {rows}x{cols} {mode} system for '{web.label}' "
        f"(frame {framed.frame.index}), residual {residual:.3e}"
    )
    return CanonicalConnection(thomas, float(residual), rows, cols, mode, framed)


def solve_canonical(web: Web, x0: Sequence[float], order: int, seed=None) -> CanonicalConnection:
    """
    Compute the projective connection compatible with ``web`` at ``x0``.

    Args:
        web (Web): The web.
        x0 (Sequence[float]): Base point in user coordinates.
        order (int): Jet order of the slopes; Thomas jets have ``order - 1``.
        seed (Optional[int]): Seed of the generic frames.

    Raises:
        UnderdeterminedWeb: Fewer equations than unknowns.
        SingularAtPoint: The system is degenerate at ``x0``.
    """
    equations = equation_count(web.dimension, web.codims)
    if equations < unknown_count(web.dimension):
        raise UnderdeterminedWeb(equations, unknown_count(web.dimension))
    framed = web.slopes_at(x0, order, seed=seed)
    return solve_framed(web, framed)


@dataclass(frozen=True)
class SigmaTensor:
    """
    Difference of the connections of two sub-webs.

    Attributes:
        sigma (np.ndarray): ``(n, n, n, size)`` jets of ``Sigma^k_{ij}``.
        labels (tuple[int, int]): ``(n + 2, l)``, 1-based.
        reference (CanonicalConnection): Connection of the first ``n + 2`` foliations.
    """

    sigma: np.ndarray = field(repr=False)
    labels: tuple[int, int]
    reference: CanonicalConnection = field(repr=False)

    def constant(self) -> np.ndarray:
        """Constant terms, ``(n, n, n)``."""
        return self.sigma[..., 0].copy()


def sigma(
    web: Web,
    ell: int,
    x0: Optional[Sequence[float]] = None,
    order: Optional[int] = None,
    framed: Optional[FramedSlopes] = None,
    reference: Optional[CanonicalConnection] = None,
) -> SigmaTensor:
    """
    Compare the sub-web ``(F_1, .., F_{n+1}, F_l)`` with the first ``n + 2`` foliations.

    Args:
        web (Web): Hypersurface web with ``d >= n + 3`` foliations.
        ell (int): 1-based index ``l`` with ``n + 3 <= l <= d``.
        x0, order: Point and slope order (ignored when ``framed`` is given).
        framed (Optional[FramedSlopes]): Slopes of the whole web in one frame.
        reference (Optional[CanonicalConnection]): Cached ``Pi(n + 2)``.
    """
    n = web.dimension
    d = len(web.foliations)
    if not web.is_codim1:
        raise DimensionMismatch("sigma tensors are defined for hypersurface webs")
    if d < n + 3 or not n + 3 <= ell <= d:
        raise DimensionMismatch(f"need n + 3 <= l <= d, got l = {ell}, d = {d}, n = {n}")
    framed = framed or web.slopes_at(x0, order)
    if reference is None:
        reference = solve_framed(web, framed, list(range(n + 2)))
    other = solve_framed(web, framed, [*range(n + 1), ell - 1])
    return SigmaTensor(other.thomas - reference.thomas, (n + 2, ell), reference)


def normalized_mw_n3(omega4: Sequence[Jet], omega5: Sequence[Jet]) -> JetMatrix:
    """
    The 15 x 15 matrix of the normalized hypersurface 5-web in dimension 3.

    The first three foliations have normals ``dx1 - dx3``, ``dx2 - dx3`` and
    ``dx3``; ``omega4`` and ``omega5`` are the slopes of the last two.
    Columns follow :func:`abcd_columns`.
    """
    nvars, order = omega4[0].nvars, omega4[0].order
    one = Jet.constant(1.0, nvars, order)
    zero = Jet.zeros(nvars, order)
    slope_sets = [(one, zero), (zero, one), (zero, zero), tuple(omega4), tuple(omega5)]
    blocks = []
    for pair in slope_sets:
        # the matrix only reads the slopes; the padded order feeds the unused prolongation
        omega = np.empty((1, 2), dtype=object)
        for a in range(2):
            omega[0, a] = _raise_order(pair[a])
        blocks.append(assemble_codim1_rows(omega)[0])
    return JetMatrix(np.concatenate(blocks), nvars, order)


def _raise_order(jet: Jet) -> Jet:
    # pad with zero coefficients so that the prolongation keeps the input order
    size = get_basis(jet.nvars, jet.order + 1).size
    coeffs = np.zeros(size, dtype=jet.coeffs.dtype)
    coeffs[: jet.coeffs.size] = jet.coeffs
    return Jet(coeffs, jet.nvars, jet.order + 1)


def wedge_product_n3(forms: Sequence[np.ndarray]) -> float:
    """Ratio ``w_i ^ w_j ^ w_k / dx1 ^ dx2 ^ dx3`` of three covectors."""
    return float(np.linalg.det(np.array(forms, dtype=float)))


@dataclass(frozen=True)
class DeterminantRatio:
    """
    Determinant of a compatibility system against its wedge-product formula.

    Attributes:
        determinant (float): Constant term of the system determinant.
        product (float): The wedge and pairing product it is compared with.
        ratio (float): ``determinant / product``.
    """

    determinant: float
    product: float
    ratio: float


def _ratio(det: float, product: float) -> DeterminantRatio:
    if abs(product) < 1e-300:
        raise SingularAtPoint("the foliations are not in general position")
    return DeterminantRatio(det, product, det / product)


def mw_determinant_ratio(omega4: Sequence[float], omega5: Sequence[float]) -> DeterminantRatio:
    """
    Compare ``det(M_W)`` with the product of all triple wedges of the five normals.

    The expected ratio is 4 for every pair of slopes.
    """
    jets = [[Jet.constant(v, 3, 0) for v in omega] for omega in (omega4, omega5)]
    det = determinant(normalized_mw_n3(*jets)).value
    forms = [(1.0, 0.0, -1.0), (0.0, 1.0, -1.0), (0.0, 0.0, 1.0)]
    forms += [(omega[0], omega[1], -1.0) for omega in (omega4, omega5)]
    product = 1.0
    for triple in combinations(forms, 3):
        product *= wedge_product_n3(triple)
    return _ratio(float(np.real(det)), product)


def mixed_determinant_ratio(web: Web, x0: Sequence[float]) -> DeterminantRatio:
    """
    Compare the determinant of a mixed 6-web system with its factorization.

    The product is ``(w1^w2^w3)^3 (X1^X2^X3)^2 prod_ij w_i(X_j)`` over the
    normalized forms ``(Omega_1, Omega_2, -1)`` and directions
    ``(1, Omega^2, Omega^3)`` in user coordinates; the ratio is a constant
    of the parametrization.
    """
    if not web.is_mixed or web.codims.count(1) != 3 or web.codims.count(2) != 3:
        raise DimensionMismatch("expected three hypersurface and three curve foliations in n = 3")
    framed = web.slopes_at(x0, 1, frame=LinearFrame.identity(3))
    matrix, _, _ = assemble_system(web, framed, use_abcd=False)
    det = float(np.real(np.linalg.det(matrix.constant())))
    forms, directions = [], []
    for omega in framed.slopes:
        values = [[float(np.real(entry.value)) for entry in row] for row in omega]
        if omega.shape == (1, 2):
            forms.append((values[0][0], values[0][1], -1.0))
        else:
            directions.append((1.0, values[0][0], values[1][0]))
    product = wedge_product_n3(forms) ** 3 * wedge_product_n3(directions) ** 2
    for form in forms:
        for direction in directions:
            product *= float(np.dot(form, direction))
    return _ratio(det, product)
