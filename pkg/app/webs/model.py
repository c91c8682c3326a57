"""
Webs of foliations in graph (slope) form.

A codimension-``c`` foliation of an ``n``-dimensional domain is stored by the
expressions it was given with (first integrals, raw slopes or a direction
field). Slope jets ``Omega[k][a]`` are produced on demand, in the coordinates
of a :class:`LinearFrame`: leaves are graphs ``x^k = Z^k(t)`` over the first
``m = n - c`` frame coordinates with ``dZ^k/dt^a = Omega[k][a]``.

All foliations of a web share one frame. The identity frame is tried first
and seeded generic frames follow when the leaves are not transverse to the
projection onto the first coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import ceil
from typing import Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.exceptions import (
    InputError,
    IntegrabilityFailure,
    SingularAtPoint,
    TransversalityFailure,
)
from app.core.logging_config import logger
from app.dsl.field import ScalarField
from app.dsl.nodes import Binary, Var, to_text
from app.jets.basis import basis_size, get_basis
from app.jets.jet import Jet, seed_point
from app.jets.linalg import JetMatrix, lu_solve

FIRST_INTEGRALS = "first_integrals"
SLOPES = "slopes"
DIRECTION = "direction"

MIN_FRAME_DET = 1e-8


@dataclass(frozen=True)
class LinearFrame:
    """
    Affine coordinates ``xbar = matrix @ x + translation``.

    Attributes:
        matrix (np.ndarray): Invertible ``n x n`` matrix.
        translation (np.ndarray): Offset vector.
        index (int): 0 for the identity frame, ``k`` for the k-th generic one.
    """

    matrix: np.ndarray
    translation: np.ndarray
    index: int = 0

    def __post_init__(self):
        if abs(np.linalg.det(self.matrix)) < MIN_FRAME_DET:
            raise InputError("frame matrix is not invertible")

    @classmethod
    def identity(cls, n: int) -> LinearFrame:
        """Return the frame of the user coordinates."""
        return cls(np.eye(n), np.zeros(n), 0)

    @classmethod
    def generic(cls, n: int, seed: int, index: int) -> LinearFrame:
        """Return the ``index``-th seeded random orthogonal frame."""
        rng = np.random.default_rng([seed, index])
        q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        return cls(q, np.zeros(n), index)

    @property
    def inverse(self) -> np.ndarray:
        """Inverse of the frame matrix."""
        return np.linalg.inv(self.matrix)

    def to_frame(self, point: Sequence[float]) -> np.ndarray:
        """Map a point from user to frame coordinates."""
        return self.matrix @ np.asarray(point, dtype=float) + self.translation

    def user_jets(self, x0: Sequence[float], order: int) -> list[Jet]:
        """Jets of the user coordinates as functions of the frame coordinates at ``x0``."""
        n = len(x0)
        basis = get_basis(n, order)
        inv = self.inverse
        out = []
        for i in range(n):
            coeffs = np.zeros(basis_size(n, order))
            coeffs[0] = x0[i]
            if order:
                for j in range(n):
                    coeffs[basis.powers[j]] = inv[i, j]
            out.append(Jet(coeffs, n, order))
        return out


def prolong(omega: np.ndarray, a: int, f: Jet) -> Jet:
    """
    Apply ``X_a = d/dx^a + sum_k Omega[k][a] d/dx^(m+k)`` to ``f``.

    The result has one order less than ``f``; ``omega`` must have at least
    that order.
    """
    c, m = omega.shape
    out = f.partial(a)
    for k in range(c):
        out = out + omega[k, a].truncate(out.order) * f.partial(m + k)
    return out


def integrability_residual(omega: np.ndarray) -> float:
    """Largest constant term of ``X_a(Omega[k][b]) - X_b(Omega[k][a])``."""
    c, m = omega.shape
    worst = 0.0
    for k in range(c):
        for a, b in combinations(range(m), 2):
            diff = prolong(omega, a, omega[k, b]) - prolong(omega, b, omega[k, a])
            worst = max(worst, abs(diff.value))
    return worst


@dataclass(frozen=True)
class Foliation:
    """
    Codimension-``codim`` foliation of an ``nvars``-dimensional domain.

    Attributes:
        kind (str): ``first_integrals``, ``slopes`` or ``direction``.
        codim (int): Codimension ``c`` with ``1 <= c <= n - 1``.
        nvars (int): Ambient dimension ``n``.
        fields (tuple[ScalarField, ...]): The ``c`` first integrals, the
            ``c * m`` slopes row-major, or the ``n`` direction components.
    """

    kind: str
    codim: int
    nvars: int
    fields: tuple[ScalarField, ...]
    label: str = ""

    @property
    def leaf_dim(self) -> int:
        """Dimension ``m = n - c`` of the leaves."""
        return self.nvars - self.codim

    def slopes(
        self,
        x0: Sequence[float],
        order: int,
        frame: Optional[LinearFrame] = None,
        check_integrability: bool = True,
    ) -> np.ndarray:
        """
        Return the ``(c, m)`` array of slope jets at ``x0`` in frame coordinates.

        Raises:
            TransversalityFailure: The leaves are not graphs over the first
                ``m`` frame coordinates at ``x0``.
            IntegrabilityFailure: Raw slopes whose prolongations do not commute.
        """
        frame = frame or LinearFrame.identity(self.nvars)
        if self.kind == FIRST_INTEGRALS:
            return self._slopes_from_first_integrals(x0, order, frame)
        if self.kind == DIRECTION:
            return self._slopes_from_direction(x0, order, frame)
        omega = self._slopes_from_raw(x0, order, frame)
        if check_integrability and order >= 1 and self.leaf_dim > 1:
            residual = integrability_residual(omega)
            if residual > settings.integrability_tol:
                raise IntegrabilityFailure(
                    f"slope field {self.label or ''} is not integrable", residual
                )
        return omega

    def _slopes_from_first_integrals(self, x0, order, frame) -> np.ndarray:
        n, c, m = self.nvars, self.codim, self.leaf_dim
        coords = frame.user_jets(x0, order + 1)
        values = [u.evaluate(coords) for u in self.fields]
        grads = [[u.partial(i) for i in range(n)] for u in values]
        minor = JetMatrix.from_rows([[grads[r][m + k] for k in range(c)] for r in range(c)])
        omega = np.empty((c, m), dtype=object)
        for a in range(m):
            try:
                column = lu_solve(minor, [-grads[r][a] for r in range(c)])
            except SingularAtPoint as exc:
                raise TransversalityFailure(
                    f"first integrals {self._names()} have a singular transverse minor"
                ) from exc
            for k in range(c):
                omega[k, a] = column[k]
        return omega

    def _slopes_from_direction(self, x0, order, frame) -> np.ndarray:
        coords = frame.user_jets(x0, order)
        user = [x.evaluate(coords) for x in self.fields]
        vec = [
            sum((user[j].scale(frame.matrix[i, j]) for j in range(self.nvars)),
                Jet.zeros(self.nvars, order))
            for i in range(self.nvars)
        ]
        if abs(vec[0].value) < settings.pivot_tol:
            raise TransversalityFailure(
                f"direction field {self._names()} is tangent to x1 = const"
            )
        omega = np.empty((self.nvars - 1, 1), dtype=object)
        for k in range(1, self.nvars):
            omega[k - 1, 0] = vec[k] / vec[0]
        return omega

    def _slopes_from_raw(self, x0, order, frame) -> np.ndarray:
        n, c, m = self.nvars, self.codim, self.leaf_dim
        coords = frame.user_jets(x0, order)
        raw = [f.evaluate(coords) for f in self.fields]
        one = Jet.constant(1.0, n, order)
        zero = Jet.zeros(n, order)
        # tangent vectors e_a + sum_k Omega[k][a] e_(m+k) in user coordinates
        tangent = [
            [one if i == a else zero for a in range(m)] if i < m
            else [raw[(i - m) * m + a] for a in range(m)]
            for i in range(n)
        ]
        moved = [
            [
                sum((tangent[j][a].scale(frame.matrix[i, j]) for j in range(n)), zero)
                for a in range(m)
            ]
            for i in range(n)
        ]
        omega = np.empty((c, m), dtype=object)
        # Omega_frame = bottom @ top^-1, solved row by row through the transpose
        top_t = JetMatrix.from_rows([[moved[b][a] for b in range(m)] for a in range(m)])
        for k in range(c):
            try:
                row = lu_solve(top_t, [moved[m + k][a] for a in range(m)])
            except SingularAtPoint as exc:
                raise TransversalityFailure(
                    f"slope field {self._names()} is not transverse in this frame"
                ) from exc
            for a in range(m):
                omega[k, a] = row[a]
        return omega

    def _names(self) -> str:
        return "[" + ", ".join(f.source or f.to_text() for f in self.fields) + "]"


def _check_codim(codim: int, n: int):
    if not 1 <= codim <= n - 1:
        raise InputError(f"codimension {codim} outside 1..{n - 1}")


def foliation_from_first_integrals(
    u: Sequence[ScalarField], n: int, label: str = ""
) -> Foliation:
    """Foliation whose leaves are the common level sets of ``c`` first integrals."""
    _check_codim(len(u), n)
    return Foliation(FIRST_INTEGRALS, len(u), n, tuple(u), label)


def foliation_from_direction(x: Sequence[ScalarField], n: int, label: str = "") -> Foliation:
    """Foliation by the integral curves of a vector field."""
    if len(x) != n:
        raise InputError(f"direction field needs {n} components, got {len(x)}")
    return Foliation(DIRECTION, n - 1, n, tuple(x), label)


def foliation_from_slopes(
    omega: Sequence[ScalarField], n: int, codim: int, label: str = ""
) -> Foliation:
    """Foliation given by its graph slopes ``Omega[k][a]``, row-major."""
    _check_codim(codim, n)
    if len(omega) != codim * (n - codim):
        raise InputError(
            f"codim {codim} slopes need {codim * (n - codim)} expressions, got {len(omega)}"
        )
    return Foliation(SLOPES, codim, n, tuple(omega), label)


@dataclass(frozen=True)
class FramedSlopes:
    """
    Slope jets of every foliation of a web at one point.

    Attributes:
        frame (LinearFrame): Frame the jets are expressed in.
        point (np.ndarray): Base point in frame coordinates.
        order (int): Jet order of the slopes.
        slopes (tuple[np.ndarray, ...]): One ``(c, m)`` jet array per foliation.
    """

    frame: LinearFrame
    point: np.ndarray
    order: int
    slopes: tuple


@dataclass(frozen=True)
class GeneralPositionResult:
    """
    Outcome of a general position check.

    Attributes:
        passed (bool): Whether every checked subset is non-degenerate.
        kind (Optional[str]): Failing test: ``duplicate``, ``normals``,
            ``forms``, ``directions`` or ``pairing``.
        witness (Optional[tuple[int, ...]]): 1-based indices of the failing
            subset (within the forms and direction sublists for mixed webs).
        value (Optional[float]): Normalized determinant of the witness.
    """

    passed: bool
    kind: Optional[str] = None
    witness: Optional[tuple[int, ...]] = None
    value: Optional[float] = None


@dataclass(frozen=True)
class Web:
    """
    Ordered family of foliations on an ``n``-dimensional domain.

    Attributes:
        dimension (int): Ambient dimension ``n``.
        foliations (tuple[Foliation, ...]): The foliations, in order.
        label (str): Human readable name.
        variables (Optional[tuple[str, ...]]): Coordinate names.
    """

    dimension: int
    foliations: tuple[Foliation, ...]
    label: str = ""
    variables: Optional[tuple[str, ...]] = field(default=None)

    def __post_init__(self):
        for f in self.foliations:
            if f.nvars != self.dimension:
                raise InputError(
                    f"foliation in {f.nvars} variables inside a {self.dimension}-dimensional web"
                )

    @property
    def codims(self) -> tuple[int, ...]:
        """Codimension of each foliation."""
        return tuple(f.codim for f in self.foliations)

    @property
    def is_codim1(self) -> bool:
        """Whether every foliation is by hypersurfaces."""
        return all(c == 1 for c in self.codims)

    @property
    def is_mixed(self) -> bool:
        """Whether hypersurfaces and curves are mixed in dimension 3."""
        return self.dimension == 3 and set(self.codims) == {1, 2}

    def subweb(self, indices: Sequence[int], label: str = "") -> Web:
        """Return the web made of the foliations at the given 0-based indices."""
        return Web(
            self.dimension,
            tuple(self.foliations[i] for i in indices),
            label or self.label,
            self.variables,
        )

    def slopes_at(
        self,
        x0: Sequence[float],
        order: int,
        seed: Optional[int] = None,
        retries: Optional[int] = None,
        frame: Optional[LinearFrame] = None,
    ) -> FramedSlopes:
        """
        Compute the slope jets of all foliations in one common frame.

        The identity frame is tried first, then up to ``retries`` seeded
        generic frames, unless ``frame`` pins the frame.
        """
        n = self.dimension
        if frame is not None:
            candidates = [frame]
        else:
            seed = settings.seed if seed is None else seed
            retries = settings.frame_retries if retries is None else retries
            candidates = [LinearFrame.identity(n)] + [
                LinearFrame.generic(n, seed, k) for k in range(1, retries + 1)
            ]
        last_error: Optional[TransversalityFailure] = None
        for candidate in candidates:
            try:
                slopes = tuple(f.slopes(x0, order, candidate) for f in self.foliations)
            except TransversalityFailure as exc:
                last_error = exc
                logger.debug(f"Frame {candidate.index} rejected at {list(x0)}: {exc}")
                continue
            if candidate.index and frame is None:
                logger.warning(
                    f"Web '{self.label}' is not transverse in user coordinates at "
                    f"{list(x0)}; using generic frame {candidate.index}"
                )
            return FramedSlopes(candidate, candidate.to_frame(x0), order, slopes)
        raise TransversalityFailure(
            f"no frame out of {len(candidates)} puts web '{self.label}' in graph form"
        ) from last_error


def _orthonormal_rows(mat: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(np.asarray(mat, dtype=float).T)
    return q.T


def _subset_measure(bases: Sequence[np.ndarray], n: int) -> float:
    stacked = np.vstack(bases)
    rank = min(n, stacked.shape[0])
    sv = np.linalg.svd(stacked, compute_uv=False)
    return float(np.prod(sv[:rank]))


def _tangent_and_normal(omega0: np.ndarray, frame: LinearFrame) -> tuple[np.ndarray, np.ndarray]:
    c, m = omega0.shape
    tangent = np.vstack([np.eye(m), omega0])
    normal = np.hstack([omega0, -np.eye(c)])
    return frame.inverse @ tangent, normal @ frame.matrix


def general_position_check(
    web: Web, x0: Sequence[float], tol: float = 1e-6, framed: Optional[FramedSlopes] = None
) -> GeneralPositionResult:
    """
    Check that the foliations of ``web`` are in general position at ``x0``.

    Normal spaces must be pairwise distinct, and every subset small enough
    to matter must have normal spaces spanning as much as their dimensions
    allow. Tangent spaces are not compared, so coplanar curve directions are
    accepted. Mixed webs in dimension 3 are checked on the wedges of their
    1-forms, the wedges of their direction fields and all pairings
    ``omega_i(X_j)``.
    """
    framed = framed or web.slopes_at(x0, 0)
    n = web.dimension
    tangents, normals = [], []
    for omega in framed.slopes:
        omega0 = np.real([[entry.value for entry in row] for row in omega])
        tangent, normal = _tangent_and_normal(omega0, framed.frame)
        tangents.append(_orthonormal_rows(tangent.T))
        normals.append(_orthonormal_rows(normal))

    if web.is_mixed:
        return _mixed_check(web, tangents, normals, tol)

    d = len(web.foliations)
    for i, j in combinations(range(d), 2):
        value = _subset_measure([normals[i], normals[j]], n)
        if value < tol:
            return GeneralPositionResult(False, "duplicate", (i + 1, j + 1), value)
    dim = min(web.codims)
    for size in range(3, min(d, ceil(n / dim)) + 1):
        for subset in combinations(range(d), size):
            value = _subset_measure([normals[i] for i in subset], n)
            if value < tol:
                return GeneralPositionResult(
                    False, "normals", tuple(i + 1 for i in subset), value
                )
    return GeneralPositionResult(True)


def _mixed_check(web: Web, tangents, normals, tol) -> GeneralPositionResult:
    forms = [i for i, c in enumerate(web.codims) if c == 1]
    curves = [i for i, c in enumerate(web.codims) if c == 2]
    for kind, members, bases in (("forms", forms, normals), ("directions", curves, tangents)):
        for size in (2, 3):
            for subset in combinations(range(len(members)), size):
                value = _subset_measure([bases[members[i]] for i in subset], 3)
                if value < tol:
                    return GeneralPositionResult(
                        False, kind, tuple(i + 1 for i in subset), value
                    )
    for i, form in enumerate(forms):
        for j, curve in enumerate(curves):
            value = abs(float(normals[form][0] @ tangents[curve][0]))
            if value < tol:
                return GeneralPositionResult(False, "pairing", (i + 1, j + 1), value)
    return GeneralPositionResult(True)


def pushforward(web: Web, phi_inv: Sequence[ScalarField], label: str = "") -> Web:
    """
    Image of a first-integral web under a diffeomorphism ``phi``.

    Each first integral ``u`` becomes ``u o phi_inv``; ``phi_inv`` is trusted
    to invert the intended map.
    """
    if len(phi_inv) != web.dimension:
        raise InputError(f"inverse map needs {web.dimension} components, got {len(phi_inv)}")
    moved = []
    for f in web.foliations:
        if f.kind != FIRST_INTEGRALS:
            raise InputError("pushforward needs foliations given by first integrals")
        fields = tuple(u.compose(phi_inv) for u in f.fields)
        moved.append(Foliation(f.kind, f.codim, f.nvars, fields, f.label))
    label = label or f"{web.label} (pushed forward)"
    return Web(web.dimension, tuple(moved), label, web.variables)


def _linear_field(coeffs: Sequence[float], offset: float, names: Sequence[str]) -> ScalarField:
    tree = ScalarField.constant(float(offset), len(names)).ast
    for j, coeff in enumerate(coeffs):
        if coeff != 0:
            term = Binary("*", ScalarField.constant(float(coeff), len(names)).ast, Var(names[j], j))
            tree = Binary("+", tree, term)
    return ScalarField(tree, len(names), to_text(tree))


def affine_image(
    web: Web, matrix: Sequence[Sequence[float]], shift: Sequence[float], label: str = ""
) -> Web:
    """
    Image of a web under ``y = matrix @ x + shift``.

    First integrals are composed with the inverse map and direction fields
    are composed and multiplied by ``matrix``. A point ``x0`` of ``web``
    corresponds to ``matrix @ x0 + shift`` of the image.

    Raises:
        InputError: A singular matrix or a foliation given by raw slopes.
    """
    n = web.dimension
    mat = np.asarray(matrix, dtype=float)
    if mat.shape != (n, n) or abs(np.linalg.det(mat)) < MIN_FRAME_DET:
        raise InputError(f"affine image needs an invertible {n} x {n} matrix")
    inv = np.linalg.inv(mat)
    offset = -inv @ np.asarray(shift, dtype=float)
    names = list(web.variables or [f"x{i + 1}" for i in range(n)])
    phi_inv = [_linear_field(inv[i], offset[i], names) for i in range(n)]
    moved = []
    for f in web.foliations:
        if f.kind == SLOPES:
            raise InputError("affine image of a foliation given by raw slopes")
        fields = [u.compose(phi_inv) for u in f.fields]
        if f.kind == DIRECTION:
            fields = [
                _combine([(mat[i, j], fields[j]) for j in range(n) if mat[i, j] != 0], n)
                for i in range(n)
            ]
        moved.append(Foliation(f.kind, f.codim, n, tuple(fields), f.label))
    return Web(n, tuple(moved), label or f"{web.label} (affine image)", web.variables)


def _combine(terms: Sequence[tuple[float, ScalarField]], n: int) -> ScalarField:
    tree = None
    for coeff, f in terms:
        term = Binary("*", ScalarField.constant(float(coeff), n).ast, f.ast)
        tree = term if tree is None else Binary("+", tree, term)
    tree = tree if tree is not None else ScalarField.constant(0.0, n).ast
    return ScalarField(tree, n, to_text(tree))
