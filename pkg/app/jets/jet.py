"""
Truncated multivariate Taylor expansions (jets) at a base point.

A :class:`Jet` represents ``f(x0 + h)`` through total degree ``order`` in the
displacement ``h``. Arithmetic between jets propagates every derivative up
to that order, which is how all the geometric formulas of the application
are evaluated at a point.

    >>> x, y = seed_point((0.0, 0.0), order=2)
    >>> ((1 + x) * (1 - x)).coeffs
    array([ 1.,  0.,  0., -1.,  0.,  0.])

Elementary functions of a jet are obtained by composing the univariate
Taylor series of the function at the constant term with ``a - a0``.
"""

from __future__ import annotations

from math import factorial
from numbers import Number
from typing import Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.exceptions import (
    DivisionByNonUnit,
    DomainError,
    JetError,
    OrderExhausted,
    ShapeMismatch,
)
from app.jets.basis import MonomialBasis, basis_size, get_basis


def scalar_dtype(value=None) -> type:
    """Return the coefficient dtype for the configured scalar field."""
    if settings.complex_scalars or (value is not None and np.iscomplexobj(value)):
        return np.complex128
    return np.float64


class Jet:
    """
    Dense truncated Taylor expansion of a scalar function.

    Coefficient ``k`` is the coefficient of ``h**alpha_k`` (a derivative
    divided by ``alpha!``) where ``alpha_k`` is the k-th multi-index of the
    shared :class:`MonomialBasis`. Jets are immutable.
    """

    __slots__ = ("coeffs", "nvars", "order")
    # numpy scalars defer to the reflected jet operators
    __array_ufunc__ = None

    def __init__(self, coeffs, nvars: int, order: int):
        arr = np.array(coeffs, dtype=scalar_dtype(coeffs))
        expected = basis_size(nvars, order)
        if arr.shape != (expected,):
            raise ShapeMismatch(
                f"jet({nvars} vars, order {order}) needs {expected} coefficients, "
                f"got shape {arr.shape}"
            )
        arr.flags.writeable = False
        self.coeffs = arr
        self.nvars = nvars
        self.order = order

    # construction

    @classmethod
    def constant(cls, value, nvars: int, order: int) -> Jet:
        """Return the jet of a constant function."""
        coeffs = np.zeros(basis_size(nvars, order), dtype=scalar_dtype(value))
        coeffs[0] = value
        return cls(coeffs, nvars, order)

    @classmethod
    def zeros(cls, nvars: int, order: int) -> Jet:
        """Return the zero jet."""
        return cls.constant(0.0, nvars, order)

    @classmethod
    def variable(cls, var: int, value, nvars: int, order: int) -> Jet:
        """Return the jet of the coordinate function ``x_var`` with value ``value``."""
        coeffs = np.zeros(basis_size(nvars, order), dtype=scalar_dtype(value))
        coeffs[0] = value
        if order:
            coeffs[get_basis(nvars, order).powers[var]] = 1.0
        return cls(coeffs, nvars, order)

    # accessors

    @property
    def basis(self) -> MonomialBasis:
        """Basis tables shared by jets of this shape."""
        return get_basis(self.nvars, self.order)

    @property
    def value(self):
        """Constant term, i.e. the function value at the base point."""
        return self.coeffs[0]

    def coeff(self, alpha: Sequence[int]):
        """Return the coefficient of the monomial with multi-index ``alpha``."""
        return self.coeffs[self.basis.index[tuple(alpha)]]

    def gradient(self) -> np.ndarray:
        """Return the first-order coefficients, one per variable."""
        if self.order == 0:
            raise OrderExhausted("order-0 jet carries no gradient")
        return np.array([self.coeffs[p] for p in self.basis.powers])

    def max_abs(self) -> float:
        """Largest coefficient magnitude."""
        return float(np.max(np.abs(self.coeffs)))

    def truncate(self, order: int) -> Jet:
        """Drop every coefficient of total degree above ``order``."""
        if order > self.order:
            raise ShapeMismatch(f"cannot raise order {self.order} to {order}")
        return Jet(self.coeffs[: basis_size(self.nvars, order)], self.nvars, order)

    def partial(self, var: int) -> Jet:
        """Return the formal partial derivative in ``var`` (one order lower)."""
        if self.order == 0:
            raise OrderExhausted("partial derivative of an order-0 jet")
        source, factor = self.basis.partial_table(var)
        return Jet(self.coeffs[source] * factor, self.nvars, self.order - 1)

    # arithmetic

    def _coerce(self, other) -> Optional[Jet]:
        if isinstance(other, Jet):
            if other.nvars != self.nvars or other.order != self.order:
                raise ShapeMismatch(
                    f"jet({self.nvars}, order {self.order}) combined with "
                    f"jet({other.nvars}, order {other.order})"
                )
            return other
        if isinstance(other, (Number, np.number)):
            return Jet.constant(other, self.nvars, self.order)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return Jet(self.coeffs + other.coeffs, self.nvars, self.order)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return Jet(self.coeffs - other.coeffs, self.nvars, self.order)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __neg__(self):
        return Jet(-self.coeffs, self.nvars, self.order)

    def __mul__(self, other):
        if isinstance(other, (Number, np.number)):
            return self.scale(other)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return Jet(self.basis.mul(self.coeffs, other.coeffs), self.nvars, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (Number, np.number)):
            if abs(other) < settings.pivot_tol:
                raise DivisionByNonUnit(f"division of a jet by the scalar {other!r}")
            return self.scale(1.0 / other)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * reciprocal(self)

    def __pow__(self, exponent):
        if isinstance(exponent, (int, np.integer)):
            return integer_power(self, int(exponent))
        return pow_r(self, float(exponent))

    def scale(self, factor) -> Jet:
        """Multiply every coefficient by a scalar."""
        return Jet(self.coeffs * factor, self.nvars, self.order)

    def __repr__(self) -> str:
        return f"Jet(nvars={self.nvars}, order={self.order}, coeffs={self.coeffs!r})"


def seed_point(x0: Sequence, order: int) -> list[Jet]:
    """Return the coordinate jets ``x_i = x0_i + h_i`` at the point ``x0``."""
    n = len(x0)
    return [Jet.variable(i, x0[i], n, order) for i in range(n)]


def compose_series(a: Jet, taylor: Sequence) -> Jet:
    """
    Compose a univariate Taylor series with ``a - a0``.

    ``taylor[k]`` is the k-th Taylor coefficient of the outer function at
    ``a0``; only the first ``a.order + 1`` are used (Horner scheme).
    """
    basis = a.basis
    h = np.array(a.coeffs, dtype=np.result_type(a.coeffs, np.asarray(taylor)))
    h[0] = 0.0
    result = np.zeros_like(h)
    result[0] = taylor[a.order]
    for k in range(a.order - 1, -1, -1):
        result = basis.mul(result, h)
        result[0] += taylor[k]
    return Jet(result, a.nvars, a.order)


def _is_real(a: Jet) -> bool:
    return not np.iscomplexobj(a.coeffs)


def _check_unit(a: Jet, pivot_tol: Optional[float], what: str):
    tol = settings.pivot_tol if pivot_tol is None else pivot_tol
    if abs(a.value) < tol:
        raise DivisionByNonUnit(f"{what}: constant term {a.value!r} below {tol:g}")


def reciprocal(a: Jet, pivot_tol: Optional[float] = None) -> Jet:
    """Return ``1 / a``; the constant term must be a unit."""
    _check_unit(a, pivot_tol, "division by non-unit jet")
    a0 = a.value
    return compose_series(a, [(-1) ** k / a0 ** (k + 1) for k in range(a.order + 1)])


def integer_power(a: Jet, exponent: int) -> Jet:
    """Raise ``a`` to an integer power by repeated multiplication."""
    if exponent < 0:
        return integer_power(reciprocal(a), -exponent)
    result = Jet.constant(1.0, a.nvars, a.order)
    base = a
    while exponent:
        if exponent & 1:
            result = result * base
        exponent >>= 1
        if exponent:
            base = base * base
    return result


def exp(a: Jet) -> Jet:
    """Exponential of a jet."""
    e0 = np.exp(a.value)
    return compose_series(a, [e0 / factorial(k) for k in range(a.order + 1)])


def log(a: Jet) -> Jet:
    """Natural logarithm; real jets need a positive constant term."""
    a0 = a.value
    if (_is_real(a) and a0 <= 0) or a0 == 0:
        raise DomainError(f"log of jet with constant term {a0!r}")
    taylor = [np.log(a0)] + [
        (-1) ** (k + 1) / (k * a0**k) for k in range(1, a.order + 1)
    ]
    return compose_series(a, taylor)


def sin(a: Jet) -> Jet:
    """Sine of a jet."""
    cycle = (np.sin(a.value), np.cos(a.value), -np.sin(a.value), -np.cos(a.value))
    return compose_series(a, [cycle[k % 4] / factorial(k) for k in range(a.order + 1)])


def cos(a: Jet) -> Jet:
    """Cosine of a jet."""
    cycle = (np.cos(a.value), -np.sin(a.value), -np.cos(a.value), np.sin(a.value))
    return compose_series(a, [cycle[k % 4] / factorial(k) for k in range(a.order + 1)])


def pow_r(a: Jet, exponent: float) -> Jet:
    """Real power ``a**exponent``; integral exponents use exact multiplication."""
    if float(exponent).is_integer():
        return integer_power(a, int(exponent))
    a0 = a.value
    if abs(a0) < settings.pivot_tol or (_is_real(a) and a0 < 0):
        raise DomainError(f"power {exponent} of jet with constant term {a0!r}")
    taylor = []
    binom = 1.0
    for k in range(a.order + 1):
        taylor.append(binom * a0 ** (exponent - k))
        binom *= (exponent - k) / (k + 1)
    return compose_series(a, taylor)


def sqrt(a: Jet) -> Jet:
    """Square root of a jet."""
    return pow_r(a, 0.5)


LIFTS = {
    "exp": exp,
    "log": log,
    "sin": sin,
    "cos": cos,
    "sqrt": sqrt,
}


def lift(name: str, a: Jet, exponent: Optional[float] = None) -> Jet:
    """Apply the elementary function ``name`` (or ``pow_r``) to a jet."""
    if name == "pow_r":
        return pow_r(a, exponent)
    if name not in LIFTS:
        raise JetError(f"no jet lift for function '{name}'")
    return LIFTS[name](a)
