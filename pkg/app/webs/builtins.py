"""
Builtin example webs.

Every builtin is a :class:`WebSpec` factory taking the ``--const`` overrides
and the seed, so that ``examples show`` prints exactly what ``analyze``
runs. ``paper_mw_check`` is not a web: it evaluates the determinant
identity of the normalized hypersurface 5-web in dimension 3.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from app.core.exceptions import InputError
from app.dsl.field import ScalarField, parse_fields
from app.geometry.connection import DeterminantRatio, mw_determinant_ratio
from app.webs.schemas import FoliationSpec, WebSpec

XYZ = ("x", "y", "z")

# (map, inverse map) pairs used by the pushforward examples
DIFFEOS = {
    2: (("exp(x)", "y/(1 - x)"), ("log(x)", "y*(1 - log(x))")),
    3: (("exp(x)", "y/(1 - x)", "z + x^2"), ("log(x)", "y*(1 - log(x))", "z - log(x)^2")),
}


def _number(value: float) -> str:
    return f"{value:.6g}"


def linear_form_text(coeffs: Sequence[float], variables: Sequence[str], offset: float = 0.0) -> str:
    """Render ``sum_i coeffs[i] * variables[i] + offset`` as a DSL expression."""
    terms = []
    for coeff, name in zip(coeffs, variables):
        if coeff == 0:
            continue
        sign = "-" if coeff < 0 else "+"
        terms.append((sign, f"{_number(abs(coeff))}*{name}"))
    if offset:
        terms.append(("-" if offset < 0 else "+", _number(abs(offset))))
    if not terms:
        return "0"
    first_sign, first = terms[0]
    text = f"-{first}" if first_sign == "-" else first
    for sign, term in terms[1:]:
        text += f" {sign} {term}"
    return text


def random_linear_spec(
    n: int,
    count: int,
    seed: int,
    codim: int = 1,
    label: Optional[str] = None,
    base_point: Optional[list[float]] = None,
) -> WebSpec:
    """
    Web of ``count`` foliations by parallel affine subspaces of codimension ``codim``.

    Coefficients are rounded to two decimals so that the printed
    description is readable; the web stays linear.
    """
    rng = np.random.default_rng(seed)
    names = XYZ[:n] if n <= 3 else tuple(f"x{i + 1}" for i in range(n))
    foliations = []
    for _ in range(count):
        coeffs = np.round(rng.uniform(-2.0, 2.0, size=(codim, n)), 2)
        exprs = [linear_form_text(row, names) for row in coeffs]
        foliations.append(FoliationSpec(kind="first_integrals", exprs=exprs))
    return WebSpec(
        dimension=n,
        variables=list(names),
        foliations=foliations,
        label=label or f"linear{count}_n{n}_seed{seed}",
        base_point=base_point or [0.1 * (i + 1) for i in range(n)],
    )


def diffeo_fields(n: int) -> tuple[list[ScalarField], list[ScalarField]]:
    """Return the fixed nonlinear map of dimension ``n`` and its inverse."""
    phi, phi_inv = DIFFEOS[n]
    return parse_fields(phi, nvars=n), parse_fields(phi_inv, nvars=n)


def linear5_c3(constants: dict[str, float], seed: int) -> WebSpec:
    """Linear 5-web of planes in dimension 3 (fixed coefficients)."""
    return random_linear_spec(3, 5, seed=5, label="linear5_c3", base_point=[0.2, 0.1, 0.3])


def linear_pushforward_n2(constants: dict[str, float], seed: int) -> WebSpec:
    """Image of a linear planar 4-web under a nonlinear diffeomorphism."""
    # image of x, y, x + y, x - 2y
    x, y = DIFFEOS[2][1]
    exprs = [x, y, f"{x} + {y}", f"{x} - 2*{y}"]
    return WebSpec(
        dimension=2,
        foliations=[FoliationSpec(kind="first_integrals", exprs=[e]) for e in exprs],
        label="linear_pushforward_n2",
        base_point=[1.5, 0.5],
    )


def bol(constants: dict[str, float], seed: int) -> WebSpec:
    """Four line pencils and the cross-ratio foliation."""
    exprs = ["x", "y", "x/y", "(1 - x)/(1 - y)", "x*(1 - y)/(y*(1 - x))"]
    return WebSpec(
        dimension=2,
        foliations=[FoliationSpec(kind="first_integrals", exprs=[e]) for e in exprs],
        label="bol",
        base_point=[0.3, 0.5],
    )


W8_DIRECTIONS = (
    ("1", "0", "0"),
    ("1", "1", "0"),
    ("1", "0", "1"),
    ("1", "1", "1"),
    ("1", "-1", "1"),
    ("1", "1", "-1"),
    ("1", "-1", "-1"),
    ("1", "eps*y/x", "z/x"),
)


def w8(constants: dict[str, float], seed: int) -> WebSpec:
    """
    Seven constant directions and one depending on ``eps``; linear for ``eps = 1``.

    The base point stays off ``eps*y = x = z``, where ``Z8`` meets ``Z4`` and the
    system loses rank.
    """
    return WebSpec(
        dimension=3,
        constants={"eps": constants.get("eps", 1.0)},
        foliations=[
            FoliationSpec(kind="direction", exprs=list(z), label=f"Z{i}")
            for i, z in enumerate(W8_DIRECTIONS, start=1)
        ],
        label="w8",
        base_point=[1.0, 0.5, 1.5],
    )


def mixed6_c3(constants: dict[str, float], seed: int) -> WebSpec:
    """Three hypersurface and three curve foliations with small quadratic terms."""
    rng = np.random.default_rng(seed)
    foliations = []
    for i in range(3):
        coeffs = np.round(rng.uniform(-2.0, 2.0, size=3), 2)
        bend = np.round(rng.uniform(-0.5, 0.5, size=3), 2)
        quad = linear_form_text(bend, XYZ)
        foliations.append(
            FoliationSpec(
                kind="first_integrals",
                exprs=[f"{linear_form_text(coeffs, XYZ)} + ({quad})^2"],
                label=f"w{i + 1}",
            )
        )
    for j in range(3):
        slope = np.round(rng.uniform(-2.0, 2.0, size=2), 2)
        bend = np.round(rng.uniform(-0.5, 0.5, size=2), 2)
        exprs = ["1"] + [
            linear_form_text([b], [v], offset=s) for s, b, v in zip(slope, bend, ("y", "z"))
        ]
        foliations.append(FoliationSpec(kind="direction", exprs=exprs, label=f"X{j + 1}"))
    return WebSpec(
        dimension=3,
        foliations=foliations,
        label=f"mixed6_c3_seed{seed}",
        base_point=[0.1, -0.1, 0.2],
    )


def paper_mw_check(seed: int, trials: int = 100) -> list[DeterminantRatio]:
    """Evaluate the 5-web determinant identity at ``trials`` seeded slope pairs."""
    rng = np.random.default_rng(seed)
    return [
        mw_determinant_ratio(rng.uniform(-2.0, 2.0, 2), rng.uniform(-2.0, 2.0, 2))
        for _ in range(trials)
    ]


@dataclass(frozen=True)
class Builtin:
    """
    A named builtin.

    Attributes:
        name (str): Name used on the command line.
        description (str): One-line summary.
        build (Optional[Callable]): WebSpec factory, None for checks.
    """

    name: str
    description: str
    build: Optional[Callable[[dict[str, float], int], WebSpec]] = None

    @property
    def is_web(self) -> bool:
        """Whether the builtin describes a web."""
        return self.build is not None


BUILTINS = {
    b.name: b
    for b in (
        Builtin("linear5_c3", "linear 5-web of planes in dimension 3", linear5_c3),
        Builtin(
            "linear_pushforward_n2",
            "linear planar 4-web pushed forward by (exp x, y/(1-x))",
            linear_pushforward_n2,
        ),
        Builtin("bol", "Bol's planar 5-web (not linearizable)", bol),
        Builtin("w8", "8-web of curves in dimension 3, constant eps (default 1)", w8),
        Builtin("mixed6_c3", "random mixed 6-web of surfaces and curves (per seed)", mixed6_c3),
        Builtin("paper_mw_check", "determinant identity of the normalized 5-web in dimension 3"),
    )
}


def list_builtins() -> list[Builtin]:
    """Return the builtins in display order."""
    return list(BUILTINS.values())


def get_builtin(name: str) -> Builtin:
    """Look a builtin up by name, raising InputError for unknown names."""
    try:
        return BUILTINS[name]
    except KeyError:
        raise InputError(
            f"unknown builtin '{name}' (available: {', '.join(BUILTINS)})"
        ) from None


def builtin_spec(
    name: str, constants: Optional[dict[str, float]] = None, seed: int = 0
) -> WebSpec:
    """Build the description of a builtin web."""
    builtin = get_builtin(name)
    if not builtin.is_web:
        raise InputError(f"builtin '{name}' is a check, not a web")
    return builtin.build(constants or {}, seed)
