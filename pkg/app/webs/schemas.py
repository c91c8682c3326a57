"""
This module defines Pydantic schemas for web description files.

Schemas:
- FoliationSpec: One foliation given by first integrals, slopes or a direction.
- WebSpec: A whole web, with its coordinates, constants and base point.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.exceptions import InputError
from app.dsl.field import parse_fields
from app.webs.model import (
    Web,
    foliation_from_direction,
    foliation_from_first_integrals,
    foliation_from_slopes,
)


class FoliationSpec(BaseModel):
    """
    Schema of one foliation.

    Attributes:
        kind (str): ``first_integrals``, ``slopes`` or ``direction``.
        exprs (list[str]): DSL expressions.
        codim (Optional[int]): Codimension (required for ``slopes``).
        label (Optional[str]): Name shown in reports.
    """

    kind: Literal["first_integrals", "slopes", "direction"]
    exprs: list[str] = Field(..., min_length=1, description="DSL expressions")
    codim: Optional[int] = Field(None, ge=1, description="Codimension of the leaves")
    label: Optional[str] = None

    model_config = ConfigDict(extra="forbid")


class WebSpec(BaseModel):
    """
    Schema of a web description file.

    Attributes:
        dimension (int): Ambient dimension ``n`` (at least 2).
        variables (Optional[list[str]]): Coordinate names, ``x1..xn`` by default.
        constants (dict[str, float]): Named constants folded into expressions.
        foliations (list[FoliationSpec]): The foliations, in order.
        label (Optional[str]): Name of the web.
        base_point (Optional[list[float]]): Default base point.
    """

    dimension: int = Field(..., ge=2, description="Ambient dimension")
    variables: Optional[list[str]] = None
    constants: dict[str, float] = Field(default_factory=dict)
    foliations: list[FoliationSpec] = Field(..., min_length=1)
    label: Optional[str] = None
    base_point: Optional[list[float]] = None

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def validate_shapes(self):
        """Check coordinate names, expression counts and codimensions."""
        n = self.dimension
        if self.variables is not None and len(self.variables) != n:
            raise ValueError(f"{len(self.variables)} variable names for dimension {n}")
        if self.base_point is not None and len(self.base_point) != n:
            raise ValueError(f"base point has {len(self.base_point)} coordinates, expected {n}")
        for pos, fol in enumerate(self.foliations, start=1):
            count = len(fol.exprs)
            if fol.kind == "first_integrals":
                if fol.codim is not None and fol.codim != count:
                    raise ValueError(f"foliation {pos}: codim {fol.codim} but {count} integrals")
                if not 1 <= count <= n - 1:
                    raise ValueError(f"foliation {pos}: {count} first integrals in dimension {n}")
            elif fol.kind == "direction":
                if count != n:
                    raise ValueError(f"foliation {pos}: direction needs {n} components")
            else:
                if fol.codim is None:
                    raise ValueError(f"foliation {pos}: slopes need an explicit codim")
                if not 1 <= fol.codim <= n - 1 or count != fol.codim * (n - fol.codim):
                    raise ValueError(
                        f"foliation {pos}: codim {fol.codim} needs "
                        f"{fol.codim * (n - fol.codim)} slopes, got {count}"
                    )
        return self

    def to_web(self, constants: Optional[dict[str, float]] = None) -> Web:
        """
        Parse every expression and build the :class:`Web`.

        Args:
            constants (Optional[dict[str, float]]): Overrides for the file's
                constants (CLI ``--const``).
        """
        bound = {**self.constants, **(constants or {})}
        n = self.dimension
        foliations = []
        for pos, fol in enumerate(self.foliations, start=1):
            label = fol.label or f"F{pos}"
            fields = parse_fields(fol.exprs, self.variables, bound, n)
            if fol.kind == "first_integrals":
                foliations.append(foliation_from_first_integrals(fields, n, label))
            elif fol.kind == "direction":
                foliations.append(foliation_from_direction(fields, n, label))
            else:
                foliations.append(foliation_from_slopes(fields, n, fol.codim, label))
        variables = tuple(self.variables) if self.variables else None
        return Web(n, tuple(foliations), self.label or "web", variables)


def load_web_spec(text: str) -> WebSpec:
    """Validate a JSON web description, raising InputError on failure."""
    try:
        return WebSpec.model_validate_json(text)
    except ValueError as exc:
        raise InputError(f"invalid web description: {exc}") from exc
