"""
Pydantic report models.

These models define the structure of analysis and self-test reports; their
JSON schema is the published report format (see docs/report.md).
"""

from typing import Literal, Optional

from pydantic import BaseModel, Field

Verdict = Literal["linearizable", "not_linearizable", "inconclusive"]


class SampleRecord(BaseModel):
    """
    Result of the analysis at one sample point.

    Attributes:
        point (list[float]): Sample point in user coordinates.
        status (str): ``ok``, or ``skipped`` when the web is degenerate there.
        frame (Optional[int]): Frame used (0 = user coordinates).
        residual (Optional[float]): Solver consistency residual.
        thomas_norm (Optional[float]): Largest Thomas coefficient.
        weyl_norm (Optional[float]): Scaled max of ``|W|`` (n > 2).
        liouville (dict[str, float]): Scaled ``|Pi_112|``, ``|Pi_212|`` (n = 2), or
            the max of ``|Pi_iuv|`` as a diagnostic (n > 2).
        sigma_norms (dict[str, float]): Scaled ``max |Sigma(l)|`` keyed by ``l``.
        passed (Optional[bool]): Whether every applicable test passed.
        message (Optional[str]): Reason a sample was skipped.
    """

    point: list[float]
    status: Literal["ok", "skipped"] = "ok"
    frame: Optional[int] = None
    residual: Optional[float] = None
    thomas_norm: Optional[float] = None
    weyl_norm: Optional[float] = None
    liouville: dict[str, float] = Field(default_factory=dict)
    sigma_norms: dict[str, float] = Field(default_factory=dict)
    passed: Optional[bool] = None
    message: Optional[str] = None


class LinearizabilityReport(BaseModel):
    """
    Linearizability verdict of a web.

    Attributes:
        label (str): Web label.
        dimension (int): Ambient dimension.
        codims (list[int]): Codimension of each foliation.
        equations (int): Scalar equations of the compatibility system.
        unknowns (int): Independent connection coefficients.
        order (int): Slope jet order.
        tolerance (float): Curvature tolerance.
        residual_tol (float): Consistency tolerance.
        samples (list[SampleRecord]): Per-point records.
        skipped (int): Number of skipped samples.
        verdict (str): Global verdict.
        exit_code (int): 0, 1 or 2 following the verdict.
    """

    label: str
    dimension: int = Field(..., ge=2)
    codims: list[int]
    equations: int
    unknowns: int
    order: int
    tolerance: float
    residual_tol: float
    samples: list[SampleRecord]
    skipped: int = 0
    verdict: Verdict
    exit_code: int = Field(..., ge=0, le=2)


class SelfTestResult(BaseModel):
    """
    Outcome of one acceptance criterion.

    Attributes:
        name (str): Criterion name.
        passed (bool): Whether it passed.
        detail (str): One-line summary of the measured quantities.
        seconds (float): Wall time.
    """

    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
