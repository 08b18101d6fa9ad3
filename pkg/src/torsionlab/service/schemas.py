"""Request/response models for the torsion-analysis service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from ..presets import DEFAULT_H, DEFAULT_SOLVER_TOL

CheckName = Literal[
    "alpha-star",
    "property-a",
    "local-property-a",
    "power-concave",
    "serrin",
    "level-set-bound",
]


class DomainModel(BaseModel):
    """Explicit domain document, mirroring the geometry JSON schema."""

    type: Literal["disk", "ellipse", "polygon", "level_set"]
    center: Optional[tuple[float, float]] = None
    radius: Optional[float] = None
    coefficients: Optional[list[float]] = None
    vertices: Optional[list[tuple[float, float]]] = None

    def to_doc(self):
        return self.model_dump(exclude_none=True)


class ProblemSpec(BaseModel):
    """Domain selection plus discretization parameters, shared by all routes."""

    preset: Optional[str] = None
    a: Optional[list[float]] = Field(
        default=None, description="ellipse coefficient override for the preset"
    )
    domain: Optional[DomainModel] = None
    h: float = Field(default=DEFAULT_H, gt=0)
    solver_tol: float = Field(default=DEFAULT_SOLVER_TOL, gt=0)
    source: Literal["auto", "analytic", "solved"] = "auto"

    @model_validator(mode="after")
    def _one_domain(self):
        if (self.preset is None) == (self.domain is None):
            raise ValueError("provide exactly one of 'preset' or 'domain'")
        return self


class SolveRequest(ProblemSpec):
    include_field: bool = False


class SolveResponse(BaseModel):
    summary: dict
    field_csv: Optional[str] = None
    config: dict


class AnalyzeRequest(ProblemSpec):
    check: CheckName
    alpha: float = 1.1
    eps: float = 1e-3
    x0: Optional[tuple[float, float]] = None
    ball_radius: float = Field(default=0.1, gt=0)
    seed: int = 0
    margin: Optional[float] = Field(default=None, gt=0)
    tol: Optional[float] = Field(default=None, gt=0)
    bisection_tol: float = Field(default=0.02, gt=0)


class AnalyzeResponse(BaseModel):
    check: CheckName
    report: dict
    violation_found: bool
    config: dict


class HarmonicRequest(ProblemSpec):
    n_radii: int = Field(default=8, ge=3)
    n_angles: int = Field(default=256, ge=8)
    max_mode: int = Field(default=12, ge=3)


class HarmonicResponse(BaseModel):
    decomposition: dict
    violation_found: bool
    config: dict


class ErrorDetail(BaseModel):
    kind: Literal["usage", "numerical"]
    message: str
