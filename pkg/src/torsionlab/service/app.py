"""FastAPI application exposing the torsion laboratory.

Three POST routes mirror the pipeline stages: /solve produces the discrete
torsion function, /analyze runs concavity and boundary diagnostics, and
/harmonic returns the circular-harmonic decomposition about the maximum.
Errors are classified as "usage" (422, bad request content) or "numerical"
(500, a computation that could not be completed).
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np
from fastapi import FastAPI, HTTPException

from ..concavity import (
    ConcavityError,
    boundary_gradient_stats,
    concavity_exponent,
    is_power_concave,
    level_set_bound_check,
    local_property_A_check,
    property_A_check,
)
from ..fields import EvaluationError
from ..geometry import GeometryError, LevelSetError, build_grid, domain_from_json
from ..harmonic import HarmonicError, decompose
from ..presets import build_field, preset_domain
from ..solver import SolverError, solve_torsion
from .schemas import (
    AnalyzeRequest,
    AnalyzeResponse,
    HarmonicRequest,
    HarmonicResponse,
    SolveRequest,
    SolveResponse,
)

# checked before the usage classes: some of these subclass ValueError
NUMERICAL_ERRORS = (
    SolverError,
    LevelSetError,
    EvaluationError,
    HarmonicError,
    ConcavityError,
)
USAGE_ERRORS = (GeometryError, ValueError, TypeError, KeyError)


@contextmanager
def _error_mapping():
    try:
        yield
    except HTTPException:
        raise
    except NUMERICAL_ERRORS as exc:
        raise HTTPException(
            status_code=500, detail={"kind": "numerical", "message": str(exc)}
        )
    except USAGE_ERRORS as exc:
        raise HTTPException(
            status_code=422, detail={"kind": "usage", "message": str(exc)}
        )


def _resolve_domain(spec):
    if spec.preset is not None:
        return preset_domain(spec.preset, a=spec.a)
    return domain_from_json(spec.domain.to_doc())


def create_app():
    app = FastAPI(title="torsionlab", version="0.1.0")

    @app.post("/solve", response_model=SolveResponse)
    def solve(req: SolveRequest):
        with _error_mapping():
            domain = _resolve_domain(req)
            result = solve_torsion(build_grid(domain, req.h), tol=req.solver_tol)
            return SolveResponse(
                summary=result.summary(),
                field_csv=result.field_csv() if req.include_field else None,
                config=req.model_dump(),
            )

    @app.post("/analyze", response_model=AnalyzeResponse)
    def analyze(req: AnalyzeRequest):
        with _error_mapping():
            domain = _resolve_domain(req)
            # these checks differentiate the discrete solution at the boundary
            # or march its level sets, so they always run on a solved field
            source = req.source
            if req.check in ("serrin", "level-set-bound") and source != "solved":
                source = "solved"
            f, result = build_field(domain, source=source, h=req.h, tol=req.solver_tol)

            kwargs = {"seed": req.seed}
            if req.margin is not None:
                kwargs["margin"] = req.margin
            if req.tol is not None:
                kwargs["tol"] = req.tol

            if req.check == "alpha-star":
                lo, hi = concavity_exponent(
                    f, bisection_tol=req.bisection_tol, **kwargs
                )
                report = {"alpha_lo": lo, "alpha_hi": hi}
                violation = False
            elif req.check == "power-concave":
                rep = is_power_concave(f, req.alpha, **kwargs)
                report = {"alpha": req.alpha, **rep.to_dict()}
                violation = rep.verdict == "fails"
            elif req.check == "property-a":
                rep = property_A_check(f, **kwargs)
                report = rep.to_dict()
                violation = rep.verdict == "fails"
            elif req.check == "local-property-a":
                x0 = np.asarray(
                    req.x0 if req.x0 is not None else f.argmax, dtype=float
                )
                rep = local_property_A_check(
                    f, x0, req.ball_radius, tol=kwargs.get("tol")
                )
                report = {"x0": x0.tolist(), "radius": req.ball_radius, **rep.to_dict()}
                violation = rep.verdict == "fails"
            elif req.check == "serrin":
                report = boundary_gradient_stats(result)
                violation = False
            else:  # level-set-bound
                vol, per, bracket = level_set_bound_check(result, req.alpha, req.eps)
                report = {
                    "alpha": req.alpha,
                    "eps": req.eps,
                    "volume": vol,
                    "perimeter": per,
                    "bracket": bracket,
                }
                # a positive bracket certifies that u^alpha is not concave
                violation = bracket > 0

            return AnalyzeResponse(
                check=req.check,
                report=report,
                violation_found=violation,
                config=req.model_dump(),
            )

    @app.post("/harmonic", response_model=HarmonicResponse)
    def harmonic(req: HarmonicRequest):
        with _error_mapping():
            domain = _resolve_domain(req)
            f, _ = build_field(domain, source=req.source, h=req.h, tol=req.solver_tol)
            d = decompose(
                f,
                n_radii=req.n_radii,
                n_angles=req.n_angles,
                max_mode=req.max_mode,
            )
            return HarmonicResponse(
                decomposition=d.to_dict(),
                violation_found=d.k_bar is not None,
                config=req.model_dump(),
            )

    return app
