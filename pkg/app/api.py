from datetime import datetime
from typing import List

from fastapi import FastAPI, HTTPException, status
from fastapi.middleware.cors import CORSMiddleware
from pydantic import ValidationError

from app.config import settings
from app.critical import critical_locator
from app.curves import curve_tracer
from app.errors import E6Error
from app.models import (
    CountRequest,
    CriticalPointsReport,
    CriticalRequest,
    CurvePoint,
    EvalReport,
    EvalRequest,
    FamilyParam,
    MonodromyRequest,
    MonodromyResult,
    SolveRequest,
    SolveResponse,
    TraceRequest,
    ZeroCountReport,
)
from app.modular import eval_report
from app.monodromy import monodromy_solver

app = FastAPI(
    title="E6 Critical Points API",
    description="Eisenstein series, critical points of E6, the curves C1/C2/C3 and the monodromy data",
    version="1.0.0"
)

# CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


def _unprocessable(action: str, e: Exception) -> HTTPException:
    return HTTPException(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        detail=f"{action} failed: {type(e).__name__}: {str(e)}"
    )


# Health check endpoint
@app.get("/health")
def health_check():
    """Health check endpoint"""
    return {
        "status": "healthy",
        "timestamp": datetime.now(),
        "precision": settings.PRECISION,
        "series_target": settings.SERIES_TARGET,
    }


@app.post("/eval", response_model=EvalReport)
def evaluate_tau(request: EvalRequest):
    """Eisenstein data at tau, reduced into F when below the series floor"""
    try:
        return eval_report(request.tau.value)
    except E6Error as e:
        raise _unprocessable("Evaluation", e)
    except Exception as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Evaluation failed: {str(e)}"
        )


@app.post("/critical", response_model=CriticalPointsReport)
def critical_points(request: CriticalRequest):
    """Critical points of E6 in g(F0) for Gamma0(2) or g(F) for SL(2,Z)"""
    try:
        return critical_locator.critical_points_in_domain(request.matrix, request.group)
    except E6Error as e:
        raise _unprocessable("Critical point search", e)
    except Exception as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Critical point search failed: {str(e)}"
        )


@app.post("/count", response_model=ZeroCountReport)
def count_zeros(request: CountRequest):
    """Certified zero count of f_C or h_t in the truncated domain"""
    try:
        family = FamilyParam(kind=request.family, value=request.value)
        return critical_locator.count_zeros(family, request.domain, request.height, request.cusp_radius)
    except HTTPException:
        raise
    except (E6Error, ValidationError) as e:
        raise _unprocessable("Zero count", e)
    except Exception as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Zero count failed: {str(e)}"
        )


@app.post("/solve", response_model=SolveResponse)
def solve_fc(request: SolveRequest):
    """Both roots of f_C in F0; the branch that leaves through a cusp is null"""
    try:
        lower, upper = critical_locator.solve_fC(request.C)
        return SolveResponse(lower=lower, upper=upper)
    except E6Error as e:
        raise _unprocessable("Solve", e)
    except Exception as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Solve failed: {str(e)}"
        )


@app.post("/trace", response_model=List[CurvePoint])
def trace_curve(request: TraceRequest):
    try:
        return curve_tracer.trace_curve(request.curve, request.C_lo, request.C_hi, max_step=request.max_step)
    except E6Error as e:
        raise _unprocessable("Trace", e)
    except Exception as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Trace failed: {str(e)}"
        )


@app.post("/monodromy", response_model=MonodromyResult)
def monodromy(request: MonodromyRequest):
    """chi, D and, with ode=true, the integrated monodromy matrices"""
    try:
        if request.ode:
            return monodromy_solver.ode_monodromy(request.tau.value)
        return monodromy_solver.chi_and_D(request.tau.value)
    except E6Error as e:
        raise _unprocessable("Monodromy", e)
    except Exception as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Monodromy failed: {str(e)}"
        )


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host=settings.API_HOST, port=settings.API_PORT)
