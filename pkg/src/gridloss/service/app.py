"""HTTP front end: one POST route per operation, plus a health probe.

Input problems (bad case files, unknown options, malformed profiles) map to
400; solver breakdowns map to 409. Both carry an ErrorBody payload.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..powerflow import NonConvergenceError
from . import handlers, schemas


def _error_response(status: int, exc: Exception) -> JSONResponse:
    body = schemas.ErrorBody(kind=type(exc).__name__, message=str(exc))
    return JSONResponse(status_code=status, content=body.model_dump())


def create_app() -> FastAPI:
    app = FastAPI(title="gridloss", version="1.0.0",
                  description="Radial feeder loss studies: snapshot power "
                              "flow, daily profiles, and voltage-sag "
                              "response under reactive-power control.")

    @app.exception_handler(ValueError)
    async def _usage(request: Request, exc: ValueError):
        return _error_response(400, exc)

    @app.exception_handler(NonConvergenceError)
    async def _no_converge(request: Request, exc: NonConvergenceError):
        return _error_response(409, exc)

    @app.exception_handler(ArithmeticError)
    async def _arith(request: Request, exc: ArithmeticError):
        return _error_response(409, exc)

    @app.get("/health")
    async def health() -> dict:
        return {"status": "ok"}

    @app.post("/powerflow", response_model=schemas.PowerFlowResponse)
    async def run_powerflow(req: schemas.PowerFlowRequest):
        return handlers.handle_powerflow(req)

    @app.post("/day", response_model=schemas.DayResponse)
    async def run_day(req: schemas.DayRequest):
        return handlers.handle_day(req)

    @app.post("/fault", response_model=schemas.FaultResponse)
    async def run_fault(req: schemas.FaultRequest):
        return handlers.handle_fault(req)

    @app.post("/validate", response_model=schemas.ValidateResponse)
    async def run_validate(req: schemas.ValidateRequest):
        return handlers.handle_validate(req)

    return app


app = create_app()
