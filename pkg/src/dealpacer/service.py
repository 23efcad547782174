"""HTTP query layer over a loaded value table: thresholds, decisions, surfaces."""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .policy import (
    FundState,
    UnaffordableDealError,
    decide,
    export_surface,
    threshold_irr,
    threshold_moic,
)
from .solver import ValueTable
from .stochastics import DealSample

__all__ = ["create_app", "ApiProblem"]


class ApiProblem(Exception):
    """Maps onto the wire error envelope: {"error": {"code", "message"}}."""

    def __init__(self, code: str, message: str, status: int):
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status


def _out_of_domain(message: str) -> ApiProblem:
    return ApiProblem("out_of_domain", message, status=422)


def _bad_request(message: str) -> ApiProblem:
    return ApiProblem("bad_request", message, status=400)


def _not_ready() -> ApiProblem:
    return ApiProblem("not_ready", "no value table loaded", status=503)


class DecideBody(BaseModel):
    f: float
    t: float
    size: float
    irr_underwritten: float


def create_app(table: ValueTable | None, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="dealpacer query service")

    @app.exception_handler(ApiProblem)
    async def _problem_handler(request: Request, exc: ApiProblem):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "bad_request", "message": str(exc.errors())}},
        )

    def require_table() -> ValueTable:
        if table is None:
            raise _not_ready()
        return table

    def check_state(f: float, t: float, tbl: ValueTable):
        if not 0.0 <= f <= tbl.fund_size:
            raise _out_of_domain(f"f={f} outside [0, {tbl.fund_size}]")
        if not 0.0 <= t <= tbl.horizon:
            raise _out_of_domain(f"t={t} outside [0, {tbl.horizon}]")

    @app.get("/api/meta")
    def meta():
        tbl = require_table()
        return {
            "fund_size": tbl.fund_size,
            "horizon_years": tbl.horizon,
            "moic_hurdle": tbl.moic_hurdle,
            "hurdle_irr": tbl.moic_hurdle ** (1.0 / tbl.exit_years) - 1.0,
            "exit_years": tbl.exit_years,
            "n_capital_points": len(tbl.grid),
            "n_time_points": len(tbl.time_grid.times),
        }

    @app.get("/api/threshold")
    def threshold(f: float, s: float, t: float):
        tbl = require_table()
        check_state(f, t, tbl)
        if s <= 0:
            raise _out_of_domain(f"s={s} must be > 0")
        try:
            m_star = threshold_moic(tbl, f, s, t)
            r_star = threshold_irr(tbl, f, s, t)
        except UnaffordableDealError as exc:
            raise _out_of_domain(str(exc)) from exc
        return {"threshold_moic": m_star, "threshold_irr": r_star}

    @app.post("/api/decide")
    def decide_endpoint(body: DecideBody):
        tbl = require_table()
        check_state(body.f, body.t, tbl)
        if body.size <= 0:
            raise _out_of_domain(f"size={body.size} must be > 0")
        if body.irr_underwritten <= -1.0:
            raise _out_of_domain(f"irr_underwritten={body.irr_underwritten} must exceed -1")
        moic = (1.0 + body.irr_underwritten) ** tbl.exit_years
        decision = decide(
            tbl,
            FundState(remaining_capital=body.f, time=body.t),
            DealSample(size=body.size, moic=moic),
        )
        return decision.as_record()

    @app.get("/api/surface")
    def surface(fractions: str = "0.1,0.25,0.5", n_times: int = 50):
        tbl = require_table()
        try:
            parsed = [float(x) for x in fractions.split(",") if x.strip()]
        except ValueError as exc:
            raise _bad_request(f"fractions must be comma-separated numbers: {exc}") from exc
        if not parsed:
            raise _bad_request("fractions must be nonempty")
        if any(not 0.0 < x <= 1.0 for x in parsed):
            raise _out_of_domain("fractions must lie in (0, 1]")
        if not 2 <= n_times <= 2001:
            raise _out_of_domain(f"n_times={n_times} must lie in [2, 2001]")
        times = np.linspace(0.0, tbl.horizon, n_times)
        rows = export_surface(tbl, parsed, times).rows
        return {
            "rows": [
                {"t_years": t, "size_fraction": fraction, "required_irr": irr}
                for t, fraction, irr in rows
            ]
        }

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="console")

    return app
