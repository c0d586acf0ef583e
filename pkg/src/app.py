"""
Chain Transport - FastAPI Application
=====================================

API endpoints cho steady-state transport simulator:
- Giải steady state của một chain qua LangGraph pipeline
- Closed-form heat current (quantum và classical)
- Xem run ledger của các experiment

Architecture:
- FastAPI server, chạy bằng uvicorn
- Pydantic request models dùng lại ChainSpec / ClassicalChainSpec
- TransportError -> HTTP 422, lỗi khác -> HTTP 500
"""

import logging
from typing import Dict, Optional

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel

from src import settings
from .graph.build import build_graph
from .services.chain_model import ChainSpec
from .services.classical import (
    ClassicalChainSpec, classical_current, classical_current_analytic, solve_classical_steady_state,
)
from .services.errors import TransportError
from .services.observables import heat_current_analytic, terminal_populations_analytic
from .services.results_store import init_db, list_runs
from .services.steady_state import SolverOptions

logging.basicConfig(level=settings.LOG_LEVEL)
logger = logging.getLogger(__name__)

app = FastAPI(title="Chain Heat Transport")

graph = build_graph()


class SteadyStateRequest(BaseModel):
    """
    Request giải steady state

    Attributes:
        spec: ChainSpec
        options: SolverOptions (optional, default auto)
    """
    spec: ChainSpec
    options: Optional[SolverOptions] = None


class ClassicalRequest(BaseModel):
    spec: ClassicalChainSpec


@app.on_event("startup")
def _startup():
    init_db()


@app.get("/health")
def health() -> Dict[str, str]:
    return {"status": "ok"}


@app.post("/steady-state")
def steady_state(item: SteadyStateRequest):
    """
    Giải steady state qua pipeline assemble -> solve -> observe -> crosscheck

    Returns:
        Dict với report (currents, populations, coherences) và checks
    """
    try:
        state = graph.invoke({"spec": item.spec, "options": item.options})
    except Exception as e:
        logger.error("Error running solve pipeline: %s", e)
        raise HTTPException(status_code=500, detail=str(e)) from e
    if state.get("error"):
        raise HTTPException(status_code=422, detail=state["error"])
    return {"report": state["report"].to_dict(), "checks": state.get("checks", {})}


@app.post("/analytic-current")
def analytic_current(spec: ChainSpec):
    """Closed-form J_Q và terminal populations cho uniform chain không dephasing."""
    try:
        p_first, p_last = terminal_populations_analytic(spec)
        return {"heat_current": heat_current_analytic(spec), "population_first": p_first,
                "population_last": p_last}
    except TransportError as e:
        raise HTTPException(status_code=422, detail=str(e)) from e


@app.post("/classical-current")
def classical(item: ClassicalRequest):
    try:
        profile = solve_classical_steady_state(item.spec)
    except TransportError as e:
        raise HTTPException(status_code=422, detail=str(e)) from e
    return {
        "heat_current": classical_current(profile, item.spec),
        "analytic": classical_current_analytic(item.spec),
        "profile": profile.tolist(),
    }


@app.get("/runs")
def runs(kind: Optional[str] = None, limit: int = Query(50, ge=1)):
    return list_runs(kind=kind, limit=limit)
