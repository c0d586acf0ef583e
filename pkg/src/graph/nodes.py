"""
LangGraph Processing Nodes
==========================

Các node của solve pipeline:
1. node_assemble: ChainSpec -> Liouvillian
2. node_solve: Liouvillian -> steady state ρ
3. node_observe: ρ -> SteadyStateReport
4. node_crosscheck: so sánh với closed-form expressions khi áp dụng được

Architecture:
- Mỗi node nhận SolveState và trả về state đã cập nhật
- TransportError được bắt, ghi vào state["error"] và log
- Cross-check không áp dụng được (UnsupportedFormulaError) chỉ bị bỏ qua
"""

import logging

from src.graph.state import SolveState
from src.services.errors import TransportError, UnsupportedFormulaError
from src.services.liouvillian import assemble_liouvillian
from src.services.observables import (
    extract_observables, heat_current_analytic, heat_current_from_coherence, heat_current_structural,
)
from src.services.steady_state import solve_steady_state

logger = logging.getLogger(__name__)


def node_assemble(state: SolveState) -> SolveState:
    try:
        state["liouvillian"] = assemble_liouvillian(state["spec"])
        logger.info("Assembled Liouvillian for N=%d (%d nonzeros)",
                    state["spec"].n_sites, state["liouvillian"].nnz)
    except TransportError as e:
        logger.error("Error in assemble node: %s", e)
        state["error"] = f"{type(e).__name__}: {e}"
    return state


def node_solve(state: SolveState) -> SolveState:
    """
    Giải Lρ = 0 với Tr ρ = 1

    Args:
        state: SolveState có liouvillian và options (optional)

    Returns:
        SolveState với rho, hoặc error nếu null space suy biến / không hội tụ
    """
    try:
        state["rho"] = solve_steady_state(state["liouvillian"], state.get("options"))
    except TransportError as e:
        logger.error("Error in solve node: %s", e)
        state["error"] = f"{type(e).__name__}: {e}"
    return state


def node_observe(state: SolveState) -> SolveState:
    try:
        report = extract_observables(state["rho"], state["spec"])
        state["report"] = report
        logger.info("Steady state N=%d: J=%.9g", report.n_sites, report.heat_current)
    except TransportError as e:
        logger.error("Error in observe node: %s", e)
        state["error"] = f"{type(e).__name__}: {e}"
    return state


def node_crosscheck(state: SolveState) -> SolveState:
    """
    Cross-check numeric current với các closed forms

    Workflow:
    1. Structural current (terminal-site expression) cho uniform chains
    2. Coherence form −2ωg·Im⟨σ_1^+σ_2^−⟩
    3. Analytic ωΔ khi không có dephasing

    Returns:
        SolveState với checks: tên -> giá trị; công thức không áp dụng được bị bỏ qua
    """
    spec, rho = state["spec"], state["rho"]
    checks = {}
    for name, fn in (
        ("structural", lambda: heat_current_structural(rho, spec)),
        ("coherence", lambda: heat_current_from_coherence(rho, spec)),
        ("analytic", lambda: heat_current_analytic(spec)),
    ):
        try:
            checks[name] = fn()
        except UnsupportedFormulaError as e:
            logger.debug("skipping %s check: %s", name, e)
    state["checks"] = checks
    return state
