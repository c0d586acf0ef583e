"""
LangGraph State Definition
==========================

State truyền qua solve pipeline: assemble -> solve -> observe -> crosscheck.

Architecture:
- TypedDict với total=False, các node điền dần từng field
- `error` được set khi một node thất bại; các node sau bỏ qua
"""

from typing import Any, Dict, Optional, TypedDict

from src.services.chain_model import ChainSpec
from src.services.observables import SteadyStateReport
from src.services.steady_state import SolverOptions


class SolveState(TypedDict, total=False):
    """
    State của solve pipeline

    Fields:
        spec: ChainSpec cần giải (required)
        options: SolverOptions (optional)
        liouvillian: Superoperator sau bước assemble
        rho: Steady-state density matrix
        report: SteadyStateReport
        checks: Cross-check với closed forms (analytic, structural)
        error: Thông báo lỗi nếu có node thất bại
    """
    spec: ChainSpec
    options: Optional[SolverOptions]
    liouvillian: Any
    rho: Any
    report: SteadyStateReport
    checks: Dict[str, float]
    error: Optional[str]
