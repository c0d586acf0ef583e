"""
LangGraph Builder
=================

Xây dựng solve pipeline cho một ChainSpec.

Workflow:
START -> assemble -> solve -> observe -> crosscheck -> END

Architecture:
- StateGraph với SolveState
- Conditional edge sau mỗi node: có error thì đi thẳng tới END
"""

from langgraph.graph import StateGraph, START, END

from .state import SolveState
from .nodes import node_assemble, node_solve, node_observe, node_crosscheck


def _next_or_end(target: str):
    def route(state: SolveState) -> str:
        return END if state.get("error") else target
    return route


def build_graph():
    """
    Xây dựng solve pipeline

    Workflow:
    1. assemble: Liouvillian từ ChainSpec
    2. solve: steady state
    3. observe: currents, populations, coherences
    4. crosscheck: closed-form comparison

    Returns:
        Compiled LangGraph
    """
    g = StateGraph(SolveState)

    g.add_node("assemble", node_assemble)
    g.add_node("solve", node_solve)
    g.add_node("observe", node_observe)
    g.add_node("crosscheck", node_crosscheck)

    g.add_edge(START, "assemble")
    g.add_conditional_edges("assemble", _next_or_end("solve"))
    g.add_conditional_edges("solve", _next_or_end("observe"))
    g.add_conditional_edges("observe", _next_or_end("crosscheck"))
    g.add_edge("crosscheck", END)

    return g.compile()


def run_pipeline(spec, options=None) -> SolveState:
    """Chạy pipeline cho một spec và trả về state cuối cùng."""
    return build_graph().invoke({"spec": spec, "options": options})
