"""
Entanglement - Negativity, Concurrence & Region Scan
====================================================

Service này định lượng entanglement của steady state:
- negativity: tổng |eigenvalue âm| của partial transpose (PPT criterion)
- concurrence: Wootters construction cho two-qubit states (cross-check)
- scan_entanglement_region: với N = 2 và γ_1 = γ_N, tìm các cell (s_1, s_N)
  mà tồn tại (g, γ) cho steady state entangled

Architecture:
- Negativity là measure chính (exact separability witness cho 2×2)
- Scan: log grid g, γ ∈ [1e−2, 1e2], refine một lần quanh điểm tốt nhất
- Cells độc lập, chạy qua parallel_map với thứ tự kết quả cố định
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.services.chain_model import BathSpec, ChainSpec
from src.services.errors import InvalidSpecError, ShapeError, TransportError
from src.services.liouvillian import assemble_liouvillian
from src.services.parallel import parallel_map
from src.services.steady_state import SolverOptions, solve_steady_state

logger = logging.getLogger(__name__)

ENTANGLEMENT_THRESHOLD = 1e-9

_SIGMA_Y2 = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


@dataclass(frozen=True)
class EntanglementResult:
    negativity: float
    concurrence: float | None
    entangled: bool


def _n_sites(rho: np.ndarray) -> int:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {rho.shape}")
    n = int(round(np.log2(rho.shape[0])))
    if 2 ** n != rho.shape[0]:
        raise ShapeError(f"dimension {rho.shape[0]} is not a power of two")
    return n


def partial_transpose(rho: np.ndarray, sites: Iterable[int]) -> np.ndarray:
    """
    Partial transpose trên các site (0-based) trong `sites`

    Raises:
        InvalidSpecError: bipartition rỗng, trùng lặp hoặc ngoài chain
    """
    n = _n_sites(rho)
    subset = sorted(set(sites))
    if not subset or len(subset) == n or subset[0] < 0 or subset[-1] >= n:
        raise InvalidSpecError(f"invalid bipartition {list(sites)} for N={n}")
    tensor = np.asarray(rho).reshape((2,) * (2 * n))
    axes = list(range(2 * n))
    for k in subset:
        axes[k], axes[n + k] = axes[n + k], axes[k]
    return tensor.transpose(axes).reshape(rho.shape)


def negativity(rho: np.ndarray, bipartition: Sequence[int] = (0,)) -> float:
    """Sum of |negative eigenvalues| of the partial transpose."""
    eigenvalues = np.linalg.eigvalsh(partial_transpose(rho, bipartition))
    return float(-eigenvalues[eigenvalues < 0].sum())


def concurrence(rho: np.ndarray) -> float:
    """
    Wootters concurrence max(0, λ_1 − λ_2 − λ_3 − λ_4)

    λ_i là căn bậc hai eigenvalues của ρ(σ_y⊗σ_y)ρ*(σ_y⊗σ_y), giảm dần.

    Raises:
        ShapeError: ρ không phải two-qubit state
    """
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ShapeError(f"concurrence needs a two-qubit state, got shape {rho.shape}")
    flipped = _SIGMA_Y2 @ rho.conj() @ _SIGMA_Y2
    eigenvalues = np.linalg.eigvals(rho @ flipped)
    lambdas = np.sort(np.sqrt(np.clip(eigenvalues.real, 0.0, None)))[::-1]
    return float(max(0.0, lambdas[0] - lambdas[1:].sum()))


def entanglement_of(rho: np.ndarray, bipartition: Sequence[int] = (0,),
                    threshold: float = ENTANGLEMENT_THRESHOLD) -> EntanglementResult:
    neg = negativity(rho, bipartition)
    conc = concurrence(rho) if np.asarray(rho).shape == (4, 4) else None
    return EntanglementResult(negativity=neg, concurrence=conc, entangled=neg > threshold)


def two_site_spec(s_left: float, s_right: float, coupling: float, gamma_left: float,
                  gamma_right: float | None = None, omega: float = 1.0) -> ChainSpec:
    """
    N = 2 ChainSpec tham số hoá theo (s_k, γ_k) thay vì (T_k, Γ_k)

    n = s/(1 − 2s), Γ = γ/(2n + 1).
    """
    gamma_right = gamma_left if gamma_right is None else gamma_right
    baths = []
    for s, gamma in ((s_left, gamma_left), (s_right, gamma_right)):
        if not 0 <= s < 0.5:
            raise InvalidSpecError(f"equilibrium population must lie in [0, 1/2), got {s}")
        n = s / (1.0 - 2.0 * s)
        baths.append(BathSpec(interaction_rate=gamma / (2.0 * n + 1.0), occupation=n))
    return ChainSpec.uniform(2, omega, coupling, baths[0], baths[1])


class ScanOptions(BaseModel):
    """Search grid cho scan_entanglement_region."""
    model_config = ConfigDict(frozen=True)

    coupling_range: tuple[float, float] = (1e-2, 1e2)
    gamma_range: tuple[float, float] = (1e-2, 1e2)
    points: int = Field(25, ge=2)
    refine_points: int = Field(5, ge=0)
    threshold: float = Field(ENTANGLEMENT_THRESHOLD, gt=0)
    max_workers: int = Field(1, ge=1)


@dataclass(frozen=True)
class RegionCell:
    s_left: float
    s_right: float
    entangled: bool
    max_negativity: float
    best_coupling: float
    best_gamma: float


@dataclass
class RegionMap:
    cells: list[RegionCell] = field(default_factory=list)
    boundary: list[tuple[float, float]] = field(default_factory=list)

    def to_rows(self) -> list[dict]:
        return [
            {
                "s_left": c.s_left,
                "s_right": c.s_right,
                "entangled": int(c.entangled),
                "max_negativity": c.max_negativity,
                "best_coupling": c.best_coupling,
                "best_gamma": c.best_gamma,
            }
            for c in self.cells
        ]


def _steady_negativity(s_left: float, s_right: float, coupling: float, gamma: float) -> float:
    spec = two_site_spec(s_left, s_right, coupling, gamma)
    rho = solve_steady_state(assemble_liouvillian(spec), SolverOptions(method="dense-nullspace"))
    return negativity(rho)


def _search_grid(best: float, lo: float, hi: float, points: int, refine_points: int) -> np.ndarray:
    step = (np.log10(hi) - np.log10(lo)) / (points - 1)
    centre = np.log10(best)
    return 10 ** np.linspace(centre - step, centre + step, refine_points)


def _best_on_grid(s_left: float, s_right: float, couplings, gammas,
                  best: tuple[float, float, float]) -> tuple[float, float, float]:
    for g in couplings:
        for gamma in gammas:
            try:
                value = _steady_negativity(s_left, s_right, float(g), float(gamma))
            except TransportError as e:
                logger.warning("cell (%.3f, %.3f) g=%.3g gamma=%.3g failed: %s", s_left, s_right, g, gamma, e)
                continue
            if value > best[0]:
                best = (value, float(g), float(gamma))
    return best


def _scan_cell(args: tuple[float, float, ScanOptions]) -> RegionCell:
    s_left, s_right, opts = args
    couplings = np.logspace(*np.log10(opts.coupling_range), opts.points)
    gammas = np.logspace(*np.log10(opts.gamma_range), opts.points)
    best = (0.0, float(couplings[0]), float(gammas[0]))
    best = _best_on_grid(s_left, s_right, couplings, gammas, best)
    if best[0] > opts.threshold and opts.refine_points:
        g_fine = _search_grid(best[1], *opts.coupling_range, opts.points, opts.refine_points)
        gamma_fine = _search_grid(best[2], *opts.gamma_range, opts.points, opts.refine_points)
        best = _best_on_grid(s_left, s_right, g_fine, gamma_fine, best)
    return RegionCell(
        s_left=s_left,
        s_right=s_right,
        entangled=best[0] > opts.threshold,
        max_negativity=best[0],
        best_coupling=best[1],
        best_gamma=best[2],
    )


def _boundary(cells: list[RegionCell]) -> list[tuple[float, float]]:
    lookup = {(c.s_left, c.s_right): c.entangled for c in cells}
    lefts = sorted({c.s_left for c in cells})
    rights = sorted({c.s_right for c in cells})
    out = []
    for i, a in enumerate(lefts):
        for j, b in enumerate(rights):
            if not lookup.get((a, b)):
                continue
            neighbours = [(i + di, j + dj) for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1))]
            if any(0 <= x < len(lefts) and 0 <= y < len(rights) and not lookup.get((lefts[x], rights[y]))
                   for x, y in neighbours):
                out.append((a, b))
    return out


def scan_entanglement_region(s_left_values: Sequence[float], s_right_values: Sequence[float],
                             opts: ScanOptions | None = None) -> RegionMap:
    """
    Map vùng (s_1, s_N) mà steady state N = 2 có thể entangled với γ_1 = γ_N

    Workflow:
    1. Với mỗi cell, duyệt log grid (g, γ) và giữ negativity lớn nhất
    2. Refine một lần quanh điểm tốt nhất nếu đã vượt threshold
    3. Boundary = entangled cells có neighbour không entangled

    Args:
        s_left_values, s_right_values: grid của s_1, s_N trong [0, 1/2)
        opts: ScanOptions

    Returns:
        RegionMap (cells theo thứ tự s_left-major, boundary estimate)
    """
    opts = opts or ScanOptions()
    tasks = [(float(a), float(b), opts) for a in s_left_values for b in s_right_values]
    cells = parallel_map(_scan_cell, tasks, opts.max_workers)
    region = RegionMap(cells=list(cells), boundary=_boundary(list(cells)))
    logger.info("Entanglement scan: %d of %d cells entangled", sum(c.entangled for c in cells), len(cells))
    return region
