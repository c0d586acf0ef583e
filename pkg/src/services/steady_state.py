"""
Steady State - Null-space Solver for Lρ = 0, Tr ρ = 1
=====================================================

Service này tính steady-state density matrix duy nhất của Liouvillian:
- dense-nullspace: SVD của L dense, null space từ singular values nhỏ
- sparse-direct: thay một hàng của L bằng trace constraint rồi sparse LU
- sparse-shifted-iteration: inverse iteration trên (L − σI) với shift nhỏ
- auto: dense tới DENSE_SOLVER_MAX_SITES sites, sparse-direct lớn hơn

Architecture:
- Null space nhiều chiều (chain bị ngắt) là lỗi, không bao giờ lấy trung bình
- Sparse methods kiểm tra thêm traceless null direction trước khi solve
- Post-pass cố định: Hermitize (ρ+ρ†)/2 rồi normalize trace
- Residual check ‖Lρ‖ ≤ tol·‖L‖·‖ρ‖ (Frobenius norms)
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Literal

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import splu, norm as sparse_norm
from pydantic import BaseModel, ConfigDict, Field

from src import settings
from src.services.errors import ConvergenceError, DegenerateNullspaceError, ShapeError
from src.services.liouvillian import Superoperator, devectorize, trace_functional

logger = logging.getLogger(__name__)

DensityMatrix = np.ndarray
SolverMethod = Literal["auto", "dense-nullspace", "sparse-direct", "sparse-shifted-iteration"]

# Entries of a trace-one density matrix are bounded by 1 in magnitude
_MAX_ENTRY = 1e6


class SolverOptions(BaseModel):
    """
    Tuỳ chọn cho solve_steady_state

    Fields:
        method: auto | dense-nullspace | sparse-direct | sparse-shifted-iteration
        residual_tolerance: relative residual (default 1e-12)
        nullspace_tolerance: singular values ≤ tol·σ_max được coi là 0
        max_iterations: cho sparse-shifted-iteration
        shift: shift σ cho inverse iteration
        check_uniqueness: sparse methods tìm thêm một traceless null direction
    """
    model_config = ConfigDict(frozen=True)

    method: SolverMethod = "auto"
    residual_tolerance: float = Field(default_factory=lambda: settings.RESIDUAL_TOLERANCE, gt=0)
    nullspace_tolerance: float = Field(1e-10, gt=0)
    max_iterations: int = Field(50, ge=1)
    shift: float = Field(1e-10, gt=0)
    check_uniqueness: bool = True


def _hilbert_sites(liouvillian: Superoperator) -> tuple[int, int]:
    size = liouvillian.shape[0]
    if liouvillian.shape[0] != liouvillian.shape[1]:
        raise ShapeError(f"Liouvillian must be square, got {liouvillian.shape}")
    dim = int(round(np.sqrt(size)))
    if dim * dim != size:
        raise ShapeError(f"Liouvillian dimension {size} is not a square")
    return dim, int(round(np.log2(dim)))


def _resolve_method(method: SolverMethod, n_sites: int) -> SolverMethod:
    if method != "auto":
        return method
    return "dense-nullspace" if n_sites <= settings.DENSE_SOLVER_MAX_SITES else "sparse-direct"


def _dense_nullspace(liouvillian: Superoperator, opts: SolverOptions) -> np.ndarray:
    _, s, vh = la.svd(liouvillian.toarray(), full_matrices=False)
    tol = opts.nullspace_tolerance * max(s[0], 1.0)
    nullity = int((s <= tol).sum())
    logger.debug("dense SVD: smallest singular values %s, nullity %d", s[-3:], nullity)
    if nullity > 1:
        raise DegenerateNullspaceError(nullity)
    if nullity == 0:
        raise ConvergenceError(float(s[-1]), f"Liouvillian has no null vector (smallest singular value {s[-1]:.3e})")
    return vh[-1].conj()


def _trace_row_system(liouvillian: Superoperator, dim: int) -> sp.csc_matrix:
    # Row 0 (the ρ_00 balance) is minus the sum of the other population rows,
    # so it can be replaced by the trace constraint.
    coo = liouvillian.tocoo()
    keep = coo.row != 0
    trace = trace_functional(dim)
    cols = np.nonzero(trace)[0]
    rows = np.concatenate([coo.row[keep], np.zeros(cols.size, dtype=coo.row.dtype)])
    cols_all = np.concatenate([coo.col[keep], cols])
    data = np.concatenate([coo.data[keep], trace[cols]])
    size = liouvillian.shape[0]
    return sp.coo_matrix((data, (rows, cols_all)), shape=(size, size)).tocsc()


def _sparse_direct(liouvillian: Superoperator, dim: int) -> np.ndarray:
    system = _trace_row_system(liouvillian, dim)
    rhs = np.zeros(system.shape[0], dtype=complex)
    rhs[0] = 1.0
    try:
        lu = splu(system, permc_spec="COLAMD")
    except RuntimeError as e:
        # exactly singular factor: more than one steady state
        raise DegenerateNullspaceError(2, f"trace-constrained system is singular: {e}") from e
    return lu.solve(rhs)


def _shifted_iteration(liouvillian: Superoperator, dim: int, opts: SolverOptions) -> np.ndarray:
    size = liouvillian.shape[0]
    shifted = (liouvillian - opts.shift * sp.identity(size, dtype=complex, format="csc")).tocsc()
    try:
        lu = splu(shifted, permc_spec="COLAMD")
    except RuntimeError as e:
        raise DegenerateNullspaceError(2, f"shifted Liouvillian is singular: {e}") from e
    l_norm = sparse_norm(liouvillian)
    v = trace_functional(dim) / dim
    residual = np.inf
    for iteration in range(1, opts.max_iterations + 1):
        v = lu.solve(v)
        v = v / np.linalg.norm(v)
        residual = np.linalg.norm(liouvillian @ v) / l_norm
        if residual <= opts.residual_tolerance:
            logger.debug("shifted iteration converged after %d steps (residual %.3e)", iteration, residual)
            return v
    raise ConvergenceError(float(residual))


def _finalize(v: np.ndarray, liouvillian: Superoperator, opts: SolverOptions) -> DensityMatrix:
    if not np.all(np.isfinite(v)):
        raise DegenerateNullspaceError(2, "solver returned non-finite values")
    rho = devectorize(v)
    trace = np.trace(rho)
    if abs(trace) == 0:
        raise DegenerateNullspaceError(2, "null vector is traceless")
    rho = rho / trace
    if np.abs(rho).max() > _MAX_ENTRY:
        # a traceless null direction has leaked into the solution
        raise DegenerateNullspaceError(2, "steady-state solution is unbounded")

    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real

    residual = np.linalg.norm(liouvillian @ rho.reshape(-1, order="F"))
    bound = opts.residual_tolerance * sparse_norm(liouvillian) * np.linalg.norm(rho)
    if residual > bound:
        raise ConvergenceError(float(residual))
    return rho


def _check_unique(liouvillian: Superoperator, dim: int, opts: SolverOptions) -> None:
    # Traceless vectors form an invariant subspace of (L − σI)⁻¹, so inverse
    # iteration restricted to it finds a second null direction if one exists.
    size = liouvillian.shape[0]
    shifted = (liouvillian - opts.shift * sp.identity(size, dtype=complex, format="csc")).tocsc()
    try:
        lu = splu(shifted, permc_spec="COLAMD")
    except RuntimeError as e:
        raise DegenerateNullspaceError(2, f"shifted Liouvillian is singular: {e}") from e

    trace = trace_functional(dim)
    identity = trace / dim
    rng = np.random.default_rng(0)
    w = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    for _ in range(4):
        w = w - identity * (trace @ w)
        w = w / np.linalg.norm(w)
        w = lu.solve(w)
    w = w - identity * (trace @ w)
    w = w / np.linalg.norm(w)

    decay = np.linalg.norm(liouvillian @ w)
    bound = opts.nullspace_tolerance * max(sparse_norm(liouvillian), 1.0)
    logger.debug("slowest traceless mode: ‖Lw‖ = %.3e (bound %.3e)", decay, bound)
    if decay <= bound:
        raise DegenerateNullspaceError(2, f"second null direction found (‖Lw‖ = {decay:.3e})")


def solve_steady_state(liouvillian: Superoperator, opts: SolverOptions | None = None) -> DensityMatrix:
    """
    Tính steady state ρ với Lρ = 0 và Tr ρ = 1

    Workflow:
    1. Chọn method (auto theo số site)
    2. Tìm null vector của L
    3. Hermitize, normalize trace
    4. Kiểm tra residual

    Args:
        liouvillian: Superoperator từ assemble_liouvillian
        opts: SolverOptions (default nếu None)

    Returns:
        Density matrix 2^N × 2^N

    Raises:
        DegenerateNullspaceError: null space có dimension > 1
        ConvergenceError: residual vượt tolerance
    """
    opts = opts or SolverOptions()
    dim, n_sites = _hilbert_sites(liouvillian)
    method = _resolve_method(opts.method, n_sites)
    if method != "dense-nullspace" and opts.check_uniqueness:
        _check_unique(liouvillian, dim, opts)
    if method == "dense-nullspace":
        v = _dense_nullspace(liouvillian, opts)
    elif method == "sparse-direct":
        v = _sparse_direct(liouvillian, dim)
    else:
        v = _shifted_iteration(liouvillian, dim, opts)
    rho = _finalize(v, liouvillian, opts)
    logger.debug("steady state for N=%d via %s", n_sites, method)
    return rho


def check_density_matrix(rho: DensityMatrix, hermitian_tol: float = 1e-10, trace_tol: float = 1e-12,
                         psd_tol: float = 1e-10) -> None:
    """
    Kiểm tra DensityMatrix invariants: Hermitian, unit trace, PSD

    Raises:
        ShapeError: sai dimension
        ValueError: vi phạm invariant
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {rho.shape}")
    hermiticity = np.abs(rho - rho.conj().T).max()
    if hermiticity >= hermitian_tol:
        raise ValueError(f"density matrix is not Hermitian (max deviation {hermiticity:.3e})")
    trace = np.trace(rho)
    if abs(trace - 1.0) >= trace_tol:
        raise ValueError(f"density matrix trace is {trace}")
    min_eig = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if min_eig <= -psd_tol:
        raise ValueError(f"density matrix has negative eigenvalue {min_eig:.3e}")


def export_density_matrix(rho: DensityMatrix, path: str | Path) -> Path:
    """Write ρ as a complex text matrix (numpy savetxt format)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rho = np.asarray(rho, dtype=complex)
    np.savetxt(path, rho, fmt=["%.17e%+.17ej"] * rho.shape[1],
               header=f"density matrix {rho.shape[0]}x{rho.shape[1]}")
    return path
