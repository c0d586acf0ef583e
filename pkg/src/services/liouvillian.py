"""
Liouvillian Engine - Lindblad Generator as Sparse Superoperator
===============================================================

Chuyển ChainSpec thành Lindblad generator L tác dụng lên vectorized
density matrix:

    L = −i(I⊗H − Hᵀ⊗I) + Σ_j r_j ( conj(A_j)⊗A_j − ½ I⊗A_j†A_j − ½ (A_j†A_j)ᵀ⊗I )

Architecture:
- Vectorization column-stacking: vec(AρB) = (Bᵀ ⊗ A) vec(ρ)
- Assembly cộng dồn coordinate triplets của từng term, rồi chuyển sang CSR
- Superoperator là scipy.sparse CSR, immutable sau khi assemble
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from src.services.chain_model import ChainSpec, build_hamiltonian, build_jump_operators
from src.services.errors import ShapeError

logger = logging.getLogger(__name__)

Superoperator = sp.csr_matrix


def _hilbert_dim(n: int, what: str) -> int:
    d = int(round(np.sqrt(n)))
    if d * d != n or d & (d - 1):
        raise ShapeError(f"{what} of length {n} is not a vectorized 2^N x 2^N matrix")
    return d


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Column-stack a square matrix of dimension 2^N."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {rho.shape}")
    _hilbert_dim(rho.shape[0] ** 2, "matrix")
    return rho.reshape(-1, order="F")


def devectorize(v: np.ndarray) -> np.ndarray:
    """Inverse of `vectorize`."""
    v = np.asarray(v)
    if v.ndim != 1:
        raise ShapeError(f"expected a vector, got shape {v.shape}")
    d = _hilbert_dim(v.shape[0], "vector")
    return v.reshape((d, d), order="F")


def trace_functional(dim: int) -> np.ndarray:
    """vec(I) for a dim x dim identity: ones at the diagonal positions."""
    row = np.zeros(dim * dim, dtype=complex)
    row[np.arange(dim) * (dim + 1)] = 1.0
    return row


def _dissipator_terms(a: sp.csr_matrix, rate: float, identity: sp.csr_matrix) -> list[sp.coo_matrix]:
    a_dag_a = (a.conj().T @ a).tocsr()
    return [
        rate * sp.kron(a.conj(), a, format="coo"),
        -0.5 * rate * sp.kron(identity, a_dag_a, format="coo"),
        -0.5 * rate * sp.kron(a_dag_a.T, identity, format="coo"),
    ]


def dissipator_superoperator(jumps, dim: int) -> Superoperator:
    """Sum of Lindblad dissipators for the given (operator, rate, ...) jumps."""
    identity = sp.identity(dim, dtype=complex, format="csr")
    terms: list[sp.coo_matrix] = []
    for jump in jumps:
        terms.extend(_dissipator_terms(sp.csr_matrix(jump.operator), jump.rate, identity))
    return _sum_triplets([t.tocoo() for t in terms], dim * dim)


def _sum_triplets(terms: list[sp.coo_matrix], size: int) -> Superoperator:
    if not terms:
        return sp.csr_matrix((size, size), dtype=complex)
    rows = np.concatenate([t.row for t in terms])
    cols = np.concatenate([t.col for t in terms])
    data = np.concatenate([t.data for t in terms])
    # duplicates are summed in input order, so the result is deterministic
    return sp.coo_matrix((data, (rows, cols)), shape=(size, size)).tocsr()


def assemble_liouvillian(spec: ChainSpec) -> Superoperator:
    """
    Assemble Lindblad generator cho ChainSpec

    Workflow:
    1. Build sparse H và weighted jump set
    2. Coherent part −i(I⊗H − Hᵀ⊗I)
    3. Dissipator cho từng jump (bath trái/phải, dephasing)
    4. Gộp triplets thành CSR

    Args:
        spec: ChainSpec đã validate

    Returns:
        CSR matrix kích thước 4^N × 4^N
    """
    h = build_hamiltonian(spec, sparse=True)
    jumps = build_jump_operators(spec, sparse=True)
    dim = spec.dimension
    identity = sp.identity(dim, dtype=complex, format="csr")

    terms = [
        (-1j * sp.kron(identity, h, format="coo")).tocoo(),
        (1j * sp.kron(h.T, identity, format="coo")).tocoo(),
    ]
    for jump in jumps:
        terms.extend(_dissipator_terms(jump.operator, jump.rate, identity))
    liouvillian = _sum_triplets([t.tocoo() for t in terms], dim * dim)
    liouvillian.eliminate_zeros()
    logger.debug("Liouvillian N=%d: dim=%d nnz=%d jumps=%d", spec.n_sites, dim * dim, liouvillian.nnz, len(jumps))
    return liouvillian


def apply_liouvillian(liouvillian: Superoperator, rho: np.ndarray) -> np.ndarray:
    """Return devectorize(L · vectorize(ρ))."""
    v = vectorize(rho)
    if liouvillian.shape[1] != v.shape[0]:
        raise ShapeError(f"Liouvillian of shape {liouvillian.shape} cannot act on a {rho.shape} matrix")
    return devectorize(liouvillian @ v)


def dump_superoperator(liouvillian: Superoperator, path: str | Path) -> Path:
    """
    Debug dump dạng triplet text:

        # dim <D> nnz <K>
        <row> <col> <real> <imag>

    Rows sorted theo (row, col) để so sánh với implementation khác.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    coo = liouvillian.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with path.open("w", encoding="utf-8") as f:
        f.write(f"# dim {liouvillian.shape[0]} nnz {coo.nnz}\n")
        for i in order:
            value = coo.data[i]
            f.write(f"{coo.row[i]} {coo.col[i]} {value.real:.17g} {value.imag:.17g}\n")
    return path
