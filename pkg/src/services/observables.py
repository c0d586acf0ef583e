"""
Observables - Heat Currents, Populations & Coherences
=====================================================

Tính các observables của steady state và các closed-form expressions để
cross-validate:
- bath_current: Tr(H · L_k ρ) tính numeric từ dissipator của từng bath
- heat_current_structural: biểu thức theo population và coherence của terminal site
- heat_current_analytic: ωΔ cho uniform, dephasing-free chain
- extract_observables: gom tất cả vào SteadyStateReport

Architecture:
- Currents có dấu: dương khi năng lượng chảy từ bath trái sang phải
- Report là frozen dataclass, serialize thành CSV row với column order cố định
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.services.chain_model import (
    ChainSpec, Side, SIGMA_MINUS, SIGMA_PLUS, EXCITED_PROJECTOR,
    build_hamiltonian, build_jump_operators, site_operator,
)
from src.services.errors import ShapeError, UnsupportedFormulaError

logger = logging.getLogger(__name__)

REPORT_COLUMNS = [
    "n_sites",
    "dephasing_rate",
    "current_left",
    "current_right",
    "heat_current",
    "delta",
    "populations",
    "bond_coherences_imag",
    "bond_coherences_real",
]


@dataclass(frozen=True)
class SteadyStateReport:
    """
    Observables của một steady state

    Fields:
        current_left, current_right: J_1, J_N (signed, tổng bằng 0)
        heat_current: J_Q = current_left (dương khi chảy trái → phải)
        populations: ⟨σ_k^+σ_k^−⟩ cho k = 1..N
        bond_coherences: ⟨σ_k^+σ_{k+1}^−⟩ cho k = 1..N−1
        delta: ig(⟨σ_1^+σ_2^−⟩ − ⟨σ_1^−σ_2^+⟩)
    """
    n_sites: int
    dephasing_rate: float
    current_left: float
    current_right: float
    heat_current: float
    populations: tuple[float, ...]
    bond_coherences: tuple[complex, ...]
    delta: float

    def to_row(self) -> dict:
        """CSV row theo REPORT_COLUMNS; list fields nối bằng ';'."""
        return {
            "n_sites": self.n_sites,
            "dephasing_rate": self.dephasing_rate,
            "current_left": self.current_left,
            "current_right": self.current_right,
            "heat_current": self.heat_current,
            "delta": self.delta,
            "populations": ";".join(f"{p:.12g}" for p in self.populations),
            "bond_coherences_imag": ";".join(f"{c.imag:.12g}" for c in self.bond_coherences),
            "bond_coherences_real": ";".join(f"{c.real:.12g}" for c in self.bond_coherences),
        }

    def to_dict(self) -> dict:
        """JSON-friendly form (complex numbers as [re, im])."""
        return {
            "n_sites": self.n_sites,
            "dephasing_rate": self.dephasing_rate,
            "current_left": self.current_left,
            "current_right": self.current_right,
            "heat_current": self.heat_current,
            "delta": self.delta,
            "populations": list(self.populations),
            "bond_coherences": [[c.real, c.imag] for c in self.bond_coherences],
        }


def _check_state(rho: np.ndarray, spec: ChainSpec) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape != (spec.dimension, spec.dimension):
        raise ShapeError(f"state of shape {rho.shape} does not match N={spec.n_sites}")
    return rho


def expectation(op, rho: np.ndarray) -> complex:
    """Tr(op · ρ) for dense or sparse `op`."""
    return complex(np.trace(np.asarray(op @ rho)))


def population(rho: np.ndarray, site: int, n_sites: int) -> float:
    """⟨σ_k^+σ_k^−⟩ at 0-based site k."""
    return expectation(site_operator(EXCITED_PROJECTOR, site, n_sites), rho).real


def bond_coherence(rho: np.ndarray, site: int, n_sites: int) -> complex:
    """⟨σ_k^+σ_{k+1}^−⟩ for the bond between 0-based sites k and k+1."""
    op = site_operator(SIGMA_PLUS, site, n_sites) @ site_operator(SIGMA_MINUS, site + 1, n_sites)
    return expectation(op, rho)


def bath_current(rho: np.ndarray, spec: ChainSpec, side: Side) -> float:
    """
    Heat current Tr(H · L_k ρ) của bath bên `side`

    Args:
        rho: Density matrix (steady state hoặc bất kỳ)
        spec: ChainSpec
        side: "left" hoặc "right"

    Returns:
        Signed current, dương khi năng lượng đi vào chain từ bath đó
    """
    rho = _check_state(rho, spec)
    spec.bath(side)
    h = build_hamiltonian(spec, sparse=False)
    d_rho = np.zeros(rho.shape, dtype=complex)
    for jump in build_jump_operators(spec, sparse=False):
        if jump.channel != side:
            continue
        a = jump.operator
        a_dag_a = a.conj().T @ a
        d_rho += jump.rate * (a @ rho @ a.conj().T - 0.5 * (a_dag_a @ rho + rho @ a_dag_a))
    return expectation(h, d_rho).real


def _require_uniform(spec: ChainSpec, what: str) -> None:
    if spec.n_sites < 2:
        raise UnsupportedFormulaError(f"{what} needs a chain with N >= 2")
    if not spec.is_uniform:
        raise UnsupportedFormulaError(f"{what} holds only for uniform on-site energies and couplings")


def heat_current_structural(rho: np.ndarray, spec: ChainSpec, side: Side = "left") -> float:
    """
    Terminal-site expression của heat current

        J_1 = γ_1 ω (s_1 − ⟨σ_1^+σ_1^−⟩) − (γ_1 g/2)(⟨σ_1^+σ_2^−⟩ + c.c.)

    side="right" dùng biểu thức đối xứng cho site N (kết quả là J_N).
    Dephasing không xuất hiện trong biểu thức.

    Raises:
        UnsupportedFormulaError: chain không uniform hoặc N < 2
    """
    rho = _check_state(rho, spec)
    _require_uniform(spec, "structural heat current")
    n = spec.n_sites
    omega, g = spec.site_energies[0], spec.couplings[0]
    gamma, s = spec.derived(side)
    site = spec.terminal_site(side)
    bond = 0 if side == "left" else n - 2
    coherence = bond_coherence(rho, bond, n)
    # ⟨σ_N^+σ_{N−1}^−⟩ + c.c. has the same real part as the bond coherence
    return gamma * omega * (s - population(rho, site, n)) - gamma * g * coherence.real


def heat_current_from_coherence(rho: np.ndarray, spec: ChainSpec) -> float:
    """J_Q = −2ωg·Im⟨σ_1^+σ_2^−⟩ (uniform chains)."""
    rho = _check_state(rho, spec)
    _require_uniform(spec, "coherence heat current")
    omega, g = spec.site_energies[0], spec.couplings[0]
    return -2.0 * omega * g * bond_coherence(rho, 0, spec.n_sites).imag


def _analytic_delta(spec: ChainSpec) -> float:
    _require_uniform(spec, "analytic heat current")
    if spec.dephasing_rate > 0:
        raise UnsupportedFormulaError("analytic heat current holds only without dephasing")
    g = spec.couplings[0]
    gamma_1, s_1 = spec.derived("left")
    gamma_n, s_n = spec.derived("right")
    return 4 * g**2 * gamma_1 * gamma_n * (s_1 - s_n) / ((gamma_1 + gamma_n) * (4 * g**2 + gamma_1 * gamma_n))


def heat_current_analytic(spec: ChainSpec) -> float:
    """
    Closed form J_Q = ωΔ với

        Δ = 4g²γ_1γ_N(s_1 − s_N) / ((γ_1 + γ_N)(4g² + γ_1γ_N))

    Độc lập với N.

    Raises:
        UnsupportedFormulaError: dephasing > 0 hoặc chain không uniform
    """
    return spec.site_energies[0] * _analytic_delta(spec)


def terminal_populations_analytic(spec: ChainSpec) -> tuple[float, float]:
    """(s_1 − Δ/γ_1, s_N + Δ/γ_N) for uniform dephasing-free chains."""
    delta = _analytic_delta(spec)
    gamma_1, s_1 = spec.derived("left")
    gamma_n, s_n = spec.derived("right")
    return s_1 - delta / gamma_1, s_n + delta / gamma_n


def extract_observables(rho: np.ndarray, spec: ChainSpec) -> SteadyStateReport:
    """
    Gom currents, populations, coherences và Δ vào SteadyStateReport

    Args:
        rho: Steady state
        spec: ChainSpec tương ứng

    Returns:
        SteadyStateReport
    """
    rho = _check_state(rho, spec)
    n = spec.n_sites
    populations = tuple(population(rho, k, n) for k in range(n))
    coherences = tuple(bond_coherence(rho, k, n) for k in range(n - 1))
    current_left = bath_current(rho, spec, "left")
    current_right = bath_current(rho, spec, "right") if spec.bath_right is not None else -current_left
    if coherences:
        # ig(c − c*) = −2g Im c
        delta = -2.0 * spec.couplings[0] * coherences[0].imag
    else:
        delta = 0.0
    return SteadyStateReport(
        n_sites=n,
        dephasing_rate=spec.dephasing_rate,
        current_left=current_left,
        current_right=current_right,
        heat_current=current_left,
        populations=populations,
        bond_coherences=coherences,
        delta=delta,
    )
