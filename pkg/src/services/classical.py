"""
Classical Exclusion - Symmetric Hopping Chain Comparator
========================================================

Classical analog của quantum chain: symmetric simple exclusion /
Förster-type hopping với rate V giữa các site lân cận, hai terminal site
trao đổi excitation với bath theo cùng Γ_k, n_k như quantum master equation.

Rate equations (steady state = 0):
    Ṗ_1 = Γ_1n_1 − P_1(γ_1 + V) + V P_2
    Ṗ_k = V(P_{k−1} + P_{k+1} − 2P_k)           1 < k < N
    Ṗ_N = Γ_Nn_N − P_N(γ_N + V) + V P_{N−1}

Architecture:
- Hệ tuyến tính tridiagonal, giải bằng scipy.linalg.solve_banded
- Current có dấu V(P_k − P_{k+1}), dương khi chảy trái → phải
- Current đếm excitation transfer rate; nhân ħω (= 1) khi so với quantum J_Q
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.linalg import solve_banded, LinAlgError
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator

from src.services.chain_model import BathSpec, bath_derived_quantities
from src.services.errors import TransportError

logger = logging.getLogger(__name__)

OccupationProfile = np.ndarray


class ClassicalChainSpec(BaseModel):
    """
    Classical hopping chain

    Fields:
        n_sites: N ≥ 2
        hop_rate: V > 0
        bath_left, bath_right: BathSpec (cùng ý nghĩa như quantum model)
        omega: energy dùng để đổi temperature thành occupation (ħω = 1)
    """
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    n_sites: int = Field(..., ge=2)
    hop_rate: float = Field(..., gt=0)
    omega: float = Field(1.0, gt=0)
    bath_left: BathSpec
    bath_right: BathSpec

    @field_validator("bath_left", "bath_right")
    @classmethod
    def _resolve_occupation(cls, bath: BathSpec, info: ValidationInfo) -> BathSpec:
        omega = info.data.get("omega")
        return bath if omega is None else bath.resolved(omega)

    def derived(self, side: str) -> tuple[float, float]:
        bath = self.bath_left if side == "left" else self.bath_right
        return bath_derived_quantities(bath, self.omega)


def solve_classical_steady_state(spec: ClassicalChainSpec) -> OccupationProfile:
    """
    Giải stationary rate equations (tridiagonal)

    Returns:
        Array P_k, k = 1..N
    """
    n, v = spec.n_sites, spec.hop_rate
    gamma_1, s_1 = spec.derived("left")
    gamma_n, s_n = spec.derived("right")

    # banded storage: row 0 super-diagonal, row 1 diagonal, row 2 sub-diagonal
    bands = np.zeros((3, n))
    bands[0, 1:] = v
    bands[2, :-1] = v
    bands[1, :] = -2.0 * v
    bands[1, 0] = -(gamma_1 + v)
    bands[1, -1] = -(gamma_n + v)
    rhs = np.zeros(n)
    rhs[0] = -gamma_1 * s_1  # Γ_1 n_1 = γ_1 s_1
    rhs[-1] = -gamma_n * s_n
    try:
        profile = solve_banded((1, 1), bands, rhs)
    except LinAlgError as e:
        raise TransportError(f"classical rate equations are singular: {e}") from e
    logger.debug("classical profile N=%d: P_1=%.6g P_N=%.6g", n, profile[0], profile[-1])
    return profile


def classical_current(profile: OccupationProfile, spec: ClassicalChainSpec, bond: int = 0) -> float:
    """V(P_k − P_{k+1}) on the given 0-based bond."""
    return float(spec.hop_rate * (profile[bond] - profile[bond + 1]))


def bond_currents(profile: OccupationProfile, spec: ClassicalChainSpec) -> np.ndarray:
    return spec.hop_rate * -np.diff(profile)


def classical_current_analytic(spec: ClassicalChainSpec) -> float:
    """
    J_C = γ_1γ_N V(s_1 − s_N) / (V(γ_1 + γ_N) + γ_1γ_N(N − 1))

    Với N → ∞: J_C ~ V(s_1 − s_N)/N (Fourier's law).
    """
    v = spec.hop_rate
    gamma_1, s_1 = spec.derived("left")
    gamma_n, s_n = spec.derived("right")
    return gamma_1 * gamma_n * v * (s_1 - s_n) / (v * (gamma_1 + gamma_n) + gamma_1 * gamma_n * (spec.n_sites - 1))
