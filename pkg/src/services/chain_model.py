"""
Chain Model - Physical Specification & Hilbert-Space Operators
==============================================================

Service này định nghĩa chain of two-level systems và xây dựng các operators:
- BathSpec / ChainSpec (pydantic models, immutable)
- Bose occupation và các đại lượng dẫn xuất (γ, s) của bath
- Hamiltonian với flip-flop coupling giữa các site lân cận
- Weighted jump operators cho hai bath ở đầu chain và dephasing

Architecture:
- Đơn vị ħ = k_B = 1
- Basis: site 1 ⊗ site 2 ⊗ … ⊗ site N, trong mỗi site index 0 = excited,
  index 1 = ground. Với N=2: |ee⟩, |eg⟩, |ge⟩, |gg⟩
- Operators dense khi N ≤ DENSE_THRESHOLD, scipy.sparse CSR khi lớn hơn
"""

from __future__ import annotations

import logging
from typing import NamedTuple, Literal

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator

from src import settings
from src.services.errors import InvalidSpecError

logger = logging.getLogger(__name__)

Side = Literal["left", "right"]

# Single-site operators, index 0 = excited, index 1 = ground
SIGMA_PLUS = sp.csr_matrix(np.array([[0, 1], [0, 0]], dtype=complex))
SIGMA_MINUS = sp.csr_matrix(np.array([[0, 0], [1, 0]], dtype=complex))
SIGMA_Z = sp.csr_matrix(np.diag([1.0, -1.0]).astype(complex))
EXCITED_PROJECTOR = sp.csr_matrix(np.diag([1.0, 0.0]).astype(complex))

# Exponent above which the Bose occupation is zero to double precision
_MAX_EXPONENT = 700.0


def thermal_occupation(omega: float, temperature: float) -> float:
    """
    Bose occupation 1/(exp(ω/T) − 1) của bath mode tại tần số cộng hưởng

    Args:
        omega: Site energy ħω, phải > 0
        temperature: k_B T ≥ 0

    Returns:
        Mean excitation number; đúng bằng 0 khi T = 0

    Raises:
        InvalidSpecError: omega ≤ 0 (occupation phân kỳ) hoặc T < 0
    """
    if not np.isfinite(omega) or omega <= 0:
        raise InvalidSpecError(f"Bose occupation needs omega > 0, got {omega}")
    if not np.isfinite(temperature) or temperature < 0:
        raise InvalidSpecError(f"temperature must be finite and >= 0, got {temperature}")
    if temperature == 0:
        return 0.0
    x = omega / temperature
    if x > _MAX_EXPONENT:
        return 0.0
    return float(1.0 / np.expm1(x))


class BathSpec(BaseModel):
    """
    Bosonic heat bath gắn vào một terminal site

    Fields:
        interaction_rate: Γ > 0
        temperature: k_B T ≥ 0 (optional nếu đã cho occupation)
        occupation: mean excitation number n ≥ 0 (dạng lưu canonical)
    """
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    interaction_rate: float = Field(..., gt=0)
    temperature: float | None = Field(None, ge=0)
    occupation: float | None = Field(None, ge=0)

    @model_validator(mode="after")
    def _require_entry_mode(self) -> "BathSpec":
        if self.temperature is None and self.occupation is None:
            raise ValueError("bath needs a temperature or an occupation")
        return self

    def resolved(self, omega: float) -> "BathSpec":
        """Return a copy whose occupation is filled in from the temperature."""
        if self.occupation is not None:
            return self
        return self.model_copy(update={"occupation": thermal_occupation(omega, self.temperature)})

    def mean_occupation(self, omega: float) -> float:
        return self.resolved(omega).occupation


def bath_derived_quantities(bath: BathSpec, omega: float) -> tuple[float, float]:
    """
    Effective rate γ = Γ(2n+1) và equilibrium population s = n/(2n+1)

    Args:
        bath: BathSpec (temperature hoặc occupation)
        omega: Energy của terminal site mà bath gắn vào

    Returns:
        Tuple (gamma, s)
    """
    n = bath.mean_occupation(omega)
    gamma = bath.interaction_rate * (2.0 * n + 1.0)
    s = n / (2.0 * n + 1.0)
    return gamma, s


class ChainSpec(BaseModel):
    """
    Full physical description của chain

    Fields:
        n_sites: N ≥ 1
        site_energies: N giá trị ħω_k ≥ 0
        couplings: N−1 giá trị g_k (nearest-neighbour flip-flop)
        bath_left: Bath gắn vào site 1
        bath_right: Bath gắn vào site N (bắt buộc khi N ≥ 2; với N = 1 có thể bỏ)
        dephasing_rate: γ ≥ 0, 0 tắt dephasing

    Occupation của mỗi bath được resolve từ temperature theo energy của
    terminal site tương ứng ngay khi validate.
    """
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    n_sites: int = Field(..., ge=1)
    site_energies: tuple[float, ...]
    couplings: tuple[float, ...] = ()
    bath_left: BathSpec
    bath_right: BathSpec | None = None
    dephasing_rate: float = Field(0.0, ge=0)

    @field_validator("site_energies")
    @classmethod
    def _non_negative_energies(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if any(e < 0 for e in v):
            raise ValueError("site energies must be >= 0")
        return v

    @field_validator("bath_left", "bath_right")
    @classmethod
    def _resolve_occupation(cls, bath: BathSpec | None, info: ValidationInfo) -> BathSpec | None:
        energies = info.data.get("site_energies")
        if bath is None or not energies:
            return bath
        # occupation follows the energy of the terminal site the bath is attached to
        return bath.resolved(energies[0] if info.field_name == "bath_left" else energies[-1])

    @model_validator(mode="after")
    def _check_shapes(self) -> "ChainSpec":
        n = self.n_sites
        if len(self.site_energies) != n:
            raise ValueError(f"expected {n} site energies, got {len(self.site_energies)}")
        if len(self.couplings) != n - 1:
            raise ValueError(f"expected {n - 1} couplings, got {len(self.couplings)}")
        if n >= 2 and self.bath_right is None:
            raise ValueError("bath_right is required for chains with N >= 2")
        return self

    @classmethod
    def uniform(
        cls,
        n_sites: int,
        omega: float,
        coupling: float,
        bath_left: BathSpec,
        bath_right: BathSpec | None = None,
        dephasing_rate: float = 0.0,
    ) -> "ChainSpec":
        return cls(
            n_sites=n_sites,
            site_energies=(omega,) * n_sites,
            couplings=(coupling,) * (n_sites - 1),
            bath_left=bath_left,
            bath_right=bath_right,
            dephasing_rate=dephasing_rate,
        )

    @property
    def dimension(self) -> int:
        return 2 ** self.n_sites

    @property
    def is_uniform(self) -> bool:
        """True khi tất cả ω_k bằng nhau và tất cả g_k bằng nhau."""
        energies_equal = len(set(self.site_energies)) == 1
        couplings_equal = len(set(self.couplings)) <= 1
        return energies_equal and couplings_equal

    def bath(self, side: Side) -> BathSpec:
        if side == "left":
            return self.bath_left
        if side == "right":
            if self.bath_right is None:
                raise InvalidSpecError("chain has no right bath")
            return self.bath_right
        raise InvalidSpecError(f"unknown side {side!r}")

    def terminal_site(self, side: Side) -> int:
        """0-based index of the site a bath couples to."""
        return 0 if side == "left" else self.n_sites - 1

    def derived(self, side: Side) -> tuple[float, float]:
        """(γ, s) for the bath on the given side."""
        return bath_derived_quantities(self.bath(side), self.site_energies[self.terminal_site(side)])

    def is_connected(self, min_coupling: float = 0.0) -> bool:
        return all(abs(g) > min_coupling for g in self.couplings)


def site_operator(op: sp.spmatrix, site: int, n_sites: int) -> sp.csr_matrix:
    """Embed a single-site operator at 0-based `site` in the N-site space."""
    if not 0 <= site < n_sites:
        raise InvalidSpecError(f"site {site} outside chain of {n_sites}")
    left = sp.identity(2 ** site, dtype=complex, format="csr")
    right = sp.identity(2 ** (n_sites - site - 1), dtype=complex, format="csr")
    return sp.kron(sp.kron(left, op, format="csr"), right, format="csr")


def excitation_count(index: int, n_sites: int) -> int:
    """Number of excited sites in computational basis state `index` (bit 0 = excited)."""
    return n_sites - bin(index).count("1")


def total_excitation_operator(n_sites: int) -> sp.csr_matrix:
    """Σ_k σ_k^+σ_k^−, diagonal in the computational basis."""
    counts = [excitation_count(i, n_sites) for i in range(2 ** n_sites)]
    return sp.diags(np.asarray(counts, dtype=complex), format="csr")


def _as_hilbert_operator(op: sp.spmatrix, n_sites: int, sparse: bool | None):
    if sparse is None:
        sparse = n_sites > settings.DENSE_THRESHOLD
    return op.tocsr() if sparse else op.toarray()


def build_hamiltonian(spec: ChainSpec, sparse: bool | None = None):
    """
    Hamiltonian H = Σ_k (ω_k/2)σ_k^z + Σ_k g_k(σ_k^+σ_{k+1}^− + σ_k^−σ_{k+1}^+)

    Args:
        spec: ChainSpec
        sparse: None theo DENSE_THRESHOLD, True/False để ép kiểu

    Returns:
        numpy array (dense) hoặc CSR matrix, Hermitian
    """
    n = spec.n_sites
    h = sp.csr_matrix((2 ** n, 2 ** n), dtype=complex)
    for k, omega in enumerate(spec.site_energies):
        h = h + (omega / 2.0) * site_operator(SIGMA_Z, k, n)
    for k, g in enumerate(spec.couplings):
        hop = site_operator(SIGMA_PLUS, k, n) @ site_operator(SIGMA_MINUS, k + 1, n)
        h = h + g * (hop + hop.conj().T)
    logger.debug("Hamiltonian for N=%d has %d nonzeros", n, h.nnz)
    return _as_hilbert_operator(h, n, sparse)


class JumpOperator(NamedTuple):
    operator: object
    rate: float
    channel: str  # "left", "right" or "dephasing"


def build_jump_operators(spec: ChainSpec, sparse: bool | None = None) -> list[JumpOperator]:
    """
    Weighted jump set của master equation

    Workflow:
    1. Emission σ^− với rate Γ(n+1) và absorption σ^+ với rate Γn cho mỗi bath
    2. Dephasing projector σ_k^+σ_k^− với rate γ cho mỗi site khi γ > 0
    3. Bỏ mọi jump có rate bằng 0

    Returns:
        List JumpOperator(operator, rate, channel)
    """
    n = spec.n_sites
    jumps: list[JumpOperator] = []
    sides: list[Side] = ["left"] if spec.bath_right is None else ["left", "right"]
    for side in sides:
        bath = spec.bath(side)
        site = spec.terminal_site(side)
        occ = bath.occupation
        emission = bath.interaction_rate * (occ + 1.0)
        absorption = bath.interaction_rate * occ
        jumps.append(JumpOperator(site_operator(SIGMA_MINUS, site, n), emission, side))
        if absorption > 0:
            jumps.append(JumpOperator(site_operator(SIGMA_PLUS, site, n), absorption, side))
    if spec.dephasing_rate > 0:
        for k in range(n):
            jumps.append(JumpOperator(site_operator(EXCITED_PROJECTOR, k, n), spec.dephasing_rate, "dephasing"))
    return [JumpOperator(_as_hilbert_operator(j.operator, n, sparse), j.rate, j.channel) for j in jumps]
