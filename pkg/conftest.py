"""
Shared fixtures cho test suite.

Benchmark chain: ħω = g = 1, Γ_1 = Γ_N = 1, k_BT_1 = 1, T_N = 0.
"""

import numpy as np
import pytest

from src import settings
from src.services.chain_model import BathSpec, ChainSpec

# (ω=1, T=1): n = 1/(e − 1)
N_BENCH = 1.0 / (np.e - 1.0)
GAMMA_BENCH = 2.0 * N_BENCH + 1.0
S_BENCH = 1.0 / (np.e + 1.0)
DELTA_BENCH = 4 * GAMMA_BENCH * S_BENCH / ((GAMMA_BENCH + 1.0) * (4.0 + GAMMA_BENCH))


def bench_spec(n_sites: int = 2, dephasing_rate: float = 0.0, coupling: float = 1.0) -> ChainSpec:
    return ChainSpec.uniform(
        n_sites,
        1.0,
        coupling,
        BathSpec(interaction_rate=1.0, temperature=1.0),
        BathSpec(interaction_rate=1.0, temperature=0.0),
        dephasing_rate,
    )


def equilibrium_spec(n_sites: int = 3, temperature: float = 1.0) -> ChainSpec:
    return ChainSpec.uniform(
        n_sites,
        1.0,
        1.0,
        BathSpec(interaction_rate=1.0, temperature=temperature),
        BathSpec(interaction_rate=1.0, temperature=temperature),
    )


@pytest.fixture
def benchmark_spec() -> ChainSpec:
    return bench_spec()


@pytest.fixture
def tmp_db(tmp_path, monkeypatch) -> str:
    """Point the run ledger at a throwaway SQLite file."""
    path = str(tmp_path / "runs.sqlite")
    monkeypatch.setattr(settings, "DB_PATH", path)
    return path
