"""
Tests cho entanglement: negativity, concurrence và N = 2 region scan.
"""

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st
from scipy.stats import unitary_group

from conftest import bench_spec
from src.services.chain_model import BathSpec, ChainSpec
from src.services.errors import InvalidSpecError, ShapeError
from src.services.entanglement import (
    ScanOptions, concurrence, entanglement_of, negativity, partial_transpose, scan_entanglement_region,
    two_site_spec,
)
from src.services.liouvillian import assemble_liouvillian
from src.services.observables import bond_coherence
from src.services.steady_state import solve_steady_state

BELL = np.outer([0, 1, 1, 0], [0, 1, 1, 0]) / 2.0


def _random_state(rng, dim=4, rank=4):
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def _steady(spec):
    return solve_steady_state(assemble_liouvillian(spec))


def test_bell_state():
    assert negativity(BELL) == pytest.approx(0.5, abs=1e-12)
    assert concurrence(BELL) == pytest.approx(1.0, abs=1e-7)
    assert entanglement_of(BELL).entangled


def test_product_and_mixed_states():
    rng = np.random.default_rng(1)
    a, b = _random_state(rng, 2, 2), _random_state(rng, 2, 2)
    assert negativity(np.kron(a, b)) < 1e-12
    mixed = np.eye(4) / 4
    assert negativity(mixed) < 1e-12
    assert concurrence(mixed) == pytest.approx(0.0, abs=1e-12)
    assert not entanglement_of(mixed).entangled


def test_partial_transpose_of_product():
    rng = np.random.default_rng(2)
    a, b = _random_state(rng, 2, 2), _random_state(rng, 2, 2)
    np.testing.assert_allclose(partial_transpose(np.kron(a, b), [0]), np.kron(a.T, b), atol=1e-15)
    np.testing.assert_allclose(partial_transpose(np.kron(a, b), [1]), np.kron(a, b.T), atol=1e-15)


def test_invalid_arguments():
    with pytest.raises(InvalidSpecError):
        negativity(BELL, [])
    with pytest.raises(InvalidSpecError):
        negativity(BELL, [0, 1])
    with pytest.raises(InvalidSpecError):
        negativity(BELL, [2])
    with pytest.raises(ShapeError):
        concurrence(np.eye(8) / 8)
    with pytest.raises(ShapeError):
        negativity(np.eye(3) / 3)


def test_concurrence_and_negativity_agree_on_random_states():
    rng = np.random.default_rng(1234)
    entangled = 0
    for _ in range(1000):
        rho = _random_state(rng, rank=int(rng.integers(1, 5)))
        neg, conc = negativity(rho), concurrence(rho)
        # two qubits: C >= 2N, and C = 0 exactly when the partial transpose is positive
        assert conc >= 2 * neg - 1e-6
        if neg < 1e-12:
            assert conc < 1e-6
        entangled += neg > 1e-9
    assert 0 < entangled < 1000


@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
@hyp_settings(max_examples=30, deadline=None)
def test_negativity_is_invariant_under_local_unitaries(seed):
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.0, 1.0)
    rho = p * BELL + (1 - p) * _random_state(rng)
    u = np.kron(unitary_group.rvs(2, random_state=rng), unitary_group.rvs(2, random_state=rng))
    assert negativity(u @ rho @ u.conj().T) == pytest.approx(negativity(rho), abs=1e-10)


def test_steady_state_negativity_invariant_under_local_unitaries():
    rho = _steady(two_site_spec(0.4, 0.0, 0.05, 1.0))
    rng = np.random.default_rng(5)
    for _ in range(5):
        u = np.kron(unitary_group.rvs(2, random_state=rng), unitary_group.rvs(2, random_state=rng))
        assert negativity(u @ rho @ u.conj().T) == pytest.approx(negativity(rho), abs=1e-10)


@pytest.mark.parametrize("temperatures", [(1.0, 0.0), (5.0, 0.1), (0.3, 2.0), (10.0, 0.0)])
@pytest.mark.parametrize("coupling", [0.01, 0.3, 1.0, 10.0])
def test_equal_interaction_rates_never_entangle(temperatures, coupling):
    spec = ChainSpec.uniform(
        2, 1.0, coupling,
        BathSpec(interaction_rate=0.8, temperature=temperatures[0]),
        BathSpec(interaction_rate=0.8, temperature=temperatures[1]),
    )
    assert negativity(_steady(spec)) < 1e-10


def test_coherence_without_entanglement():
    rho = _steady(bench_spec(2))
    assert abs(bond_coherence(rho, 0, 2).imag) > 1e-3
    assert negativity(rho) < 1e-10


def test_two_site_spec_parameterization():
    spec = two_site_spec(0.25, 0.0, 1.0, 2.0)
    assert spec.derived("left") == pytest.approx((2.0, 0.25))
    assert spec.derived("right") == pytest.approx((2.0, 0.0))
    with pytest.raises(InvalidSpecError):
        two_site_spec(0.5, 0.0, 1.0, 1.0)


def test_equal_effective_rates_allow_entanglement():
    # strong gradient with weak coupling relative to the bath rate
    assert max(negativity(_steady(two_site_spec(0.4, 0.0, g, 1.0))) for g in (0.03, 0.1, 0.3)) > 1e-9


def test_region_scan_shape():
    s_values = [0.0, 0.2, 0.4]
    region = scan_entanglement_region(s_values, s_values, ScanOptions(points=9, refine_points=3))
    cells = {(c.s_left, c.s_right): c for c in region.cells}
    assert len(cells) == 9
    for s in s_values:
        assert not cells[(s, s)].entangled
    assert cells[(0.4, 0.0)].entangled
    assert cells[(0.0, 0.4)].entangled
    assert cells[(0.4, 0.0)].max_negativity == pytest.approx(cells[(0.0, 0.4)].max_negativity, rel=1e-6)
    assert all(0 <= c.s_left < 0.5 and 0 <= c.s_right < 0.5 for c in region.cells)
    assert (0.4, 0.0) in region.boundary
    rows = region.to_rows()
    assert set(rows[0]) == {"s_left", "s_right", "entangled", "max_negativity", "best_coupling", "best_gamma"}


def test_near_diagonal_cells_are_separable():
    region = scan_entanglement_region([0.3], [0.2], ScanOptions(points=9, refine_points=0))
    assert not region.cells[0].entangled


def test_random_equal_interaction_rate_chains_are_separable():
    rng = np.random.default_rng(200)
    for _ in range(200):
        rate = float(rng.uniform(0.1, 5.0))
        spec = ChainSpec.uniform(
            2, 1.0, float(10 ** rng.uniform(-2, 1)),
            BathSpec(interaction_rate=rate, temperature=float(rng.uniform(0.0, 10.0))),
            BathSpec(interaction_rate=rate, temperature=float(rng.uniform(0.0, 10.0))),
        )
        assert negativity(_steady(spec)) < 1e-9
