"""
Tests cho Liouvillian engine: vectorization, trace preservation, sector structure.
"""

import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given, settings as hyp_settings, strategies as st

from conftest import bench_spec
from src.services.chain_model import BathSpec, ChainSpec, excitation_count
from src.services.errors import ShapeError
from src.services.liouvillian import (
    apply_liouvillian, assemble_liouvillian, devectorize, dump_superoperator, trace_functional, vectorize,
)


def _random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return a + a.conj().T


def _spec_with_everything(n_sites):
    bath_hot = BathSpec(interaction_rate=0.7, temperature=2.0)
    bath_cold = BathSpec(interaction_rate=1.3, temperature=0.5)
    return ChainSpec.uniform(n_sites, 1.0, 0.8, bath_hot, bath_cold, dephasing_rate=0.4)


def test_vectorize_identity_is_column_stacked():
    np.testing.assert_array_equal(vectorize(np.eye(2)), [1, 0, 0, 1])
    np.testing.assert_array_equal(vectorize(np.array([[1, 2], [3, 4]])), [1, 3, 2, 4])


def test_vectorize_round_trip():
    rho = _random_hermitian(np.random.default_rng(0), 4)
    np.testing.assert_array_equal(devectorize(vectorize(rho)), rho)


def test_vectorize_shape_errors():
    with pytest.raises(ShapeError):
        vectorize(np.zeros((3, 3)))
    with pytest.raises(ShapeError):
        vectorize(np.zeros((2, 4)))
    with pytest.raises(ShapeError):
        devectorize(np.zeros(8))


@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
@hyp_settings(max_examples=50, deadline=None)
def test_kronecker_identity(seed):
    rng = np.random.default_rng(seed)
    a, b, rho = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
    np.testing.assert_allclose(vectorize(a @ rho @ b), np.kron(b.T, a) @ vectorize(rho), atol=1e-12)


def test_single_site_decay():
    spec = ChainSpec(n_sites=1, site_energies=(1.0,), bath_left=BathSpec(interaction_rate=1.0, occupation=0.0))
    liouvillian = assemble_liouvillian(spec)
    p = 0.3
    np.testing.assert_allclose(apply_liouvillian(liouvillian, np.diag([p, 1 - p])), np.diag([-p, p]), atol=1e-15)
    late = la.expm(liouvillian.toarray() * 50.0) @ vectorize(np.diag([1.0, 0.0]).astype(complex))
    np.testing.assert_allclose(devectorize(late), np.diag([0.0, 1.0]), atol=1e-12)


@pytest.mark.parametrize("n_sites", [1, 2, 3, 4])
def test_trace_preservation(n_sites):
    liouvillian = assemble_liouvillian(_spec_with_everything(n_sites) if n_sites > 1 else bench_spec(1))
    row = trace_functional(2 ** n_sites)
    left = liouvillian.T @ row
    assert np.abs(left).max() < 1e-12 * max(1.0, abs(liouvillian).max())


@pytest.mark.parametrize("n_sites", [2, 3])
def test_diagonal_has_non_positive_real_part(n_sites):
    assert assemble_liouvillian(_spec_with_everything(n_sites)).diagonal().real.max() <= 1e-14


def test_two_site_null_space_is_one_dimensional():
    s = la.svdvals(assemble_liouvillian(bench_spec(2)).toarray())
    assert int((s < 1e-10 * s[0]).sum()) == 1


@pytest.mark.parametrize("n_sites", [2, 3])
def test_excitation_sector_structure(n_sites):
    # coherent terms keep (left, right) excitation counts; bath jumps move both by one
    liouvillian = assemble_liouvillian(_spec_with_everything(n_sites)).tocoo()
    dim = 2 ** n_sites
    counts = np.array([excitation_count(i, n_sites) for i in range(dim)])
    allowed = {(0, 0), (1, 1), (-1, -1)}
    for i, j in zip(liouvillian.row, liouvillian.col):
        shift = (counts[i % dim] - counts[j % dim], counts[i // dim] - counts[j // dim])
        assert shift in allowed


@pytest.mark.parametrize("n_sites", [2, 3, 4, 5, 6])
def test_nonzeros_grow_like_n_times_dimension(n_sites):
    liouvillian = assemble_liouvillian(_spec_with_everything(n_sites))
    assert liouvillian.nnz <= 4 * n_sites * 4 ** n_sites


def test_apply_preserves_trace_and_hermiticity():
    liouvillian = assemble_liouvillian(_spec_with_everything(3))
    rng = np.random.default_rng(7)
    for _ in range(5):
        out = apply_liouvillian(liouvillian, _random_hermitian(rng, 8))
        assert abs(np.trace(out)) < 1e-12
        assert np.abs(out - out.conj().T).max() < 1e-12


def test_apply_shape_mismatch():
    with pytest.raises(ShapeError):
        apply_liouvillian(assemble_liouvillian(bench_spec(2)), np.eye(8))


def test_dump_superoperator(tmp_path):
    liouvillian = assemble_liouvillian(bench_spec(2))
    path = dump_superoperator(liouvillian, tmp_path / "L.txt")
    lines = path.read_text().splitlines()
    assert lines[0] == f"# dim 16 nnz {liouvillian.nnz}"
    assert len(lines) == liouvillian.nnz + 1
    row, col, re, im = lines[1].split()
    assert complex(float(re), float(im)) == liouvillian[int(row), int(col)]
