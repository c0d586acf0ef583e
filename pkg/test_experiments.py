"""
Tests cho experiments: sweeps, fits, disorder ensemble, entanglement region và CSV output.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from conftest import bench_spec
from src.services.experiments import (
    CSV_SCHEMA, DISORDER_COLUMNS, SWEEP_COLUMNS, SweepPlan, fit_sweep, read_csv, run_dephasing_sweep,
    run_disorder_ensemble, run_entanglement_region, run_plan, run_size_sweep, run_temperature_sweep, solve_report,
)
from src.services.errors import ConvergenceError, SamplingError, TransportError
from src.services.steady_state import SolverOptions


def _plan(tmp_path, **fields):
    fields.setdefault("base", bench_spec(2))
    fields.setdefault("max_workers", 1)
    return SweepPlan(output_dir=str(tmp_path), **fields)


def test_size_sweep_quantum_and_classical(tmp_path):
    plan = _plan(tmp_path, kind="size", sizes=(2, 3, 4, 5, 6), dephasing_rates=(0.0,),
                 classical_sizes=(64, 128, 256, 512, 1024), hop_rate=1.0)
    result = run_size_sweep(plan)
    frame = result.frame
    assert list(frame.columns) == SWEEP_COLUMNS
    assert result.n_failed == 0

    quantum = frame[frame["model"] == "quantum"]
    assert list(quantum["n_sites"]) == [2, 3, 4, 5, 6]
    np.testing.assert_allclose(quantum["heat_current"], 0.119365, atol=1e-6)
    np.testing.assert_allclose(quantum["heat_current"], quantum["reference_current"], rtol=1e-8)

    classical = frame[frame["model"] == "classical"]["heat_current"].to_numpy()
    ratios = classical[:-1] / classical[1:]
    assert np.all(np.abs(ratios - 2.0) < 0.1)


def test_strong_dephasing_current_decreases_with_size(tmp_path):
    result = run_size_sweep(_plan(tmp_path, kind="size", sizes=(2, 3, 4, 5), dephasing_rates=(5.0,)))
    currents = result.frame["heat_current"].to_numpy()
    assert np.all(np.diff(currents) < 0)
    assert result.frame["reference_current"].isna().all()


def test_solver_failures_are_recorded_per_row(tmp_path):
    plan = _plan(tmp_path, kind="size", sizes=(2, 3), dephasing_rates=(0.0,),
                 solver=SolverOptions(method="dense-nullspace", nullspace_tolerance=0.9))
    result = run_size_sweep(plan)
    assert result.n_failed == 2
    assert result.frame["error"].str.startswith("DegenerateNullspaceError").all()
    assert result.frame["heat_current"].isna().all()


def test_csv_is_reproducible_and_carries_header(tmp_path):
    plan = _plan(tmp_path, kind="size", sizes=(2, 3), dephasing_rates=(0.0, 0.5))
    first = run_size_sweep(plan).path.read_bytes()
    second = run_size_sweep(plan).path.read_bytes()
    assert first == second
    header = [line for line in first.decode().splitlines() if line.startswith("#")]
    assert header[0] == f"# schema: {CSV_SCHEMA}"
    assert any(line.startswith("# seed: ") for line in header)
    assert any(line.startswith("# plan: ") and '"dephasing_rates":[0.0,0.5]' in line for line in header)
    assert len(read_csv(plan.csv_path())) == 4


def test_temperature_sweep(tmp_path):
    temperatures = (0.0, 0.5, 1.0, 2.0, 50.0)
    plan = _plan(tmp_path, kind="temperature", temperatures=temperatures, temperature_sites=4,
                 dephasing_rates=(0.0,), classical_sizes=(4, 16), hop_rate=1.0)
    frame = run_temperature_sweep(plan).frame
    quantum = frame[frame["model"] == "quantum"]
    n = quantum["occupation_left"].to_numpy()
    expected = 2 * n / ((n + 1) * (2 * n + 5))
    np.testing.assert_allclose(quantum["heat_current"], expected, atol=1e-10)
    currents = quantum["heat_current"].to_numpy()
    assert abs(currents[0]) < 1e-10
    assert currents[-1] < 0.9 * currents.max()
    assert currents[-1] == pytest.approx(0.0189, abs=5e-4)

    classical = frame[(frame["model"] == "classical") & (frame["temperature_left"] == 0.0)]
    assert np.all(np.abs(classical["heat_current"]) < 1e-14)


def test_classical_temperature_saturation(tmp_path):
    plan = _plan(tmp_path, kind="temperature", temperatures=(100.0, 1000.0), dephasing_rates=(),
                 classical_sizes=(4,), hop_rate=1.0)
    hot, hotter = run_temperature_sweep(plan).frame["heat_current"]
    assert abs(hotter - hot) / hotter < 0.01


def test_dephasing_sweep_fits(tmp_path):
    result = run_dephasing_sweep(_plan(tmp_path, kind="dephasing", sizes=(2, 3, 4), dephasing_rates=(0.0, 2.0)))
    assert set(result.fits) == {0.0, 2.0}
    assert result.fits[0.0].alpha == pytest.approx(1.0, abs=1e-6)
    assert result.fits[2.0].alpha < 1.0
    fit_table = read_csv(result.extra_paths[0])
    assert list(fit_table["dephasing_rate"]) == [0.0, 2.0]
    assert set(fit_sweep(result.frame)) == {0.0, 2.0}


@pytest.mark.slow
def test_dephasing_recovers_fourier_law(tmp_path):
    result = run_dephasing_sweep(_plan(tmp_path, kind="dephasing", sizes=tuple(range(2, 9)), dephasing_rates=(5.0,)))
    # Bond resistance exceeds the contact resistance at γ = 5, so J falls
    # slightly faster than 1/N over N = 2..8 and α approaches 0 from below.
    assert result.fits[5.0].alpha == pytest.approx(-0.0269, abs=0.005)
    assert result.fits[5.0].r_squared > 0.999


def test_disorder_ensemble_small(tmp_path):
    base = bench_spec(3, dephasing_rate=1.0)
    plan = _plan(tmp_path, kind="disorder", base=base, samples=8, seed=7, min_draw=0.5)
    result = run_disorder_ensemble(plan)
    frame = result.frame
    assert list(frame.columns) == DISORDER_COLUMNS
    assert len(frame) == 8
    for energies, couplings in zip(frame["site_energies"], frame["couplings"]):
        assert len(energies.split(";")) == 3
        assert min(float(g) for g in couplings.split(";")) > 0.5
    assert result.summary["redraws"] > 0
    assert result.summary["seed"] == 7
    assert result.summary["dephasing_rate"] == 1.0
    assert 0.0 <= result.summary["fraction_reduced"] <= 1.0
    assert result.summary["n_reduced"] + result.summary["n_helped"] == 8

    again = run_disorder_ensemble(plan)
    assert again.path.read_bytes() == result.path.read_bytes()


@pytest.mark.slow
def test_disorder_ensemble_statistics(tmp_path):
    plan = _plan(tmp_path, kind="disorder", base=bench_spec(5, dephasing_rate=1.0), samples=1000, seed=2024)
    summary = run_disorder_ensemble(plan).summary
    assert 0.80 <= summary["fraction_reduced"] <= 0.93
    assert summary["helped_below_average"] is True


def test_entanglement_region_experiment(tmp_path):
    plan = SweepPlan(kind="entanglement-region", s_values=(0.0, 0.4), scan_points=5, refine_points=0, max_workers=1,
                     output_dir=str(tmp_path))
    result = run_plan(plan)
    frame = result.frame
    assert len(frame) == 4
    flags = {(a, b): e for a, b, e in zip(frame["s_left"], frame["s_right"], frame["entangled"])}
    assert flags[(0.4, 0.0)] == 1 and flags[(0.0, 0.4)] == 1
    assert flags[(0.0, 0.0)] == 0 and flags[(0.4, 0.4)] == 0
    assert result.extra_paths[0].exists()
    assert result.summary["entangled_cells"] == 2


@pytest.mark.parametrize("fields", [
    {"kind": "size"},
    {"kind": "temperature"},
    {"kind": "size", "sizes": (1, 2)},
    {"kind": "size", "classical_sizes": (4,)},
    {"kind": "disorder"},
    {"kind": "entanglement-region", "s_values": (0.5,)},
    {"kind": "disorder", "base": bench_spec(3, dephasing_rate=1.0), "min_draw": 1.0},
])
def test_invalid_plans(tmp_path, fields):
    with pytest.raises(ValidationError):
        _plan(tmp_path, **fields)


def test_plan_needs_base_chain(tmp_path):
    with pytest.raises(ValidationError):
        SweepPlan(kind="size", sizes=(2, 3), max_workers=1, output_dir=str(tmp_path))


def test_disorder_ensemble_keeps_failed_sample(tmp_path, monkeypatch):
    calls = {"n": 0}

    def flaky(spec, opts=None):
        calls["n"] += 1
        if calls["n"] == 1:
            raise ConvergenceError(1e-3)
        return solve_report(spec, opts)

    monkeypatch.setattr("src.services.experiments.solve_report", flaky)
    plan = _plan(tmp_path, kind="disorder", base=bench_spec(3, dephasing_rate=1.0), samples=4, seed=7, min_draw=0.5)
    result = run_disorder_ensemble(plan)
    frame = result.frame
    assert len(frame) == 4
    assert frame["error"].iloc[0].startswith("ConvergenceError")
    assert frame["error"].iloc[1:].fillna("").eq("").all()
    assert result.summary["failed"] == 1
    assert result.summary["n_reduced"] + result.summary["n_helped"] == 3


def test_disorder_ensemble_gives_up_after_max_redraws(tmp_path):
    plan = _plan(tmp_path, kind="disorder", base=bench_spec(3, dephasing_rate=1.0), samples=2, seed=1,
                 min_draw=0.999, max_redraws=50)
    with pytest.raises(SamplingError):
        run_disorder_ensemble(plan)


def test_classical_failure_keeps_row(tmp_path, monkeypatch):
    def singular(spec):
        raise TransportError("classical rate equations are singular")

    monkeypatch.setattr("src.services.experiments.solve_classical_steady_state", singular)
    plan = _plan(tmp_path, kind="size", sizes=(2,), dephasing_rates=(0.0,), classical_sizes=(4, 8), hop_rate=1.0)
    result = run_size_sweep(plan)
    classical = result.frame[result.frame["model"] == "classical"]
    assert len(classical) == 2
    assert classical["error"].str.startswith("TransportError").all()
    assert classical["heat_current"].isna().all()
    assert result.n_failed == 2
