"""
Experiments - Sweeps, Ensembles & CSV Output
============================================

Các experiment tái tạo kết quả transport:
- run_size_sweep: J theo N cho quantum (nhiều γ) và classical chain
- run_dephasing_sweep: size sweep + power-law fit cho từng γ
- run_temperature_sweep: J theo T_1 với T_N cố định
- run_disorder_ensemble: random ω_k, g_k ~ U[0,1], có/không dephasing
- run_entanglement_region: vùng entangled của N = 2 chain

Architecture:
- SweepPlan (pydantic) mô tả toàn bộ tham số, seed và output
- Sweep points chạy qua parallel_map, kết quả sắp theo input index
- Lỗi solver được ghi vào cột `error` của từng row, không dừng sweep
- Mỗi CSV có header comments: schema version, plan JSON, seed
- Cùng plan + seed cho ra CSV giống hệt byte-by-byte
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src import settings
from src.services.chain_model import BathSpec, ChainSpec
from src.services.classical import (
    ClassicalChainSpec, classical_current, classical_current_analytic, solve_classical_steady_state,
)
from src.services.entanglement import ScanOptions, scan_entanglement_region
from src.services.errors import DegenerateNullspaceError, InvalidSpecError, SamplingError, TransportError
from src.services.fitting import PowerLawFit, fit_power_law
from src.services.liouvillian import assemble_liouvillian
from src.services.observables import SteadyStateReport, extract_observables, heat_current_analytic
from src.services.parallel import parallel_map
from src.services.steady_state import SolverOptions, solve_steady_state

logger = logging.getLogger(__name__)

CSV_SCHEMA = "transport-sweep/1"

SWEEP_COLUMNS = [
    "model",
    "n_sites",
    "temperature_left",
    "temperature_right",
    "occupation_left",
    "occupation_right",
    "dephasing_rate",
    "hop_rate",
    "heat_current",
    "current_left",
    "current_right",
    "reference_current",
    "error",
]

DISORDER_COLUMNS = [
    "sample",
    "site_energies",
    "couplings",
    "current_coherent",
    "current_dephased",
    "reduced",
    "error",
]

FIT_COLUMNS = ["dephasing_rate", "alpha", "prefactor", "regression_coefficient", "n_points", "n_min", "n_max"]

REGION_COLUMNS = ["s_left", "s_right", "entangled", "max_negativity", "best_coupling", "best_gamma"]

ExperimentKind = Literal["size", "temperature", "dephasing", "disorder", "entanglement-region"]


class SweepPlan(BaseModel):
    """
    Kế hoạch cho một experiment

    Fields:
        kind: size | temperature | dephasing | disorder | entanglement-region
        base: ChainSpec gốc (ω, g, baths, γ)
        hop_rate: V của classical chain (None = bỏ classical rows)
        sizes: N cho quantum chain
        classical_sizes: N cho classical chain
        dephasing_rates: danh sách γ cho quantum curves
        temperatures: danh sách T_1 (temperature sweep)
        temperature_sites: N của quantum chain trong temperature sweep
        samples, seed, min_draw: disorder ensemble
        max_redraws: số lần draw lại tối đa trước khi bỏ ensemble
        s_values, scan_points, refine_points: entanglement scan
        output_dir, name: nơi ghi CSV
    """
    model_config = ConfigDict(frozen=True)

    kind: ExperimentKind
    base: ChainSpec | None = None
    hop_rate: float | None = Field(None, gt=0)
    sizes: tuple[int, ...] = ()
    classical_sizes: tuple[int, ...] = ()
    dephasing_rates: tuple[float, ...] = (0.0, 0.5, 5.0)
    temperatures: tuple[float, ...] = ()
    temperature_sites: int = Field(4, ge=2)
    samples: int = Field(1000, ge=1)
    seed: int = 0
    min_draw: float = Field(1e-3, ge=0, lt=1)
    max_redraws: int = Field(10_000, ge=0)
    s_values: tuple[float, ...] = ()
    scan_points: int = Field(25, ge=2)
    refine_points: int = Field(5, ge=0)
    solver: SolverOptions = Field(default_factory=SolverOptions)
    max_workers: int = Field(default_factory=lambda: settings.MAX_WORKERS, ge=1)
    output_dir: str = Field(default_factory=lambda: settings.OUTPUT_DIR)
    name: str | None = None

    @model_validator(mode="after")
    def _check_ranges(self) -> "SweepPlan":
        needs_base = self.kind != "entanglement-region"
        if needs_base and self.base is None:
            raise ValueError(f"{self.kind} experiment needs a base chain spec")
        if needs_base and (self.base.n_sites < 2 or self.base.bath_right is None):
            raise ValueError("base chain needs N >= 2 and two baths")
        if self.kind in ("size", "dephasing") and not (self.sizes or self.classical_sizes):
            raise ValueError("size sweep needs a non-empty size range")
        if self.kind == "dephasing" and not (self.sizes and self.dephasing_rates):
            raise ValueError("dephasing sweep needs quantum sizes and dephasing rates")
        if any(n < 2 for n in self.sizes + self.classical_sizes):
            raise ValueError("chain sizes must be >= 2")
        if self.kind == "temperature" and not self.temperatures:
            raise ValueError("temperature sweep needs a non-empty temperature range")
        if self.classical_sizes and self.hop_rate is None and self.kind in ("size", "temperature"):
            raise ValueError("classical rows need hop_rate")
        if self.kind == "disorder" and self.base.dephasing_rate <= 0:
            raise ValueError("disorder ensemble compares against base.dephasing_rate, which must be > 0")
        if self.kind == "entanglement-region":
            if not self.s_values:
                raise ValueError("entanglement scan needs s values")
            if any(not 0 <= s < 0.5 for s in self.s_values):
                raise ValueError("s values must lie in [0, 1/2)")
        return self

    @property
    def stem(self) -> str:
        return self.name or self.kind

    def csv_path(self, suffix: str = "") -> Path:
        return Path(self.output_dir) / f"{self.stem}{suffix}.csv"


@dataclass
class ExperimentResult:
    frame: pd.DataFrame
    path: Path
    fits: dict[float, PowerLawFit] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    extra_paths: list[Path] = field(default_factory=list)

    @property
    def n_failed(self) -> int:
        if "error" not in self.frame:
            return 0
        return int(self.frame["error"].fillna("").astype(bool).sum())


# --- helpers ---------------------------------------------------------------

def _bath_at(bath: BathSpec, temperature: float | None = None) -> BathSpec:
    """Fresh bath so that the occupation is re-resolved for a new site energy."""
    if temperature is not None:
        return BathSpec(interaction_rate=bath.interaction_rate, temperature=temperature)
    if bath.temperature is not None:
        return BathSpec(interaction_rate=bath.interaction_rate, temperature=bath.temperature)
    return BathSpec(interaction_rate=bath.interaction_rate, occupation=bath.occupation)


def _uniform_from(base: ChainSpec, n_sites: int, dephasing_rate: float,
                  temperature_left: float | None = None) -> ChainSpec:
    return ChainSpec.uniform(
        n_sites,
        base.site_energies[0],
        base.couplings[0],
        _bath_at(base.bath_left, temperature_left),
        _bath_at(base.bath_right),
        dephasing_rate,
    )


def solve_report(spec: ChainSpec, opts: SolverOptions | None = None) -> SteadyStateReport:
    rho = solve_steady_state(assemble_liouvillian(spec), opts)
    return extract_observables(rho, spec)


def _quantum_row(args: tuple[ChainSpec, SolverOptions]) -> dict:
    spec, opts = args
    row = {
        "model": "quantum",
        "n_sites": spec.n_sites,
        "temperature_left": spec.bath_left.temperature,
        "temperature_right": spec.bath_right.temperature,
        "occupation_left": spec.bath_left.occupation,
        "occupation_right": spec.bath_right.occupation,
        "dephasing_rate": spec.dephasing_rate,
        "hop_rate": None,
        "heat_current": None,
        "current_left": None,
        "current_right": None,
        "reference_current": None,
        "error": "",
    }
    if spec.dephasing_rate == 0 and spec.is_uniform:
        row["reference_current"] = heat_current_analytic(spec)
    try:
        report = solve_report(spec, opts)
    except TransportError as e:
        logger.warning("quantum point N=%d gamma=%g failed: %s", spec.n_sites, spec.dephasing_rate, e)
        row["error"] = f"{type(e).__name__}: {e}"
        return row
    row.update(heat_current=report.heat_current, current_left=report.current_left,
               current_right=report.current_right)
    return row


def _classical_row(spec: ClassicalChainSpec) -> dict:
    row = {
        "model": "classical",
        "n_sites": spec.n_sites,
        "temperature_left": spec.bath_left.temperature,
        "temperature_right": spec.bath_right.temperature,
        "occupation_left": spec.bath_left.occupation,
        "occupation_right": spec.bath_right.occupation,
        "dephasing_rate": None,
        "hop_rate": spec.hop_rate,
        "heat_current": None,
        "current_left": None,
        "current_right": None,
        "reference_current": None,
        "error": "",
    }
    try:
        profile = solve_classical_steady_state(spec)
        current = classical_current(profile, spec)
        reference = classical_current_analytic(spec)
    except TransportError as e:
        logger.warning("classical point N=%d failed: %s", spec.n_sites, e)
        row["error"] = f"{type(e).__name__}: {e}"
        return row
    row.update(heat_current=current, current_left=current, current_right=-current, reference_current=reference)
    return row


def _classical_from(base: ChainSpec, n_sites: int, hop_rate: float,
                    temperature_left: float | None = None) -> ClassicalChainSpec:
    return ClassicalChainSpec(
        n_sites=n_sites,
        hop_rate=hop_rate,
        bath_left=_bath_at(base.bath_left, temperature_left),
        bath_right=_bath_at(base.bath_right),
        omega=base.site_energies[0],
    )


def write_csv(frame: pd.DataFrame, path: Path, header: dict) -> Path:
    """
    Ghi DataFrame kèm header comments '# key: value'

    Float format cố định để output reproducible.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        for key, value in header.items():
            f.write(f"# {key}: {value}\n")
        frame.to_csv(f, index=False, float_format="%.12g", lineterminator="\n")
    logger.info("Wrote %d rows to %s", len(frame), path)
    return path


def read_csv(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def _header(plan: SweepPlan, **extra) -> dict:
    header = {"schema": CSV_SCHEMA, "kind": plan.kind, "seed": plan.seed, "plan": plan.model_dump_json()}
    header.update(extra)
    return header


# --- experiments -----------------------------------------------------------

def _size_rows(plan: SweepPlan) -> list[dict]:
    tasks = [(_uniform_from(plan.base, n, gamma), plan.solver)
             for gamma in plan.dephasing_rates for n in plan.sizes]
    rows = parallel_map(_quantum_row, tasks, plan.max_workers)
    if plan.hop_rate is not None:
        rows += [_classical_row(_classical_from(plan.base, n, plan.hop_rate)) for n in plan.classical_sizes]
    return rows


def run_size_sweep(plan: SweepPlan) -> ExperimentResult:
    """
    Heat current theo chain size

    Workflow:
    1. Quantum rows cho mỗi γ trong plan.dephasing_rates × plan.sizes
    2. Classical rows cho plan.classical_sizes (nếu có hop_rate)
    3. Ghi một CSV chung schema

    Returns:
        ExperimentResult với DataFrame theo SWEEP_COLUMNS
    """
    frame = pd.DataFrame(_size_rows(plan), columns=SWEEP_COLUMNS)
    path = write_csv(frame, plan.csv_path(), _header(plan))
    result = ExperimentResult(frame=frame, path=path)
    logger.info("Size sweep: %d rows, %d failed", len(frame), result.n_failed)
    return result


def fit_sweep(frame: pd.DataFrame, model: str = "quantum") -> dict[float, PowerLawFit]:
    """Power-law fit per dephasing rate (quantum) or one fit (classical, key 0.0)."""
    fits: dict[float, PowerLawFit] = {}
    ok = frame[(frame["model"] == model) & (frame["error"].fillna("") == "")]
    groups = ok.groupby("dephasing_rate") if model == "quantum" else [(0.0, ok)]
    for gamma, group in groups:
        points = list(zip(group["n_sites"], group["heat_current"]))
        try:
            fits[float(gamma)] = fit_power_law(points)
        except TransportError as e:
            logger.warning("no fit for %s gamma=%s: %s", model, gamma, e)
    return fits


def run_dephasing_sweep(plan: SweepPlan) -> ExperimentResult:
    """
    Ballistic-to-diffusive transition: size sweep cho từng γ rồi fit power law

    Ghi hai file: <stem>.csv (rows) và <stem>_fits.csv (α, c, R cho từng γ).
    """
    frame = pd.DataFrame(_size_rows(plan), columns=SWEEP_COLUMNS)
    fits = fit_sweep(frame)
    fit_frame = pd.DataFrame(
        [
            {
                "dephasing_rate": gamma,
                "alpha": fit.alpha,
                "prefactor": fit.prefactor,
                "regression_coefficient": fit.regression_coefficient,
                "n_points": fit.n_points,
                "n_min": min(plan.sizes),
                "n_max": max(plan.sizes),
            }
            for gamma, fit in fits.items()
        ],
        columns=FIT_COLUMNS,
    )
    path = write_csv(frame, plan.csv_path(), _header(plan))
    fit_path = write_csv(fit_frame, plan.csv_path("_fits"), _header(plan))
    for gamma, fit in fits.items():
        logger.info("gamma=%g: alpha=%.4f R=%.7f (N=%d..%d)", gamma, fit.alpha, fit.regression_coefficient,
                    min(plan.sizes), max(plan.sizes))
    return ExperimentResult(frame=frame, path=path, fits=fits, extra_paths=[fit_path])


def run_temperature_sweep(plan: SweepPlan) -> ExperimentResult:
    """
    Heat current theo T_1 với T_N cố định

    Classical rows cho mỗi N trong classical_sizes, quantum rows ở
    N = temperature_sites cho mỗi γ trong dephasing_rates.
    """
    tasks = [(_uniform_from(plan.base, plan.temperature_sites, gamma, temperature_left=t), plan.solver)
             for gamma in plan.dephasing_rates for t in plan.temperatures]
    rows = parallel_map(_quantum_row, tasks, plan.max_workers)
    if plan.hop_rate is not None:
        rows += [
            _classical_row(_classical_from(plan.base, n, plan.hop_rate, temperature_left=t))
            for n in plan.classical_sizes for t in plan.temperatures
        ]
    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    path = write_csv(frame, plan.csv_path(), _header(plan))
    return ExperimentResult(frame=frame, path=path)


def _draw_sample(rng: np.random.Generator, n_sites: int, min_draw: float,
                 max_redraws: int) -> tuple[np.ndarray, np.ndarray, int]:
    for redraws in range(max_redraws + 1):
        energies = rng.uniform(0.0, 1.0, n_sites)
        couplings = rng.uniform(0.0, 1.0, n_sites - 1)
        if couplings.min() > min_draw and min(energies[0], energies[-1]) > min_draw:
            return energies, couplings, redraws
    raise SamplingError(f"no admissible sample with min_draw={min_draw} after {max_redraws} re-draws")


def _disorder_pair(args: tuple[ChainSpec, SolverOptions]) -> tuple[float | None, float | None, str] | None:
    """(J không dephasing, J dephased, error); None nghĩa là sample degenerate, cần draw lại."""
    spec, opts = args
    coherent = spec.model_copy(update={"dephasing_rate": 0.0})
    try:
        return solve_report(coherent, opts).heat_current, solve_report(spec, opts).heat_current, ""
    except DegenerateNullspaceError:
        return None
    except TransportError as e:
        logger.warning("disorder sample failed: %s", e)
        return None, None, f"{type(e).__name__}: {e}"


def run_disorder_ensemble(plan: SweepPlan) -> ExperimentResult:
    """
    Disorder ensemble: ω_k, g_k ~ Uniform[0,1] i.i.d.

    Workflow:
    1. Draw samples tuần tự từ default_rng(seed); sample gần ngắt chain được draw lại
    2. Solve song song J không dephasing và J với γ = base.dephasing_rate
    3. Sample degenerate (null space > 1) được draw lại, ghi log
    4. Sample lỗi solver khác giữ row với cột `error`, không tính vào summary
    5. Summary: tỉ lệ dephasing làm giảm J, kiểm tra below-average cho các sample được lợi

    Returns:
        ExperimentResult với rows theo DISORDER_COLUMNS và summary dict

    Raises:
        SamplingError: tổng số lần draw lại vượt plan.max_redraws
    """
    base = plan.base
    n = base.n_sites
    rng = np.random.default_rng(plan.seed)
    accepted: list[tuple[np.ndarray, np.ndarray, float | None, float | None, str]] = []
    redraws = 0
    while len(accepted) < plan.samples:
        batch = []
        for _ in range(plan.samples - len(accepted)):
            energies, couplings, skipped = _draw_sample(rng, n, plan.min_draw, plan.max_redraws - redraws)
            redraws += skipped
            spec = ChainSpec(
                n_sites=n,
                site_energies=tuple(float(e) for e in energies),
                couplings=tuple(float(g) for g in couplings),
                bath_left=_bath_at(base.bath_left),
                bath_right=_bath_at(base.bath_right),
                dephasing_rate=base.dephasing_rate,
            )
            batch.append((energies, couplings, spec))
        results = parallel_map(_disorder_pair, [(spec, plan.solver) for *_, spec in batch], plan.max_workers)
        for (energies, couplings, _), outcome in zip(batch, results):
            if outcome is None:
                redraws += 1
                continue
            accepted.append((energies, couplings, *outcome))
        if redraws > plan.max_redraws:
            raise SamplingError(f"disorder ensemble exceeded {plan.max_redraws} re-draws")
    if redraws:
        logger.warning("Disorder ensemble: re-drew %d samples", redraws)

    frame = pd.DataFrame(
        [
            {
                "sample": i,
                "site_energies": ";".join(f"{e:.12g}" for e in energies),
                "couplings": ";".join(f"{g:.12g}" for g in couplings),
                "current_coherent": j0,
                "current_dephased": j1,
                "reduced": None if error else int(j1 < j0),
                "error": error,
            }
            for i, (energies, couplings, j0, j1, error) in enumerate(accepted)
        ],
        columns=DISORDER_COLUMNS,
    )
    summary = summarize_disorder(frame)
    summary.update(redraws=redraws, seed=plan.seed, dephasing_rate=base.dephasing_rate, samples=plan.samples)
    path = write_csv(frame, plan.csv_path(), _header(plan, summary=json.dumps(summary, sort_keys=True)))
    logger.info("Disorder ensemble: dephasing reduced J in %d of %d samples (%d failed)",
                summary["n_reduced"], len(frame), summary["failed"])
    return ExperimentResult(frame=frame, path=path, summary=summary)


def summarize_disorder(frame: pd.DataFrame) -> dict:
    """Fraction reduced và kiểm tra 'helped samples có J dưới trung bình'."""
    if "error" in frame:
        ok = frame[frame["error"].fillna("") == ""]
    else:
        ok = frame
    reduced = ok["reduced"].astype(bool)
    helped = ok[~reduced]
    mean_all = float(ok["current_coherent"].mean()) if len(ok) else None
    mean_helped = float(helped["current_coherent"].mean()) if len(helped) else None
    return {
        "n_reduced": int(reduced.sum()),
        "fraction_reduced": float(reduced.mean()) if len(ok) else None,
        "n_helped": int(len(helped)),
        "failed": int(len(frame) - len(ok)),
        "mean_current_coherent": mean_all,
        "mean_current_coherent_helped": mean_helped,
        "helped_below_average": None if mean_helped is None else bool(mean_helped < mean_all),
    }


def run_entanglement_region(plan: SweepPlan) -> ExperimentResult:
    """
    Scan vùng entanglement của N = 2 chain trên grid s_values × s_values

    Ghi <stem>.csv (cells) và <stem>_boundary.csv (boundary estimate).
    """
    opts = ScanOptions(points=plan.scan_points, refine_points=plan.refine_points, max_workers=plan.max_workers)
    region = scan_entanglement_region(plan.s_values, plan.s_values, opts)
    frame = pd.DataFrame(region.to_rows(), columns=REGION_COLUMNS)
    boundary = pd.DataFrame(region.boundary, columns=["s_left", "s_right"])
    path = write_csv(frame, plan.csv_path(), _header(plan))
    boundary_path = write_csv(boundary, plan.csv_path("_boundary"), _header(plan))
    summary = {"entangled_cells": int(frame["entangled"].sum()), "cells": len(frame)}
    return ExperimentResult(frame=frame, path=path, summary=summary, extra_paths=[boundary_path])


RUNNERS = {
    "size": run_size_sweep,
    "dephasing": run_dephasing_sweep,
    "temperature": run_temperature_sweep,
    "disorder": run_disorder_ensemble,
    "entanglement-region": run_entanglement_region,
}


def run_plan(plan: SweepPlan) -> ExperimentResult:
    try:
        runner = RUNNERS[plan.kind]
    except KeyError as e:
        raise InvalidSpecError(f"unknown experiment kind {plan.kind!r}") from e
    return runner(plan)
