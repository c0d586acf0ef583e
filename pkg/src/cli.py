"""
Chain Transport - Command-line Driver
=====================================

Chạy các experiment từ command line:
- size-sweep, temp-sweep, dephasing-sweep: sweeps ghi CSV + plot script
- disorder: random ensemble, in summary
- entangle-region: vùng entanglement của N = 2 chain
- fit: power-law fit trên một size-sweep CSV
- solve: giải một chain và in report
- plot: sinh lại plot script cho một CSV

Architecture:
- Tham số vật lý đến từ config file (--config, KEY=value) và/hoặc flags;
  flags thắng config. Thiếu tham số vật lý là lỗi, không có default ẩn
- Mỗi experiment được ghi vào run ledger (results_store)
- TransportError -> exit code 2 với thông báo lỗi
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np
from pydantic import ValidationError

from src import settings
from src.graph.build import run_pipeline
from src.services.chain_config import chain_spec_from_mapping, read_config
from src.services.errors import InvalidSpecError, TransportError
from src.services.experiments import SweepPlan, fit_sweep, read_csv, run_plan
from src.services.liouvillian import dump_superoperator
from src.services.plot_scripts import PLOT_KINDS, emit_plot_script
from src.services.results_store import log_run
from src.services.steady_state import SolverOptions, export_density_matrix

logger = logging.getLogger(__name__)

# flag dest -> config key
_PHYSICS_FLAGS = {
    "n_sites": "N_SITES",
    "omega": "OMEGA",
    "site_energies": "SITE_ENERGIES",
    "coupling": "COUPLING",
    "couplings": "COUPLINGS",
    "rate_left": "RATE_LEFT",
    "temperature_left": "TEMPERATURE_LEFT",
    "occupation_left": "OCCUPATION_LEFT",
    "rate_right": "RATE_RIGHT",
    "temperature_right": "TEMPERATURE_RIGHT",
    "occupation_right": "OCCUPATION_RIGHT",
    "dephasing_rate": "DEPHASING_RATE",
    "hop_rate": "HOP_RATE",
}

# Subcommand -> SweepPlan.kind
_KINDS = {
    "size-sweep": "size",
    "temp-sweep": "temperature",
    "dephasing-sweep": "dephasing",
    "disorder": "disorder",
    "entangle-region": "entanglement-region",
}


def parse_list(text: str | None, cast=float) -> tuple:
    """'1,2,5' -> (1, 2, 5); 'a:b' (integers) -> a..b inclusive."""
    if text is None or text == "":
        return ()
    if ":" in text:
        lo, hi = (int(x) for x in text.split(":"))
        return tuple(cast(n) for n in range(lo, hi + 1))
    try:
        return tuple(cast(x) for x in text.split(",") if x.strip())
    except ValueError as e:
        raise InvalidSpecError(f"cannot parse list {text!r}") from e


def _add_physics_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("chain parameters (override --config)")
    g.add_argument("--config", help="KEY=value chain config file")
    g.add_argument("--n-sites", dest="n_sites")
    g.add_argument("--omega")
    g.add_argument("--site-energies", help="comma-separated ω_k")
    g.add_argument("--coupling")
    g.add_argument("--couplings", help="comma-separated g_k")
    g.add_argument("--rate-left", help="Γ_1")
    g.add_argument("--temperature-left")
    g.add_argument("--occupation-left")
    g.add_argument("--rate-right", help="Γ_N")
    g.add_argument("--temperature-right")
    g.add_argument("--occupation-right")
    g.add_argument("--dephasing-rate")
    g.add_argument("--hop-rate", help="V of the classical comparator")


def _add_run_flags(p: argparse.ArgumentParser, seed: bool = False) -> None:
    p.add_argument("--output-dir", default=settings.OUTPUT_DIR)
    p.add_argument("--name", help="output file stem (default: experiment kind)")
    p.add_argument("--max-workers", type=int, default=settings.MAX_WORKERS)
    p.add_argument("--solver", default="auto",
                   choices=["auto", "dense-nullspace", "sparse-direct", "sparse-shifted-iteration"])
    p.add_argument("--no-plot", action="store_true", help="skip the plot script")
    if seed:
        p.add_argument("--seed", type=int, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chain-transport", description="Steady-state heat transport in spin chains")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("size-sweep", help="heat current vs N")
    _add_physics_flags(p)
    _add_run_flags(p)
    p.add_argument("--sizes", default="2:8", help="quantum N values, e.g. 2:8 or 2,4,6")
    p.add_argument("--classical-sizes", help="classical N values (needs HOP_RATE)")
    p.add_argument("--dephasing-rates", default="0,0.5,5")

    p = sub.add_parser("dephasing-sweep", help="size sweep per γ with power-law fits")
    _add_physics_flags(p)
    _add_run_flags(p)
    p.add_argument("--sizes", default="2:8")
    p.add_argument("--dephasing-rates", default="0,0.5,5")

    p = sub.add_parser("temp-sweep", help="heat current vs T_1")
    _add_physics_flags(p)
    _add_run_flags(p)
    p.add_argument("--temperatures", required=True, help="comma-separated T_1 values")
    p.add_argument("--classical-sizes", help="classical N values (needs HOP_RATE)")
    p.add_argument("--quantum-sites", type=int, default=4)
    p.add_argument("--dephasing-rates", default="0,0.5,5")

    p = sub.add_parser("disorder", help="random ω_k, g_k ensemble")
    _add_physics_flags(p)
    _add_run_flags(p, seed=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--min-draw", type=float, default=1e-3, help="re-draw samples with g_k or terminal ω below this")
    p.add_argument("--max-redraws", type=int, default=10_000, help="give up after this many re-drawn samples")

    p = sub.add_parser("entangle-region", help="entanglement region of the N=2 chain")
    _add_run_flags(p)
    p.add_argument("--s-max", type=float, default=0.45)
    p.add_argument("--s-points", type=int, default=10)
    p.add_argument("--scan-points", type=int, default=25)
    p.add_argument("--refine-points", type=int, default=5)

    p = sub.add_parser("fit", help="power-law fit of a size-sweep CSV")
    p.add_argument("csv")
    p.add_argument("--model", choices=["quantum", "classical"], default="quantum")

    p = sub.add_parser("solve", help="solve one chain and print the report")
    _add_physics_flags(p)
    p.add_argument("--solver", default="auto",
                   choices=["auto", "dense-nullspace", "sparse-direct", "sparse-shifted-iteration"])
    p.add_argument("--export-rho", help="write the density matrix to this file")
    p.add_argument("--dump-liouvillian", help="write the Liouvillian triplets to this file")

    p = sub.add_parser("plot", help="write a plot script for a CSV")
    p.add_argument("csv")
    p.add_argument("--kind", required=True, choices=sorted(PLOT_KINDS))
    return parser


def chain_mapping(args: argparse.Namespace) -> dict[str, str]:
    """Config file values overridden by explicit flags."""
    mapping = read_config(args.config) if getattr(args, "config", None) else {}
    for dest, key in _PHYSICS_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            mapping[key] = str(value)
    return mapping


def _hop_rate(mapping: dict[str, str]) -> float | None:
    value = mapping.get("HOP_RATE")
    try:
        return None if value is None else float(value)
    except ValueError as e:
        raise InvalidSpecError(f"HOP_RATE: cannot parse {value!r}") from e


def plan_from_args(args: argparse.Namespace) -> SweepPlan:
    """
    SweepPlan từ parsed arguments

    N_SITES được lấy từ size range khi N là biến được sweep; với disorder,
    ω_k và g_k được draw ngẫu nhiên nên OMEGA/COUPLING của base không dùng.

    Raises:
        InvalidSpecError: thiếu tham số vật lý hoặc plan không hợp lệ
    """
    kind = _KINDS[args.command]
    fields: dict = {
        "kind": kind,
        "output_dir": args.output_dir,
        "name": args.name,
        "max_workers": args.max_workers,
        "solver": SolverOptions(method=args.solver),
    }
    if kind == "entanglement-region":
        fields.update(
            s_values=tuple(float(s) for s in np.linspace(0.0, args.s_max, args.s_points)),
            scan_points=args.scan_points,
            refine_points=args.refine_points,
        )
    else:
        mapping = chain_mapping(args)
        if kind in ("size", "dephasing"):
            sizes = parse_list(args.sizes, int)
            mapping.setdefault("N_SITES", str(max(2, min(sizes, default=2))))
            fields.update(sizes=sizes, dephasing_rates=parse_list(args.dephasing_rates))
        if kind == "size":
            fields["classical_sizes"] = parse_list(args.classical_sizes, int)
        if kind == "temperature":
            mapping.setdefault("N_SITES", str(args.quantum_sites))
            mapping.setdefault("TEMPERATURE_LEFT", str(parse_list(args.temperatures)[0]))
            fields.update(
                temperatures=parse_list(args.temperatures),
                classical_sizes=parse_list(args.classical_sizes, int),
                temperature_sites=args.quantum_sites,
                dephasing_rates=parse_list(args.dephasing_rates),
            )
        if kind in ("size", "dephasing", "temperature"):
            # swept dephasing rates replace the base value
            mapping.setdefault("DEPHASING_RATE", "0")
        if kind == "disorder":
            n_sites = int(mapping.setdefault("N_SITES", "5"))
            mapping.setdefault("OMEGA", "1")
            mapping.setdefault("COUPLING", "1")
            fields.update(samples=args.samples, seed=args.seed, min_draw=args.min_draw, max_redraws=args.max_redraws)
            logger.info("Disorder ensemble on N=%d, dephasing rate %s", n_sites, mapping.get("DEPHASING_RATE"))
        fields["base"] = chain_spec_from_mapping(mapping)
        fields["hop_rate"] = _hop_rate(mapping)
    try:
        return SweepPlan(**fields)
    except ValidationError as e:
        raise InvalidSpecError(str(e)) from e


def run_experiment(args: argparse.Namespace) -> dict:
    """
    Chạy experiment, ghi plot script và ledger

    Returns:
        Dict tóm tắt (csv path, số rows, fits hoặc summary)
    """
    plan = plan_from_args(args)
    result = run_plan(plan)
    out = {"kind": plan.kind, "csv": str(result.path), "rows": len(result.frame), "failed": result.n_failed}
    if not args.no_plot:
        out["plot_script"] = str(emit_plot_script(result.path, plan.kind))
    if result.fits:
        out["fits"] = {str(g): {"alpha": f.alpha, "prefactor": f.prefactor, "R": f.regression_coefficient}
                       for g, f in result.fits.items()}
    if result.summary:
        out["summary"] = result.summary
    out["run_id"] = log_run(
        plan.kind,
        json.loads(plan.model_dump_json()),
        csv_path=str(result.path),
        seed=plan.seed,
        n_rows=len(result.frame),
        n_failed=result.n_failed,
    )
    return out


def run_fit(args: argparse.Namespace) -> dict:
    fits = fit_sweep(read_csv(args.csv), args.model)
    if not fits:
        raise InvalidSpecError(f"no {args.model} series with enough points in {args.csv}")
    return {str(g): {"alpha": f.alpha, "prefactor": f.prefactor, "R": f.regression_coefficient,
                     "n_points": f.n_points} for g, f in fits.items()}


def run_solve(args: argparse.Namespace) -> dict:
    spec = chain_spec_from_mapping(chain_mapping(args))
    state = run_pipeline(spec, SolverOptions(method=args.solver))
    if state.get("error"):
        raise TransportError(state["error"])
    if args.export_rho:
        export_density_matrix(state["rho"], args.export_rho)
    if args.dump_liouvillian:
        dump_superoperator(state["liouvillian"], args.dump_liouvillian)
    return {"report": state["report"].to_dict(), "checks": state.get("checks", {})}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper())
    try:
        if args.command in _KINDS:
            out = run_experiment(args)
        elif args.command == "fit":
            out = run_fit(args)
        elif args.command == "solve":
            out = run_solve(args)
        else:
            out = {"plot_script": str(emit_plot_script(Path(args.csv), args.kind))}
    except TransportError as e:
        logger.error("%s failed: %s", args.command, e)
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(json.dumps(out, indent=2, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
