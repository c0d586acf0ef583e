"""
Chain Config - Plain-text ChainSpec Format
==========================================

Đọc/ghi ChainSpec dưới dạng file KEY=value (cùng cú pháp với .env):

    N_SITES=4
    OMEGA=1                      # hoặc SITE_ENERGIES=1,1,1,1
    COUPLING=1                   # hoặc COUPLINGS=1,1,1
    RATE_LEFT=1
    TEMPERATURE_LEFT=1           # hoặc OCCUPATION_LEFT=0.58
    RATE_RIGHT=1
    TEMPERATURE_RIGHT=0
    DEPHASING_RATE=0

Architecture:
- Parse bằng python-dotenv (dotenv_values), không tự viết parser
- Không có default cho tham số vật lý: thiếu key là lỗi
- pydantic ValidationError được đổi thành InvalidSpecError
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Mapping

from dotenv import dotenv_values
from pydantic import ValidationError

from src.services.chain_model import BathSpec, ChainSpec
from src.services.errors import InvalidSpecError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def read_config(path: str | Path) -> dict[str, str]:
    """Read a KEY=value file; keys are upper-cased, empty values dropped."""
    path = Path(path)
    if not path.exists():
        raise InvalidSpecError(f"config file not found: {path}")
    raw = dotenv_values(path)
    return {k.upper(): v for k, v in raw.items() if v not in (None, "")}


def _floats(text: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as e:
        raise InvalidSpecError(f"{key}: cannot parse {text!r}") from e


def _float(mapping: Mapping[str, str], key: str) -> float | None:
    value = mapping.get(key)
    if value is None:
        return None
    try:
        return float(value)
    except ValueError as e:
        raise InvalidSpecError(f"{key}: cannot parse {value!r}") from e


def _require(value, key: str):
    if value is None:
        raise InvalidSpecError(f"missing required parameter {key}")
    return value


def _bath_from_mapping(mapping: Mapping[str, str], suffix: str) -> BathSpec:
    rate = _require(_float(mapping, f"RATE_{suffix}"), f"RATE_{suffix}")
    temperature = _float(mapping, f"TEMPERATURE_{suffix}")
    occupation = _float(mapping, f"OCCUPATION_{suffix}")
    if temperature is None and occupation is None:
        raise InvalidSpecError(f"missing TEMPERATURE_{suffix} or OCCUPATION_{suffix}")
    return BathSpec(interaction_rate=rate, temperature=temperature, occupation=occupation)


def chain_spec_from_mapping(mapping: Mapping[str, str]) -> ChainSpec:
    """
    Build ChainSpec từ mapping KEY -> string (config file hoặc CLI flags)

    Raises:
        InvalidSpecError: thiếu key bắt buộc hoặc giá trị không hợp lệ
    """
    mapping = {k.upper(): v for k, v in mapping.items() if v is not None}
    try:
        n_sites = int(_require(mapping.get("N_SITES"), "N_SITES"))
    except ValueError as e:
        raise InvalidSpecError(f"N_SITES: cannot parse {mapping.get('N_SITES')!r}") from e

    if "SITE_ENERGIES" in mapping:
        energies = _floats(mapping["SITE_ENERGIES"], "SITE_ENERGIES")
    else:
        energies = (_require(_float(mapping, "OMEGA"), "OMEGA or SITE_ENERGIES"),) * n_sites

    if "COUPLINGS" in mapping:
        couplings = _floats(mapping["COUPLINGS"], "COUPLINGS")
    elif n_sites >= 2:
        couplings = (_require(_float(mapping, "COUPLING"), "COUPLING or COUPLINGS"),) * (n_sites - 1)
    else:
        couplings = ()

    dephasing = _require(_float(mapping, "DEPHASING_RATE"), "DEPHASING_RATE")
    try:
        bath_left = _bath_from_mapping(mapping, "LEFT")
        has_right = any(k.endswith("_RIGHT") for k in mapping)
        bath_right = _bath_from_mapping(mapping, "RIGHT") if (n_sites >= 2 or has_right) else None
        return ChainSpec(
            n_sites=n_sites,
            site_energies=energies,
            couplings=couplings,
            bath_left=bath_left,
            bath_right=bath_right,
            dephasing_rate=dephasing,
        )
    except ValidationError as e:
        raise InvalidSpecError(str(e)) from e


def load_chain_config(path: str | Path) -> ChainSpec:
    spec = chain_spec_from_mapping(read_config(path))
    logger.info("Loaded chain config %s (N=%d)", path, spec.n_sites)
    return spec


def chain_spec_to_mapping(spec: ChainSpec) -> dict[str, str]:
    """Explicit per-site form; occupations are written canonically."""
    out = {
        "SCHEMA_VERSION": str(SCHEMA_VERSION),
        "N_SITES": str(spec.n_sites),
        "SITE_ENERGIES": ",".join(repr(float(e)) for e in spec.site_energies),
        "COUPLINGS": ",".join(repr(float(g)) for g in spec.couplings),
        "RATE_LEFT": repr(spec.bath_left.interaction_rate),
        "OCCUPATION_LEFT": repr(spec.bath_left.occupation),
        "DEPHASING_RATE": repr(spec.dephasing_rate),
    }
    if spec.bath_right is not None:
        out["RATE_RIGHT"] = repr(spec.bath_right.interaction_rate)
        out["OCCUPATION_RIGHT"] = repr(spec.bath_right.occupation)
    if not spec.couplings:
        del out["COUPLINGS"]
    return out


def save_chain_config(spec: ChainSpec, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{k}={v}" for k, v in chain_spec_to_mapping(spec).items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
