"""
Tests cho plain-text ChainSpec config (KEY=value).
"""

import pytest

from conftest import bench_spec
from src.services.chain_config import (
    chain_spec_from_mapping, chain_spec_to_mapping, load_chain_config, save_chain_config,
)
from src.services.errors import InvalidSpecError

BENCH_CONFIG = """\
# benchmark chain
N_SITES=4
OMEGA=1
COUPLING=1
RATE_LEFT=1
TEMPERATURE_LEFT=1
RATE_RIGHT=1
TEMPERATURE_RIGHT=0
DEPHASING_RATE=0
"""


def test_load_uniform_config(tmp_path):
    path = tmp_path / "chain.env"
    path.write_text(BENCH_CONFIG)
    spec = load_chain_config(path)
    assert spec.n_sites == 4
    assert spec.site_energies == (1.0,) * 4
    assert spec.couplings == (1.0,) * 3
    assert spec.bath_left.occupation == pytest.approx(bench_spec(4).bath_left.occupation)
    assert spec.dephasing_rate == 0.0


def test_per_site_lists_and_occupation_entry():
    spec = chain_spec_from_mapping({
        "n_sites": "3",
        "SITE_ENERGIES": "0.5,0.7,0.9",
        "COUPLINGS": "0.1,0.2",
        "RATE_LEFT": "1",
        "OCCUPATION_LEFT": "0.5",
        "RATE_RIGHT": "2",
        "OCCUPATION_RIGHT": "0",
        "DEPHASING_RATE": "0.25",
    })
    assert spec.site_energies == (0.5, 0.7, 0.9)
    assert spec.couplings == (0.1, 0.2)
    assert spec.derived("left") == (2.0, 0.25)
    assert spec.dephasing_rate == 0.25


@pytest.mark.parametrize("missing", ["N_SITES", "OMEGA", "COUPLING", "RATE_LEFT", "TEMPERATURE_LEFT", "DEPHASING_RATE"])
def test_missing_physics_parameter_is_an_error(missing):
    mapping = dict(line.split("=", 1) for line in BENCH_CONFIG.splitlines() if "=" in line)
    del mapping[missing]
    with pytest.raises(InvalidSpecError):
        chain_spec_from_mapping(mapping)


def test_invalid_values_become_invalid_spec_errors():
    mapping = dict(line.split("=", 1) for line in BENCH_CONFIG.splitlines() if "=" in line)
    with pytest.raises(InvalidSpecError):
        chain_spec_from_mapping({**mapping, "OMEGA": "abc"})
    with pytest.raises(InvalidSpecError):
        chain_spec_from_mapping({**mapping, "RATE_LEFT": "-1"})
    with pytest.raises(InvalidSpecError):
        chain_spec_from_mapping({**mapping, "COUPLINGS": "1,1"})


def test_missing_file():
    with pytest.raises(InvalidSpecError):
        load_chain_config("does/not/exist.env")


def test_save_then_load_preserves_physics(tmp_path):
    spec = bench_spec(3, dephasing_rate=0.5)
    loaded = load_chain_config(save_chain_config(spec, tmp_path / "out.env"))
    assert loaded.site_energies == spec.site_energies
    assert loaded.couplings == spec.couplings
    assert loaded.dephasing_rate == spec.dephasing_rate
    for side in ("left", "right"):
        assert loaded.bath(side).occupation == spec.bath(side).occupation
        assert loaded.bath(side).interaction_rate == spec.bath(side).interaction_rate
    assert chain_spec_to_mapping(spec)["SCHEMA_VERSION"] == "1"
