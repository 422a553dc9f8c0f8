"""Fixtures generating real CSV inputs through the simulator's CLI."""

import subprocess
import sys

import pytest

RUN_CONFIG = """
[system]
mode_frequencies_ghz = [5.507, 5.513]
mode_couplings_mhz = [14.6, 12.1]
mode_fock_cutoffs = [2, 2]

[scenario]
rise_times_ns = [20.0, 50.0]

[fock]
photon_numbers = [0, 1]
t_rise_ns = 20.0
excited_mode = 0
"""


def run_cli(command, config_path, out_dir):
    result = subprocess.run(
        [sys.executable, "-m", "mslz", command, "--config", str(config_path), "--out", str(out_dir)],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
    return out_dir


@pytest.fixture(scope="session")
def csv_dir(tmp_path_factory):
    base = tmp_path_factory.mktemp("csv")
    config = base / "run.toml"
    config.write_text(RUN_CONFIG)
    for command in ("sweep", "lzcurve", "fock"):
        run_cli(command, config, base)
    return base
