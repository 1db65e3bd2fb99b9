"""Command-line interface: exit codes, outputs, determinism."""

import json

import numpy as np
import pytest

from halfline.cli import main
from halfline.oracles import robin_oracle
from halfline.types import ScatteringData, make_bound_state


@pytest.fixture()
def io_dir(tmp_path):
    return tmp_path


def _write(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


@pytest.fixture()
def zero_potential_file(io_dir):
    return _write(io_dir / "pot.json", {
        "n": 1, "x_max": 12.0,
        "closed_form": {"name": "zero", "params": {}},
    })


@pytest.fixture()
def robin_boundary_file(io_dir):
    theta = np.pi / 3
    return _write(io_dir / "bc.json", {
        "A_re": [[-np.sin(theta)]], "A_im": [[0.0]],
        "B_re": [[np.cos(theta)]], "B_im": [[0.0]],
    })


@pytest.fixture()
def fast_config_file(io_dir):
    return _write(io_dir / "cfg.json", {
        "direct": {"k_count": 1024},
        "inverse": {"x_max": 12.0},
    })


def _robin_scattering_file(io_dir, name="scat.json", corrupt=None):
    theta = np.pi / 3
    oracle = robin_oracle(theta)
    half = 512
    dk = 60.0 / half
    kp = (np.arange(half) + 0.5) * dk
    k = np.concatenate([-kp[::-1], kp])
    S = oracle["S"](k)[:, None, None].astype(complex)
    kappa, M = oracle["bound_state"]
    states = (make_bound_state(kappa, [[M]]),)
    if corrupt == "damped":
        S = 0.9 * S
    if corrupt == "spurious":
        states = states + (make_bound_state(0.25, [[0.6]]),)
    if corrupt == "wiggle":
        S = S * np.exp(1j * 1e-2 * np.sin(0.7 * k))[:, None, None]
    data = ScatteringData(n=1, k_grid=k, S_values=S, bound_states=states)
    return _write(io_dir / name, data.to_dict())


def test_direct_writes_outputs_and_is_deterministic(
        io_dir, zero_potential_file, robin_boundary_file, fast_config_file):
    out = io_dir / "out"
    argv = ["direct", "--potential", zero_potential_file,
            "--boundary", robin_boundary_file,
            "--config", fast_config_file, "--out", str(out)]
    assert main(argv) == 0
    first = (out / "scattering.json").read_bytes()
    assert (out / "scattering.csv").exists()
    assert (out / "bound_states.csv").exists()
    payload = json.loads(first)
    assert len(payload["bound_states"]) == 1
    assert main(argv) == 0
    assert (out / "scattering.json").read_bytes() == first


def test_inverse_recovers_free_robin(io_dir, fast_config_file):
    scat = _robin_scattering_file(io_dir)
    out = io_dir / "inv"
    code = main(["inverse", "--scattering", scat,
                 "--config", fast_config_file, "--out", str(out)])
    assert code == 0
    pot = json.loads((out / "potential.json").read_text())
    flat = np.array([s["re"] for s in pot["samples"]])
    assert np.abs(flat).max() <= 1e-3
    assert (out / "boundary.json").exists()
    assert (out / "marchenko_F.csv").exists()


def test_validate_passes_good_data(io_dir, fast_config_file):
    scat = _robin_scattering_file(io_dir)
    code = main(["validate", "--scattering", scat,
                 "--config", fast_config_file, "--out", str(io_dir / "rep")])
    assert code == 0
    report = json.loads((io_dir / "rep" / "report.json").read_text())
    assert report["status"] == "pass"


def test_validate_fails_spurious_bound_state(io_dir, fast_config_file):
    scat = _robin_scattering_file(io_dir, corrupt="spurious")
    code = main(["validate", "--scattering", scat,
                 "--config", fast_config_file, "--out", str(io_dir / "rep")])
    assert code == 1


def test_validate_unsettled_tail_exit_code(io_dir, fast_config_file):
    scat = _robin_scattering_file(io_dir, corrupt="wiggle")
    code = main(["validate", "--scattering", scat,
                 "--config", fast_config_file, "--out", str(io_dir / "rep")])
    assert code == 4


def test_inverse_rejects_non_unitary_scattering(io_dir, fast_config_file):
    scat = _robin_scattering_file(io_dir, corrupt="damped")
    code = main(["inverse", "--scattering", scat,
                 "--config", fast_config_file, "--out", str(io_dir / "inv")])
    assert code == 2


def test_malformed_json_is_bad_input(io_dir, robin_boundary_file):
    bad = io_dir / "bad.json"
    bad.write_text("{not json")
    code = main(["direct", "--potential", str(bad),
                 "--boundary", robin_boundary_file, "--out", str(io_dir)])
    assert code == 2


def test_missing_file_is_bad_input(io_dir, robin_boundary_file):
    code = main(["direct", "--potential", str(io_dir / "nope.json"),
                 "--boundary", robin_boundary_file, "--out", str(io_dir)])
    assert code == 2


def test_size_mismatch_is_bad_input(io_dir, robin_boundary_file):
    pot2 = _write(io_dir / "pot2.json", {
        "n": 2, "x_max": 12.0,
        "closed_form": {"name": "zero", "params": {}},
    })
    code = main(["direct", "--potential", pot2,
                 "--boundary", robin_boundary_file, "--out", str(io_dir)])
    assert code == 2


def test_invalid_boundary_is_bad_input(io_dir, zero_potential_file):
    bad_bc = _write(io_dir / "badbc.json", {
        "A_re": [[1.0]], "A_im": [[0.0]],
        "B_re": [[0.0]], "B_im": [[1.0]],  # violates -B^H A + A^H B = 0
    })
    code = main(["direct", "--potential", zero_potential_file,
                 "--boundary", bad_bc, "--out", str(io_dir)])
    assert code == 2


def test_roundtrip_command(io_dir, zero_potential_file, robin_boundary_file,
                           fast_config_file):
    out = io_dir / "rt"
    code = main(["roundtrip", "--potential", zero_potential_file,
                 "--boundary", robin_boundary_file,
                 "--config", fast_config_file, "--out", str(out)])
    assert code == 0
    report = json.loads((out / "roundtrip.json").read_text())
    assert report["boundary_equivalent"] is True
    assert report["bound_states_found"] == 1


def test_fixtures_command(io_dir):
    out = io_dir / "fx"
    assert main(["fixtures", "--out", str(out)]) == 0
    names = json.loads((out / "fixtures.json").read_text())["names"]
    assert len(names) >= 5
    for name in names:
        assert (out / f"{name}.potential.json").exists()
        assert (out / f"{name}.boundary.json").exists()
