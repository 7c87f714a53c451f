import json

import pytest

from backend.stratsim.core.persistence import load_checkpoint
from backend.stratsim.core.selftest import CheckResult
from backend.stratsim.entrypoints.cli.main import build_parser
from backend.stratsim.entrypoints.cli.main import main
from backend.stratsim.foundation.exceptions import NumericalAbortError

SMALL_RUN = """
epsilon = 0.05

[grid]
n = 16
L = 6.283185307179586

[initial]
n_regularity = 1.0

[stepper]
dt = 0.01
t_end = 0.05
diagnostic_stride = 1

[output]
checkpoint = true
"""

HANDLERS = "backend.stratsim.core.service.handlers.command_handlers"


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(SMALL_RUN)
    return path


def test_parser_flags():
    args = build_parser().parse_args(["sweep", "--quick", "--threads", "3", "--seed", "4", "--emit-plots"])
    assert args.subcommand == "sweep"
    assert args.quick
    assert args.threads == 3
    assert args.seed == 4
    assert args.emit_plots


def test_parser_requires_a_subcommand():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
    with pytest.raises(SystemExit):
        build_parser().parse_args(["decay", "--quick"])


def test_simulate_writes_norms_and_checkpoint(tmp_path, small_config):
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(small_config), "--out", str(out), "--emit-plots"]) == 0
    rows = (out / "simulate_norms.csv").read_text().splitlines()
    assert len(rows) == 7
    assert rows[0].startswith("time,")
    final = load_checkpoint(out / "simulate_final.chk")
    assert final.time == pytest.approx(0.05)
    assert final.grid.n == 16
    assert (out / "simulate_norms_plot.py").exists()


def test_resume_from_a_checkpoint(tmp_path, small_config):
    first = tmp_path / "first"
    assert main(["simulate", "--config", str(small_config), "--out", str(first)]) == 0
    resumed = small_config.read_text().replace("t_end = 0.05", "t_end = 0.1")
    resumed += f'resume_from = "{(first / "simulate_final.chk").as_posix()}"\n'
    small_config.write_text(resumed)
    second = tmp_path / "second"
    assert main(["simulate", "--config", str(small_config), "--out", str(second)]) == 0
    assert load_checkpoint(second / "simulate_final.chk").time == pytest.approx(0.1)


def test_corrupt_checkpoint_is_a_configuration_error(tmp_path, small_config):
    broken = tmp_path / "broken.chk"
    broken.write_bytes(b"not a checkpoint")
    small_config.write_text(small_config.read_text() + f'resume_from = "{broken.as_posix()}"\n')
    assert main(["simulate", "--config", str(small_config), "--out", str(tmp_path / "out")]) == 2


def test_numerical_abort_exit_code(mocker, tmp_path, small_config):
    mocker.patch(f"{HANDLERS}.iterate", side_effect=NumericalAbortError("non-finite coefficients", last_valid_time=0.2))
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(small_config), "--out", str(out)]) == 3
    assert not out.exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--config", "does-not-exist.toml"],
        ["selftest", "--seed=-1"],
        ["sweep", "--threads", "0"],
    ],
)
def test_configuration_errors(argv):
    assert main(argv) == 2


def test_invalid_config_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("[grid]\nn = 100\n")
    assert main(["simulate", "--config", str(path)]) == 2


def test_selftest_exit_codes(mocker, tmp_path):
    run_selftest = mocker.patch(f"{HANDLERS}.run_selftest", return_value=[CheckResult("identity", 0.0, 1e-12)])
    assert main(["selftest", "--quick", "--seed", "5", "--out", str(tmp_path)]) == 0
    run_selftest.assert_called_once_with(seed=5, quick=True)
    rows = json.loads((tmp_path / "selftest.json").read_text())
    assert rows == [{"check": "identity", "value": 0.0, "bound": 1e-12, "passed": True}]

    run_selftest.return_value = [CheckResult("identity", 1.0, 1e-12)]
    assert main(["selftest", "--out", str(tmp_path)]) == 1
