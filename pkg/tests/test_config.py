import math

from pathlib import Path

import pytest

from backend.stratsim.constants import QUICK_EPS_AXIS
from backend.stratsim.constants import QUICK_GRID_POINTS
from backend.stratsim.core.domain import commands
from backend.stratsim.core.experiments import ModelKind
from backend.stratsim.core.experiments import Profile
from backend.stratsim.core.numerics.timestepper import Scheme
from backend.stratsim.entrypoints.cli.config import RunConfig
from backend.stratsim.entrypoints.cli.config import load_config
from backend.stratsim.entrypoints.cli.config import parse_config
from backend.stratsim.foundation.exceptions import ConfigParseError
from backend.stratsim.foundation.exceptions import ConfigurationError
from backend.stratsim.foundation.exceptions import UnknownConfigKeyError

RUN_TOML = """
model = "sqg"
kappa = 2.0
epsilon = 0.1

[grid]
n = 64
L = 62.83185307179586

[initial]
profile = "random_band"
seed = 3

[stepper]
scheme = "rk4"
dt = 0.01
t_end = 0.5

[experiment]
bootstrap_threshold = 0
eps_axis = [0.4, 0.2, 0.1, 0.05]

[experiment.decay]
bands = [0, 1]
t_min = 1.0
t_max = 10.0

[output]
emit_plots = true
"""


def test_defaults():
    config = parse_config({})
    assert config.model == ModelKind.BOUSSINESQ
    assert config.grid.n == 256
    assert config.grid.domain_length == pytest.approx(20.0 * math.pi)
    assert config.stepper.scheme == Scheme.IFRK4
    assert config.stepper.dt is None
    assert config.output.directory == Path("results")


def test_load_config(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(RUN_TOML)
    config = load_config(path)
    assert config.model == ModelKind.SQG
    assert config.physics.kappa == 2.0
    assert config.initial.epsilon == 0.1
    assert config.initial.seed == 3
    assert config.initial.profile == Profile.RANDOM_BAND
    assert config.grid.n == 64
    assert config.stepper.scheme == Scheme.RK4
    assert config.experiment.decay.bands == [0, 1]
    assert config.output.emit_plots


def test_zero_bootstrap_threshold_disables_the_stop():
    config = parse_config({"experiment": {"bootstrap_threshold": 0}})
    assert config.lifespan_config().bootstrap_threshold is None
    assert parse_config({}).lifespan_config().bootstrap_threshold == 1.0


def test_shorthand_keys_are_lifted():
    config = parse_config({"kappa": 3.0, "seed": 9, "initial": {"epsilon": 0.2}})
    assert config.physics.kappa == 3.0
    assert config.initial.seed == 9
    assert config.initial.epsilon == 0.2


def test_shorthand_key_given_twice():
    with pytest.raises(ConfigurationError):
        parse_config({"kappa": 3.0, "physics": {"kappa": 2.0}})


@pytest.mark.parametrize(
    ("data", "location"),
    [
        ({"grid": {"n": 12}}, "grid.n"),
        ({"physics": {"kappa": -1.0}}, "physics.kappa"),
        ({"initial": {"epsilon": 0.0}}, "initial.epsilon"),
        ({"stepper": {"cfl_safety": 1.5}}, "stepper.cfl_safety"),
        ({"experiment": {"decay": {"t_min": 10.0, "t_max": 1.0}}}, "experiment.decay"),
        ({"experiment": {"growth_factor": 1.0}}, "experiment.growth_factor"),
    ],
)
def test_invalid_values_name_the_field(data, location):
    with pytest.raises(ConfigurationError) as error:
        parse_config(data)
    assert location in str(error.value)
    assert not isinstance(error.value, UnknownConfigKeyError)


def test_unknown_keys_are_rejected():
    with pytest.raises(UnknownConfigKeyError) as error:
        parse_config({"grid": {"points": 64}})
    assert "grid.points" in str(error.value)
    with pytest.raises(UnknownConfigKeyError):
        parse_config({"verbose": True})


def test_malformed_toml(tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text("[grid\nn = 64\n")
    with pytest.raises(ConfigParseError):
        load_config(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "absent.toml")


def test_sweep_config_profiles():
    config = RunConfig()
    full = config.sweep_config(workers=4)
    assert full.workers == 4
    assert full.kappa_axis == (1.0, 2.0, 4.0, 8.0)
    quick = config.sweep_config(quick=True)
    assert quick.grid_n == QUICK_GRID_POINTS
    assert quick.eps_axis == QUICK_EPS_AXIS
    assert quick.kappa_axis == ()


def test_command_builders():
    config = parse_config({"kappa": 2.0, "grid": {"n": 32}, "stepper": {"dt": 0.01, "t_end": 0.1}})
    simulate = config.simulate_command()
    assert isinstance(simulate, commands.SimulateCommand)
    assert simulate.grid.n == 32
    assert simulate.kappa == 2.0
    assert simulate.stepper.dt == 0.01
    assert simulate.name == "simulate"
    sweep = config.sweep_command(workers=2, quick=True)
    assert sweep.quick
    assert sweep.sweep.workers == 2
    decay = config.decay_command()
    assert decay.grid.n == 1024
    assert decay.bands == (-1, 0, 1, 2)
    assert decay.angular_spread == 0.7
    assert decay.radial_spread == 0.08
    strichartz = config.strichartz_command()
    assert strichartz.q == 4.0
    assert strichartz.kappas == (1.0, 2.0, 4.0, 8.0)
    symmetry = config.symmetry_command()
    assert symmetry.kappa == 4.0
    assert symmetry.grid.n == 32


def test_example_configuration_is_valid():
    config = load_config(Path(__file__).parents[1] / "run.toml")
    assert config.model_dump() == RunConfig().model_dump()
