"""Run configuration.

A TOML file validated into RunConfig. Every section rejects unknown keys; the
top-level shorthand keys kappa, epsilon and seed are lifted into their
sections before validation.
"""

import tomllib

from pathlib import Path
from typing import Annotated
from typing import Any

from pydantic import AfterValidator
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import PositiveFloat
from pydantic import ValidationError
from pydantic import model_validator

from backend.stratsim.constants import BOOTSTRAP_THRESHOLD
from backend.stratsim.constants import DECAY_ANGULAR_SPREAD
from backend.stratsim.constants import DECAY_BANDS
from backend.stratsim.constants import DECAY_DOMAIN_LENGTH
from backend.stratsim.constants import DECAY_GRID_POINTS
from backend.stratsim.constants import DECAY_RADIAL_SPREAD
from backend.stratsim.constants import DECAY_WINDOW
from backend.stratsim.constants import DEFAULT_CFL_SAFETY
from backend.stratsim.constants import DEFAULT_DEALIAS_FRACTION
from backend.stratsim.constants import DEFAULT_DIAGNOSTIC_STRIDE
from backend.stratsim.constants import DEFAULT_DOMAIN_LENGTH
from backend.stratsim.constants import DEFAULT_EPS_AXIS
from backend.stratsim.constants import DEFAULT_GRID_POINTS
from backend.stratsim.constants import DEFAULT_KAPPA_AXIS
from backend.stratsim.constants import DEFAULT_REGULARITY
from backend.stratsim.constants import DUHAMEL_KAPPAS
from backend.stratsim.constants import HN_GROWTH_FACTOR
from backend.stratsim.constants import HORIZON_FACTOR
from backend.stratsim.constants import MIN_SAMPLES_PER_DECADE
from backend.stratsim.constants import QUICK_EPS_AXIS
from backend.stratsim.constants import QUICK_GRID_POINTS
from backend.stratsim.constants import REFERENCE_EPSILON
from backend.stratsim.constants import REFERENCE_KAPPA
from backend.stratsim.constants import STRICHARTZ_DOMAIN_LENGTH
from backend.stratsim.constants import STRICHARTZ_GRID_POINTS
from backend.stratsim.constants import STRICHARTZ_KAPPAS
from backend.stratsim.constants import STRICHARTZ_TIME_SAMPLES
from backend.stratsim.constants import SYMMETRY_KAPPA
from backend.stratsim.core.domain import commands
from backend.stratsim.core.experiments import InitialDataSpec
from backend.stratsim.core.experiments import LifespanConfig
from backend.stratsim.core.experiments import ModelKind
from backend.stratsim.core.experiments import Profile
from backend.stratsim.core.experiments import SweepConfig
from backend.stratsim.core.numerics.spectral import GridSpec
from backend.stratsim.core.numerics.spectral import make_grid
from backend.stratsim.core.numerics.timestepper import Scheme
from backend.stratsim.core.numerics.timestepper import StepperConfig
from backend.stratsim.foundation.exceptions import ConfigParseError
from backend.stratsim.foundation.exceptions import ConfigurationError
from backend.stratsim.foundation.exceptions import InvalidArgumentError
from backend.stratsim.foundation.exceptions import UnknownConfigKeyError
from backend.stratsim.foundation.utils import is_power_of_two

# top-level key -> (section, field)
SHORTHAND_KEYS = {
    "kappa": ("physics", "kappa"),
    "epsilon": ("initial", "epsilon"),
    "seed": ("initial", "seed"),
}


def _power_of_two(value: int) -> int:
    if not is_power_of_two(value) or value < 8:
        raise ValueError(f"must be a power of two >= 8, got {value}")
    return value


GridPoints = Annotated[int, AfterValidator(_power_of_two)]


class BaseSection(BaseModel):
    """Base model used in all the sections."""

    model_config = ConfigDict(
        # accept both the field name and its alias (L / domain_length)
        populate_by_name=True,
        extra="forbid",
    )


class GridSection(BaseSection):
    """Lattice of the nonlinear runs."""

    n: GridPoints = Field(DEFAULT_GRID_POINTS, description="points per axis, power of two")
    domain_length: float = Field(DEFAULT_DOMAIN_LENGTH, gt=0, allow_inf_nan=False, alias="L")
    dealias_fraction: float = Field(DEFAULT_DEALIAS_FRACTION, gt=0, le=1)


class PhysicsSection(BaseSection):
    """Dispersion strength."""

    kappa: float = Field(REFERENCE_KAPPA, ge=0, allow_inf_nan=False)


class InitialSection(BaseSection):
    """Initial data recipe."""

    profile: Profile = Profile.GAUSSIAN_PAIR
    epsilon: float = Field(REFERENCE_EPSILON, gt=0, allow_inf_nan=False)
    n_regularity: float = Field(DEFAULT_REGULARITY, ge=0, allow_inf_nan=False)
    seed: int = Field(0, ge=0)


class StepperSection(BaseSection):
    """Time integration."""

    scheme: Scheme = Scheme.IFRK4
    dt: float | None = Field(None, gt=0, allow_inf_nan=False, description="fixed step, absent for CFL steps")
    cfl_safety: float = Field(DEFAULT_CFL_SAFETY, gt=0, lt=1)
    t_end: float = Field(1.0, gt=0, allow_inf_nan=False)
    diagnostic_stride: int = Field(DEFAULT_DIAGNOSTIC_STRIDE, ge=1)
    nonlinear: bool = True


class DecaySection(BaseSection):
    """Linear decay study."""

    n: GridPoints = DECAY_GRID_POINTS
    domain_length: float = Field(DECAY_DOMAIN_LENGTH, gt=0, allow_inf_nan=False, alias="L")
    kappa: float = Field(REFERENCE_KAPPA, gt=0, allow_inf_nan=False)
    bands: list[int] = Field(default_factory=lambda: list(DECAY_BANDS), min_length=1)
    t_min: float = Field(DECAY_WINDOW[0], gt=0)
    t_max: float = Field(DECAY_WINDOW[1], gt=0, allow_inf_nan=False)
    samples_per_decade: int = Field(2 * MIN_SAMPLES_PER_DECADE, ge=MIN_SAMPLES_PER_DECADE)
    p_values: list[float] = Field(default_factory=lambda: [4.0])
    angular_spread: PositiveFloat = DECAY_ANGULAR_SPREAD
    radial_spread: PositiveFloat = DECAY_RADIAL_SPREAD

    @model_validator(mode="after")
    def check_window(self) -> "DecaySection":
        """Window must be non-empty."""
        if self.t_min >= self.t_max:
            raise ValueError(f"t_min={self.t_min} must be smaller than t_max={self.t_max}")
        return self


class StrichartzSection(BaseSection):
    """Strichartz study."""

    n: GridPoints = STRICHARTZ_GRID_POINTS
    domain_length: float = Field(STRICHARTZ_DOMAIN_LENGTH, gt=0, allow_inf_nan=False, alias="L")
    kappas: list[PositiveFloat] = Field(default_factory=lambda: list(STRICHARTZ_KAPPAS))
    q: float = Field(4.0, ge=4)
    band: int = 0
    duhamel_kappas: list[PositiveFloat] = Field(default_factory=lambda: list(DUHAMEL_KAPPAS))
    horizon: PositiveFloat | None = None
    samples: int = Field(STRICHARTZ_TIME_SAMPLES, ge=3)
    width: PositiveFloat = 1.0


class SymmetrySection(BaseSection):
    """Time-scaling check."""

    kappa: float = Field(SYMMETRY_KAPPA, gt=0, allow_inf_nan=False)
    t_horizon: float = Field(1.0, gt=0, allow_inf_nan=False)
    refinements: int = Field(1, ge=0)


class ExperimentSection(BaseSection):
    """Lifespan thresholds, sweep axes and the study sub-blocks."""

    growth_factor: float = Field(HN_GROWTH_FACTOR, gt=1)
    bootstrap_threshold: float = Field(BOOTSTRAP_THRESHOLD, ge=0, description="0 disables the bootstrap stop")
    horizon: PositiveFloat | None = None
    horizon_factor: float = Field(HORIZON_FACTOR, gt=0)
    eps_axis: list[PositiveFloat] = Field(default_factory=lambda: list(DEFAULT_EPS_AXIS))
    kappa_axis: list[PositiveFloat] = Field(default_factory=lambda: list(DEFAULT_KAPPA_AXIS))
    reference_kappa: float = Field(REFERENCE_KAPPA, gt=0)
    reference_epsilon: float = Field(REFERENCE_EPSILON, gt=0)
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    decay: DecaySection = Field(default_factory=DecaySection)
    strichartz: StrichartzSection = Field(default_factory=StrichartzSection)
    symmetry: SymmetrySection = Field(default_factory=SymmetrySection)


class OutputSection(BaseSection):
    """Result files."""

    directory: Path = Path("results")
    emit_plots: bool = False
    checkpoint: bool = False
    resume_from: Path | None = None
    progress_interval_sec: int = Field(30, ge=1)


class RunConfig(BaseSection):
    """Validated run configuration."""

    model: ModelKind = ModelKind.BOUSSINESQ
    grid: GridSection = Field(default_factory=GridSection)
    physics: PhysicsSection = Field(default_factory=PhysicsSection)
    initial: InitialSection = Field(default_factory=InitialSection)
    stepper: StepperSection = Field(default_factory=StepperSection)
    experiment: ExperimentSection = Field(default_factory=ExperimentSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="before")
    @classmethod
    def lift_shorthand(cls, data: Any) -> Any:  # noqa: ANN401
        """Move the top-level kappa, epsilon and seed into their sections."""
        if not isinstance(data, dict):
            return data
        data = dict(data)
        for key, (section, name) in SHORTHAND_KEYS.items():
            block = data.get(section, {})
            if key not in data or not isinstance(block, dict):
                continue
            value = data.pop(key)
            if name in block:
                raise ValueError(f"{key} is given both at top level and as {section}.{name}")
            data[section] = {**block, name: value}
        return data

    @model_validator(mode="after")
    def check_core_types(self) -> "RunConfig":
        """Re-validate the constraints owned by the numerics by building their types."""
        try:
            self.grid_spec()
            self.initial_spec()
            self.lifespan_config()
        except InvalidArgumentError as error:
            raise ValueError(str(error)) from error
        return self

    def grid_spec(self) -> GridSpec:
        """Grid of the nonlinear runs."""
        return make_grid(self.grid.n, self.grid.domain_length, self.grid.dealias_fraction)

    def initial_spec(self) -> InitialDataSpec:
        """Initial data recipe."""
        return InitialDataSpec(
            profile=self.initial.profile,
            epsilon=self.initial.epsilon,
            n_regularity=self.initial.n_regularity,
            seed=self.initial.seed,
            model=self.model,
        )

    def stepper_config(self) -> StepperConfig:
        """Integration parameters."""
        return StepperConfig(
            scheme=self.stepper.scheme,
            dt=self.stepper.dt,
            cfl_safety=self.stepper.cfl_safety,
            t_end=self.stepper.t_end,
            diagnostic_stride=self.stepper.diagnostic_stride,
            nonlinear=self.stepper.nonlinear,
        )

    def lifespan_config(self) -> LifespanConfig:
        """Stopping rules of the lifespan runs."""
        experiment = self.experiment
        return LifespanConfig(
            n_regularity=self.initial.n_regularity,
            growth_factor=experiment.growth_factor,
            bootstrap_threshold=experiment.bootstrap_threshold or None,
            horizon=experiment.horizon,
            horizon_factor=experiment.horizon_factor,
            stepper=self.stepper_config(),
        )

    def sweep_config(self, workers: int = 1, quick: bool = False) -> SweepConfig:
        """Sweep parameters; the quick profile uses a coarse grid and three epsilon points.

        Args:
            workers (int): parallel processes. Defaults to 1.
            quick (bool): reduced profile. Defaults to False.

        Returns:
            SweepConfig: sweep parameters
        """
        experiment = self.experiment
        return SweepConfig(
            model=self.model,
            grid_n=QUICK_GRID_POINTS if quick else self.grid.n,
            domain_length=self.grid.domain_length,
            dealias_fraction=self.grid.dealias_fraction,
            profile=self.initial.profile,
            eps_axis=QUICK_EPS_AXIS if quick else tuple(experiment.eps_axis),
            kappa_axis=() if quick else tuple(experiment.kappa_axis),
            reference_kappa=experiment.reference_kappa,
            reference_epsilon=experiment.reference_epsilon,
            seeds=tuple(experiment.seeds),
            lifespan=self.lifespan_config(),
            workers=workers,
        )

    def simulate_command(self) -> commands.SimulateCommand:
        """Command of the simulate subcommand."""
        return commands.SimulateCommand(
            grid=self.grid_spec(),
            initial=self.initial_spec(),
            kappa=self.physics.kappa,
            stepper=self.stepper_config(),
            n_regularity=self.initial.n_regularity,
            checkpoint=self.output.checkpoint,
            resume_from=self.output.resume_from,
            emit_plots=self.output.emit_plots,
        )

    def sweep_command(self, workers: int = 1, quick: bool = False) -> commands.SweepCommand:
        """Command of the sweep subcommand."""
        return commands.SweepCommand(
            sweep=self.sweep_config(workers=workers, quick=quick),
            quick=quick,
            emit_plots=self.output.emit_plots,
            progress_interval_sec=self.output.progress_interval_sec,
        )

    def decay_command(self) -> commands.DecayCommand:
        """Command of the decay subcommand."""
        decay = self.experiment.decay
        return commands.DecayCommand(
            grid=make_grid(decay.n, decay.domain_length, self.grid.dealias_fraction),
            kappa=decay.kappa,
            bands=tuple(decay.bands),
            t_min=decay.t_min,
            t_max=decay.t_max,
            samples_per_decade=decay.samples_per_decade,
            p_values=tuple(decay.p_values),
            angular_spread=decay.angular_spread,
            radial_spread=decay.radial_spread,
            emit_plots=self.output.emit_plots,
        )

    def strichartz_command(self) -> commands.StrichartzCommand:
        """Command of the strichartz subcommand."""
        block = self.experiment.strichartz
        return commands.StrichartzCommand(
            grid=make_grid(block.n, block.domain_length, self.grid.dealias_fraction),
            kappas=tuple(block.kappas),
            q=block.q,
            band=block.band,
            duhamel_kappas=tuple(block.duhamel_kappas),
            horizon=block.horizon,
            samples=block.samples,
            width=block.width,
            emit_plots=self.output.emit_plots,
        )

    def symmetry_command(self) -> commands.SymmetryCommand:
        """Command of the symmetry subcommand."""
        block = self.experiment.symmetry
        return commands.SymmetryCommand(
            grid=self.grid_spec(),
            initial=self.initial_spec(),
            kappa=block.kappa,
            t_horizon=block.t_horizon,
            stepper=self.stepper_config(),
            refinements=block.refinements,
        )


def _dotted(location: tuple) -> str:
    return ".".join(str(part) for part in location)


def _configuration_error(error: ValidationError) -> ConfigurationError:
    issues = error.errors()
    unknown = [_dotted(issue["loc"]) for issue in issues if issue["type"] == "extra_forbidden"]
    if unknown:
        return UnknownConfigKeyError(f"unknown configuration keys: {', '.join(unknown)}")
    details = "; ".join(f"{_dotted(issue['loc']) or '<root>'}: {issue['msg']}" for issue in issues)
    return ConfigurationError(details)


def parse_config(data: dict[str, Any]) -> RunConfig:
    """Validate a decoded configuration.

    Args:
        data (dict[str, Any]): decoded TOML document

    Raises:
        UnknownConfigKeyError: keys no section declares
        ConfigurationError: invalid values, message names the dotted field path

    Returns:
        RunConfig: validated configuration with defaults filled
    """
    try:
        return RunConfig.model_validate(data)
    except ValidationError as error:
        raise _configuration_error(error) from error


def load_config(path: Path) -> RunConfig:
    """Load and validate a TOML run configuration.

    Args:
        path (Path): configuration file

    Raises:
        ConfigurationError: unreadable file or invalid values
        ConfigParseError: not valid TOML, message carries the line
        UnknownConfigKeyError: keys no section declares

    Returns:
        RunConfig: validated configuration with defaults filled
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as error:
        raise ConfigurationError(f"cannot read {path}: {error}") from error
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as error:
        raise ConfigParseError(f"{path}: {error}") from error
    return parse_config(data)
