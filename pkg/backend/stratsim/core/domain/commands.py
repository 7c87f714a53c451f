"""Commands.

Represent jobs the simulator should perform, one per CLI subcommand
"""

from dataclasses import dataclass
from dataclasses import field
from pathlib import Path

from backend.stratsim.constants import DECAY_ANGULAR_SPREAD
from backend.stratsim.constants import DECAY_RADIAL_SPREAD
from backend.stratsim.constants import DEFAULT_REGULARITY
from backend.stratsim.core.experiments import InitialDataSpec
from backend.stratsim.core.experiments import SweepConfig
from backend.stratsim.core.numerics.spectral import GridSpec
from backend.stratsim.core.numerics.timestepper import StepperConfig
from backend.stratsim.foundation.domain.commands import Command


@dataclass
class SimulateCommand(Command):
    """Simulate Command: one trajectory with its NormReport time series."""

    grid: GridSpec
    initial: InitialDataSpec
    kappa: float
    stepper: StepperConfig
    n_regularity: float = DEFAULT_REGULARITY
    checkpoint: bool = False
    resume_from: Path | None = None
    emit_plots: bool = False


@dataclass
class SweepCommand(Command):
    """Sweep Command: lifespan sweep and its scaling fit."""

    sweep: SweepConfig
    quick: bool = False
    emit_plots: bool = False
    progress_interval_sec: int = 30


@dataclass
class DecayCommand(Command):
    """Decay Command: linear decay fits per dyadic band."""

    grid: GridSpec
    kappa: float
    bands: tuple[int, ...]
    t_min: float
    t_max: float
    samples_per_decade: int
    p_values: tuple[float, ...] = (4.0,)
    angular_spread: float = DECAY_ANGULAR_SPREAD
    radial_spread: float = DECAY_RADIAL_SPREAD
    emit_plots: bool = False


@dataclass
class StrichartzCommand(Command):
    """Strichartz Command: homogeneous and Duhamel ratios along a kappa axis."""

    grid: GridSpec
    kappas: tuple[float, ...]
    q: float
    band: int
    duhamel_kappas: tuple[float, ...] = (1.0, 4.0)
    horizon: float | None = None
    samples: int = 257
    width: float = 1.0
    emit_plots: bool = False


@dataclass
class SymmetryCommand(Command):
    """Symmetry Command: time-scaling check under dt refinement."""

    grid: GridSpec
    initial: InitialDataSpec
    kappa: float
    t_horizon: float
    stepper: StepperConfig = field(default_factory=StepperConfig)
    refinements: int = 1


@dataclass
class SelftestCommand(Command):
    """Selftest Command: invariant suite."""

    seed: int = 0
    quick: bool = False

