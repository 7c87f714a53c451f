"""Lifespan-scaling sweeps and the time-scaling symmetry check."""

import math

from collections.abc import Callable
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from enum import StrEnum

import numpy as np

from scipy.stats import linregress

from backend.stratsim.constants import BOOTSTRAP_THRESHOLD
from backend.stratsim.constants import DECAY_ANGULAR_SPREAD
from backend.stratsim.constants import DECAY_RADIAL_SPREAD
from backend.stratsim.constants import DEFAULT_DEALIAS_FRACTION
from backend.stratsim.constants import DEFAULT_DOMAIN_LENGTH
from backend.stratsim.constants import DEFAULT_EPS_AXIS
from backend.stratsim.constants import DEFAULT_GRID_POINTS
from backend.stratsim.constants import DEFAULT_KAPPA_AXIS
from backend.stratsim.constants import DEFAULT_REGULARITY
from backend.stratsim.constants import FIT_R2_ACCEPT
from backend.stratsim.constants import FIT_R2_FLAG
from backend.stratsim.constants import HN_GROWTH_FACTOR
from backend.stratsim.constants import HORIZON_FACTOR
from backend.stratsim.constants import INITIAL_BAND_MAX
from backend.stratsim.constants import INITIAL_BAND_MIN
from backend.stratsim.constants import MIN_FIT_POINTS
from backend.stratsim.constants import QUICK_EPS_AXIS
from backend.stratsim.constants import QUICK_GRID_POINTS
from backend.stratsim.constants import RECORD_COLUMNS
from backend.stratsim.constants import REFERENCE_EPSILON
from backend.stratsim.constants import REFERENCE_KAPPA
from backend.stratsim.core.numerics.diagnostics import NormReport
from backend.stratsim.core.numerics.diagnostics import NormTracker
from backend.stratsim.core.numerics.diagnostics import combined_sobolev_norm
from backend.stratsim.core.numerics.littlewood_paley import bump_psi
from backend.stratsim.core.numerics.model import ModelState
from backend.stratsim.core.numerics.model import SqgState
from backend.stratsim.core.numerics.model import VorticityState
from backend.stratsim.core.numerics.spectral import GridSpec
from backend.stratsim.core.numerics.spectral import SpectralField
from backend.stratsim.core.numerics.spectral import fft_forward
from backend.stratsim.core.numerics.spectral import make_grid
from backend.stratsim.core.numerics.timestepper import Scheme
from backend.stratsim.core.numerics.timestepper import StepperConfig
from backend.stratsim.core.numerics.timestepper import cfl_dt
from backend.stratsim.core.numerics.timestepper import integrate
from backend.stratsim.core.numerics.timestepper import iterate
from backend.stratsim.foundation.exceptions import GridMismatchError
from backend.stratsim.foundation.exceptions import InsufficientDataError
from backend.stratsim.foundation.exceptions import InvalidArgumentError
from backend.stratsim.foundation.exceptions import NumericalAbortError
from backend.stratsim.settings import get_logger

logger = get_logger()

GAUSSIAN_WIDTH = 1.5


class ModelKind(StrEnum):
    """Simulated system."""

    BOUSSINESQ = "boussinesq"
    SQG = "sqg"


class Profile(StrEnum):
    """Initial data families."""

    GAUSSIAN_PAIR = "gaussian_pair"
    RANDOM_BAND = "random_band"


class StopReason(StrEnum):
    """Why a lifespan run ended."""

    H_N_DOUBLING = "h_n_doubling"
    BOOTSTRAP_THRESHOLD = "bootstrap_threshold"
    HORIZON_REACHED = "horizon_reached"
    NUMERICAL_ABORT = "numerical_abort"


@dataclass(frozen=True)
class InitialDataSpec:
    """Recipe for initial data.

    Attributes:
        profile (Profile): data family
        epsilon (float): combined H^n size
        n_regularity (float): Sobolev index n of the normalization
        seed (int): random seed (random_band only)
        model (ModelKind): which system the data is for
    """

    profile: Profile = Profile.GAUSSIAN_PAIR
    epsilon: float = REFERENCE_EPSILON
    n_regularity: float = DEFAULT_REGULARITY
    seed: int = 0
    model: ModelKind = ModelKind.BOUSSINESQ

    def __post_init__(self):
        """Validate the recipe."""
        object.__setattr__(self, "profile", Profile(self.profile))
        object.__setattr__(self, "model", ModelKind(self.model))
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise InvalidArgumentError(f"epsilon must be positive, got {self.epsilon}")
        if self.n_regularity < 0:
            raise InvalidArgumentError(f"n_regularity must be >= 0, got {self.n_regularity}")


def initial_band_multiplier(grid: GridSpec) -> np.ndarray:
    """Smooth restriction to the bands INITIAL_BAND_MIN..INITIAL_BAND_MAX.

    The sum of phi(2^-k |xi|) over those bands telescopes to
    psi(2^-k_max |xi|) - psi(2^(1 - k_min) |xi|).
    """
    radius = grid.abs_xi
    upper = bump_psi(2.0**-INITIAL_BAND_MAX * radius)
    lower = bump_psi(2.0 ** (1 - INITIAL_BAND_MIN) * radius)
    return (upper - lower) * grid.dealias_mask


def _gaussian(grid: GridSpec, center: tuple[float, float], width: float = GAUSSIAN_WIDTH) -> np.ndarray:
    x1, x2 = grid.coordinates
    length = grid.domain_length
    # nearest periodic image
    d1 = (x1 - center[0] + 0.5 * length) % length - 0.5 * length
    d2 = (x2 - center[1] + 0.5 * length) % length - 0.5 * length
    return np.exp(-(d1**2 + d2**2) / (2.0 * width**2))


def _band_limited(grid: GridSpec, samples: np.ndarray, weight: np.ndarray | None = None) -> SpectralField:
    coeffs = fft_forward(samples) * initial_band_multiplier(grid)
    if weight is not None:
        coeffs = coeffs * weight
    coeffs[0, 0] = 0.0
    return SpectralField(grid, coeffs, zero_mode_policy=True)


def random_band_field(
    grid: GridSpec,
    rng: np.random.Generator,
    n_regularity: float = DEFAULT_REGULARITY,
) -> SpectralField:
    """Real, mean-zero, dealiased random field in the initial bands.

    White noise is filtered by the band multiplier and the weight (1 + |xi|^2)^(-(n + 1)/2),
    which keeps the H^n energy in the low bands.

    Args:
        grid (GridSpec): lattice
        rng (np.random.Generator): random source
        n_regularity (float): decay index of the weight. Defaults to 3.5.

    Returns:
        SpectralField: random field, deterministic given the generator state
    """
    weight = (1.0 + grid.abs_xi**2) ** (-(n_regularity + 1.0) / 2.0)
    return _band_limited(grid, rng.standard_normal((grid.n, grid.n)), weight)


def localized_bump(grid: GridSpec, width: float = 1.0) -> SpectralField:
    """Mean-free Gaussian of the given width at the center of the box."""
    middle = 0.5 * grid.domain_length
    coeffs = fft_forward(_gaussian(grid, (middle, middle), width))
    coeffs[0, 0] = 0.0
    return SpectralField(grid, coeffs, zero_mode_policy=True)


def axial_packet(
    grid: GridSpec,
    k: int,
    angular_spread: float = DECAY_ANGULAR_SPREAD,
    radial_spread: float = DECAY_RADIAL_SPREAD,
) -> SpectralField:
    """Real wave packet of band k concentrated around the xi1 axis.

    Two Gaussian lobes sit at xi = (+-2^k, 0) with widths radial_spread * 2^k
    along xi1 and angular_spread * 2^k across it. The gradient of xi1 / |xi|
    vanishes on the xi1 axis, so the sup norm of the evolved packet follows
    (kappa t)^(-1/2) once kappa t angular_spread^2 >> 1. An isotropic bump also
    carries directions that spread in two dimensions and decay like 1 / t.
    Across the axis the width is capped at a third of the Nyquist frequency so
    the lobes stay resolved on the top bands of the grid.

    Args:
        grid (GridSpec): lattice
        k (int): band index of the lobe centers
        angular_spread (float): relative width across the xi1 axis. Defaults to 0.7.
        radial_spread (float): relative width along the xi1 axis. Defaults to 0.08.

    Raises:
        InvalidArgumentError: non-positive spread or a lobe beyond the lattice

    Returns:
        SpectralField: packet with unit L^2 norm, centered at the origin
    """
    if angular_spread <= 0 or radial_spread <= 0:
        raise InvalidArgumentError(f"spreads must be positive, got {angular_spread}, {radial_spread}")
    center = 2.0**k
    nyquist = grid.n * grid.frequency_spacing / 2
    if center * (1.0 + 3.0 * radial_spread) >= nyquist:
        raise InvalidArgumentError(f"band {k} lies beyond the Nyquist frequency of the grid")
    xi1, xi2 = grid.xi
    along = (np.abs(xi1) - center) / (radial_spread * center)
    across = xi2 / min(angular_spread * center, nyquist / 3.0)
    coeffs = np.exp(-0.5 * (along**2 + across**2)).astype(np.complex128)
    coeffs[0, 0] = 0.0
    packet = SpectralField(grid, coeffs, zero_mode_policy=True)
    return packet * (1.0 / packet.l2_norm())


def _raw_fields(spec: InitialDataSpec, grid: GridSpec) -> list[SpectralField]:
    count = 2 if spec.model == ModelKind.BOUSSINESQ else 1
    if spec.profile == Profile.GAUSSIAN_PAIR:
        middle = 0.5 * grid.domain_length
        offset = 2.0 * GAUSSIAN_WIDTH
        dipole = _gaussian(grid, (middle - offset, middle)) - _gaussian(grid, (middle + offset, middle))
        fields = [_band_limited(grid, dipole)]
        if count == 2:
            fields.append(_band_limited(grid, _gaussian(grid, (middle, middle + offset))))
        return fields
    rng = np.random.default_rng(spec.seed)
    return [random_band_field(grid, rng, spec.n_regularity) for _ in range(count)]


def make_initial_data(spec: InitialDataSpec, grid: GridSpec, kappa: float = REFERENCE_KAPPA) -> ModelState:
    """Band-limited, mean-zero initial data normalized to H^n size epsilon.

    Args:
        spec (InitialDataSpec): recipe
        grid (GridSpec): lattice
        kappa (float): dispersion strength of the returned state. Defaults to 1.

    Returns:
        ModelState: VorticityState for Boussinesq, SqgState for SQG, at time 0
    """
    fields = _raw_fields(spec, grid)
    if spec.model == ModelKind.BOUSSINESQ:
        state = VorticityState(omega=fields[0], rho=fields[1], kappa=kappa)
    else:
        state = SqgState(theta=fields[0], kappa=kappa)
    size = combined_sobolev_norm(state, spec.n_regularity)
    if size == 0:
        raise InvalidArgumentError("initial data vanishes on this grid")
    return state.scaled(spec.epsilon / size)


def predicted_lifespan(kappa: float, epsilon: float, q: float = 4.0) -> float:
    """Bootstrap-closure timescale kappa^(1/(q-1)) epsilon^(-q/(q-1)).

    Args:
        kappa (float): dispersion strength > 0
        epsilon (float): initial size > 0
        q (float): Strichartz time exponent >= 4. Defaults to 4 (kappa^(1/3) epsilon^(-4/3)).

    Returns:
        float: predicted timescale
    """
    if q < 4:
        raise InvalidArgumentError(f"time exponent must be >= 4, got {q}")
    if kappa <= 0 or epsilon <= 0:
        raise InvalidArgumentError("kappa and epsilon must be positive")
    return kappa ** (1.0 / (q - 1.0)) * epsilon ** (-q / (q - 1.0))


def default_horizon(kappa: float, epsilon: float, factor: float = HORIZON_FACTOR) -> float:
    """Censoring horizon factor * epsilon^(-4/3) * kappa^(1/3); kappa = 0 uses the reference kappa."""
    return factor * predicted_lifespan(kappa if kappa > 0 else REFERENCE_KAPPA, epsilon)


@dataclass(frozen=True)
class LifespanConfig:
    """Stopping rules of a lifespan run.

    Attributes:
        n_regularity (float): Sobolev index of the doubling test
        growth_factor (float): H^n growth that ends the run
        bootstrap_threshold (float | None): accumulated bootstrap norm that ends the run, None disables
        horizon (float | None): censoring time, None uses default_horizon
        horizon_factor (float): factor of default_horizon
        stepper (StepperConfig): integration parameters (t_end is replaced by the horizon)
    """

    n_regularity: float = DEFAULT_REGULARITY
    growth_factor: float = HN_GROWTH_FACTOR
    bootstrap_threshold: float | None = BOOTSTRAP_THRESHOLD
    horizon: float | None = None
    horizon_factor: float = HORIZON_FACTOR
    stepper: StepperConfig = field(default_factory=StepperConfig)

    def __post_init__(self):
        """Validate thresholds."""
        if self.growth_factor <= 1:
            raise InvalidArgumentError(f"growth factor must exceed 1, got {self.growth_factor}")
        if self.bootstrap_threshold is not None and self.bootstrap_threshold <= 0:
            raise InvalidArgumentError(f"bootstrap threshold must be positive, got {self.bootstrap_threshold}")
        if self.horizon is not None and not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise InvalidArgumentError(f"horizon must be positive and finite, got {self.horizon}")
        if self.horizon_factor <= 0:
            raise InvalidArgumentError(f"horizon factor must be positive, got {self.horizon_factor}")


@dataclass(frozen=True)
class SweepRecord:
    """Outcome of one lifespan run.

    Attributes:
        model (ModelKind): simulated system
        epsilon (float): initial H^n size
        kappa (float): dispersion strength
        n_regularity (float): Sobolev index
        t_star (float): lifespan proxy
        stop_reason (StopReason): what ended the run
        seed (int): data seed
        grid_n (int): points per axis
        domain_length (float): box side
        dt (float): fixed step, or the initial CFL step of adaptive runs
    """

    model: ModelKind
    epsilon: float
    kappa: float
    n_regularity: float
    t_star: float
    stop_reason: StopReason
    seed: int
    grid_n: int
    domain_length: float
    dt: float

    @property
    def censored(self) -> bool:
        """Runs that did not cross a threshold do not enter fits."""
        return self.stop_reason in (StopReason.HORIZON_REACHED, StopReason.NUMERICAL_ABORT)

    def as_row(self) -> dict:
        """Record keyed by the result-file column names."""
        values = (
            str(self.model),
            self.epsilon,
            self.kappa,
            self.n_regularity,
            self.t_star,
            str(self.stop_reason),
            self.seed,
            self.grid_n,
            self.domain_length,
            self.dt,
        )
        return dict(zip(RECORD_COLUMNS, values, strict=True))

    @property
    def sort_key(self) -> tuple[float, float, int]:
        """Deterministic (epsilon, kappa, seed) order."""
        return (self.epsilon, self.kappa, self.seed)


def _crossing_time(previous: NormReport | None, current: NormReport, attribute: str, threshold: float) -> float:
    if previous is None:
        return current.time
    before = getattr(previous, attribute)
    after = getattr(current, attribute)
    if after == before:
        return current.time
    fraction = (threshold - before) / (after - before)
    return previous.time + min(max(fraction, 0.0), 1.0) * (current.time - previous.time)


def run_until_threshold(
    state: ModelState,
    config: LifespanConfig,
    seed: int = 0,
    epsilon: float | None = None,
    on_report: Callable[[NormReport], None] | None = None,
) -> SweepRecord:
    """Integrate until the H^n size doubles, the bootstrap norm reaches its threshold, or the horizon.

    Args:
        state (ModelState): initial state
        config (LifespanConfig): stopping rules and stepper
        seed (int): seed stored in the record. Defaults to 0.
        epsilon (float | None): size stored in the record. Defaults to the measured H^n size.
        on_report (Callable[[NormReport], None] | None): called for every NormReport. Defaults to None.

    Returns:
        SweepRecord: T* interpolated between the two bracketing samples
    """
    initial_size = combined_sobolev_norm(state, config.n_regularity)
    if initial_size == 0:
        raise InvalidArgumentError("lifespan of the zero state is undefined")
    epsilon = initial_size if epsilon is None else epsilon
    horizon = config.horizon
    if horizon is None:
        horizon = default_horizon(state.kappa, epsilon, config.horizon_factor)
    stepper = replace(config.stepper, t_end=state.time + horizon)
    dt = stepper.dt if stepper.dt is not None else cfl_dt(state, stepper.cfl_safety, stepper.scheme)
    model = ModelKind.SQG if isinstance(state, SqgState) else ModelKind.BOUSSINESQ
    size_threshold = config.growth_factor * initial_size
    logger.info(f"lifespan run {model} eps={epsilon:.4g} kappa={state.kappa:.4g} horizon={horizon:.4g}")

    tracker = NormTracker(config.n_regularity)
    previous = None
    reason = StopReason.HORIZON_REACHED
    t_star = state.time + horizon
    try:
        for snapshot in iterate(state, stepper):
            report = tracker.record(snapshot)
            if on_report is not None:
                on_report(report)
            crossings = {}
            if report.sobolev_hn >= size_threshold:
                crossings[StopReason.H_N_DOUBLING] = _crossing_time(previous, report, "sobolev_hn", size_threshold)
            if config.bootstrap_threshold is not None and report.accumulated_bootstrap >= config.bootstrap_threshold:
                crossings[StopReason.BOOTSTRAP_THRESHOLD] = _crossing_time(
                    previous, report, "accumulated_bootstrap", config.bootstrap_threshold
                )
            if crossings:
                reason = min(crossings, key=crossings.get)
                t_star = crossings[reason]
                break
            previous = report
        else:
            t_star = tracker.latest.time
    except NumericalAbortError as error:
        logger.warning(f"numerical abort after t={error.last_valid_time}")
        reason = StopReason.NUMERICAL_ABORT
        t_star = error.last_valid_time
    logger.info(f"lifespan run ended: {reason} at T*={t_star:.6g}")
    return SweepRecord(
        model=model,
        epsilon=float(epsilon),
        kappa=float(state.kappa),
        n_regularity=float(config.n_regularity),
        t_star=float(t_star),
        stop_reason=reason,
        seed=seed,
        grid_n=state.grid.n,
        domain_length=state.grid.domain_length,
        dt=float(dt),
    )


@dataclass(frozen=True)
class SweepConfig:
    """A lifespan sweep along an epsilon axis and a kappa axis.

    Attributes:
        model (ModelKind): simulated system
        grid_n (int): points per axis
        domain_length (float): box side
        dealias_fraction (float): dealiasing rule
        profile (Profile): initial data family
        eps_axis (tuple[float, ...]): epsilons run at reference_kappa
        kappa_axis (tuple[float, ...]): kappas run at reference_epsilon
        reference_kappa (float): kappa of the epsilon axis
        reference_epsilon (float): epsilon of the kappa axis
        seeds (tuple[int, ...]): data seeds, each point runs once per seed
        lifespan (LifespanConfig): stopping rules
        workers (int): parallel processes, 1 runs in-process
    """

    model: ModelKind = ModelKind.BOUSSINESQ
    grid_n: int = DEFAULT_GRID_POINTS
    domain_length: float = DEFAULT_DOMAIN_LENGTH
    dealias_fraction: float = DEFAULT_DEALIAS_FRACTION
    profile: Profile = Profile.GAUSSIAN_PAIR
    eps_axis: tuple[float, ...] = DEFAULT_EPS_AXIS
    kappa_axis: tuple[float, ...] = DEFAULT_KAPPA_AXIS
    reference_kappa: float = REFERENCE_KAPPA
    reference_epsilon: float = REFERENCE_EPSILON
    seeds: tuple[int, ...] = (0,)
    lifespan: LifespanConfig = field(default_factory=LifespanConfig)
    workers: int = 1

    @classmethod
    def quick(cls, **overrides) -> "SweepConfig":
        """Reduced profile: coarse grid, three epsilon points, no kappa axis."""
        values = {"grid_n": QUICK_GRID_POINTS, "eps_axis": QUICK_EPS_AXIS, "kappa_axis": ()}
        values.update(overrides)
        return cls(**values)


@dataclass(frozen=True)
class SweepTask:
    """One (epsilon, kappa, seed) point of a sweep."""

    epsilon: float
    kappa: float
    seed: int
    config: SweepConfig


def sweep_tasks(config: SweepConfig) -> list[SweepTask]:
    """Distinct sweep points in (epsilon, kappa, seed) order."""
    points = {(eps, config.reference_kappa) for eps in config.eps_axis}
    points |= {(config.reference_epsilon, kappa) for kappa in config.kappa_axis}
    return [
        SweepTask(epsilon=eps, kappa=kappa, seed=seed, config=config)
        for eps, kappa in sorted(points)
        for seed in sorted(config.seeds)
    ]


def run_sweep_task(task: SweepTask) -> SweepRecord:
    """Build the data of one sweep point and run it."""
    config = task.config
    grid = make_grid(config.grid_n, config.domain_length, config.dealias_fraction)
    spec = InitialDataSpec(
        profile=config.profile,
        epsilon=task.epsilon,
        n_regularity=config.lifespan.n_regularity,
        seed=task.seed,
        model=config.model,
    )
    state = make_initial_data(spec, grid, kappa=task.kappa)
    return run_until_threshold(state, config.lifespan, seed=task.seed, epsilon=task.epsilon)


def lifespan_sweep(
    eps_list: Sequence[float],
    kappa_list: Sequence[float],
    config: SweepConfig,
    on_record: Callable[[SweepRecord], None] | None = None,
) -> list[SweepRecord]:
    """Run the epsilon axis at the reference kappa and the kappa axis at the reference epsilon.

    Args:
        eps_list (Sequence[float]): epsilon axis
        kappa_list (Sequence[float]): kappa axis
        config (SweepConfig): sweep parameters (its axes are replaced by the arguments)
        on_record (Callable[[SweepRecord], None] | None): called as records complete. Defaults to None.

    Returns:
        list[SweepRecord]: records sorted by (epsilon, kappa, seed)
    """
    config = replace(config, eps_axis=tuple(eps_list), kappa_axis=tuple(kappa_list))
    tasks = sweep_tasks(config)
    logger.info(f"sweep of {len(tasks)} runs on {config.workers} worker(s)")
    records = []
    if config.workers == 1:
        for task in tasks:
            records.append(run_sweep_task(task))
            if on_record is not None:
                on_record(records[-1])
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            for record in executor.map(run_sweep_task, tasks):
                records.append(record)
                if on_record is not None:
                    on_record(record)
    return sorted(records, key=lambda record: record.sort_key)


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit y = prefactor * x^exponent in log-log coordinates.

    Attributes:
        exponent (float): fitted slope
        prefactor (float): exp(intercept)
        r_squared (float): coefficient of determination
        points (int): number of fitted points
    """

    exponent: float
    prefactor: float
    r_squared: float
    points: int

    @property
    def flagged(self) -> bool:
        """Fit quality below the reporting threshold."""
        return self.r_squared < FIT_R2_FLAG


def fit_power_law(xs: Sequence[float], ys: Sequence[float]) -> PowerLawFit:
    """Fit log y against log x.

    Args:
        xs (Sequence[float]): positive abscissae, at least MIN_FIT_POINTS distinct values
        ys (Sequence[float]): positive ordinates

    Raises:
        InsufficientDataError: too few distinct points

    Returns:
        PowerLawFit: fitted exponent and quality
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if np.unique(xs).size < MIN_FIT_POINTS:
        raise InsufficientDataError(f"a power-law fit needs >= {MIN_FIT_POINTS} distinct points, got {np.unique(xs).size}")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise InvalidArgumentError("power-law fits need positive data")
    fit = linregress(np.log(xs), np.log(ys))
    return PowerLawFit(
        exponent=float(fit.slope),
        prefactor=float(math.exp(fit.intercept)),
        r_squared=float(fit.rvalue**2),
        points=int(xs.size),
    )


@dataclass(frozen=True)
class ScalingFit:
    """Exponents of T* against epsilon and kappa.

    Attributes:
        alpha_eps (PowerLawFit): fit of T* against epsilon at the reference kappa
        beta_kappa (PowerLawFit): fit of T* against kappa at the reference epsilon
        records (tuple[SweepRecord, ...]): all records of the sweep
        censored (tuple[SweepRecord, ...]): records excluded from the fits
    """

    alpha_eps: PowerLawFit
    beta_kappa: PowerLawFit
    records: tuple[SweepRecord, ...]
    censored: tuple[SweepRecord, ...]

    @property
    def accepted(self) -> bool:
        """Both fits meet the acceptance R^2."""
        return self.alpha_eps.r_squared >= FIT_R2_ACCEPT and self.beta_kappa.r_squared >= FIT_R2_ACCEPT

    @property
    def consistent(self) -> bool:
        """alpha <= -1 and beta >= 0."""
        return self.alpha_eps.exponent <= -1.0 and self.beta_kappa.exponent >= 0.0


def fit_scaling(
    records: Sequence[SweepRecord],
    reference_kappa: float = REFERENCE_KAPPA,
    reference_epsilon: float = REFERENCE_EPSILON,
) -> ScalingFit:
    """Fit the epsilon and kappa exponents of the lifespan proxy from uncensored records.

    Args:
        records (Sequence[SweepRecord]): sweep output
        reference_kappa (float): kappa of the epsilon axis. Defaults to 1.
        reference_epsilon (float): epsilon of the kappa axis. Defaults to 0.3.

    Raises:
        InsufficientDataError: fewer than MIN_FIT_POINTS uncensored points on an axis

    Returns:
        ScalingFit: both fits and the censored records
    """
    usable = [record for record in records if not record.censored]
    censored = tuple(record for record in records if record.censored)
    for record in censored:
        logger.warning(f"censored record eps={record.epsilon} kappa={record.kappa}: {record.stop_reason}")
    eps_axis = [record for record in usable if math.isclose(record.kappa, reference_kappa)]
    kappa_axis = [record for record in usable if math.isclose(record.epsilon, reference_epsilon)]
    alpha = fit_power_law([r.epsilon for r in eps_axis], [r.t_star for r in eps_axis])
    beta = fit_power_law([r.kappa for r in kappa_axis], [r.t_star for r in kappa_axis])
    for name, fit in (("alpha", alpha), ("beta", beta)):
        if fit.flagged:
            logger.warning(f"{name} fit has R^2={fit.r_squared:.4f}")
    return ScalingFit(alpha_eps=alpha, beta_kappa=beta, records=tuple(records), censored=censored)


def is_monotone_in_epsilon(records: Sequence[SweepRecord], reference_kappa: float = REFERENCE_KAPPA) -> bool:
    """T* strictly decreasing in epsilon along the epsilon axis.

    Censored records only bound T* from below and are left out. Fewer than two
    uncensored points on the axis cannot show a trend and count as not monotone.
    """
    axis = sorted(
        (record for record in records if not record.censored and math.isclose(record.kappa, reference_kappa)),
        key=lambda record: record.epsilon,
    )
    if len(axis) < 2:
        logger.warning(f"monotonicity needs two uncensored records at kappa={reference_kappa}, got {len(axis)}")
        return False
    return all(a.t_star > b.t_star for a, b in zip(axis, axis[1:], strict=False))


def time_scaling_check(
    omega0: SpectralField,
    rho0: SpectralField,
    kappa: float,
    t_horizon: float,
    stepper: StepperConfig | None = None,
    matched_steps: bool = False,
) -> float:
    """Relative L^2 discrepancy of the time-scaling symmetry.

    Run A has strength kappa and data (omega0, rho0) up to t_horizon; run B has
    strength 1 and data (omega0, rho0) / kappa up to kappa * t_horizon. Both use
    the same step, so B takes kappa times as many steps. With matched_steps run B
    uses kappa * dt and the two discrete trajectories coincide up to round-off.

    Args:
        omega0 (SpectralField): initial vorticity
        rho0 (SpectralField): initial density perturbation
        kappa (float): strength of run A > 0
        t_horizon (float): final time of run A
        stepper (StepperConfig | None): scheme and fixed dt. Defaults to ifrk4 with the smaller CFL step of both runs.
        matched_steps (bool): step run B with kappa * dt. Defaults to False.

    Raises:
        GridMismatchError: the two fields live on different grids

    Returns:
        float: ||(u, rho)_A(T) / kappa - (u, rho)_B(kappa T)||_{L^2} / ||(u, rho)_B(kappa T)||_{L^2}
    """
    if omega0.grid != rho0.grid:
        raise GridMismatchError("omega0 and rho0 must share a grid")
    if not (kappa > 0 and t_horizon > 0):
        raise InvalidArgumentError("kappa and t_horizon must be positive")
    run_a = VorticityState(omega=omega0, rho=rho0, kappa=kappa)
    run_b = VorticityState(omega=omega0 * (1.0 / kappa), rho=rho0 * (1.0 / kappa), kappa=1.0)
    stepper = stepper if stepper is not None else StepperConfig(scheme=Scheme.IFRK4)
    dt = stepper.dt
    if dt is None:
        dt = min(cfl_dt(run_a, stepper.cfl_safety, stepper.scheme), cfl_dt(run_b, stepper.cfl_safety, stepper.scheme))
    final_a = integrate(run_a, replace(stepper, dt=dt, t_end=t_horizon))
    dt_b = kappa * dt if matched_steps else dt
    final_b = integrate(run_b, replace(stepper, dt=dt_b, t_end=kappa * t_horizon))
    difference = VorticityState(
        omega=final_a.omega * (1.0 / kappa) - final_b.omega,
        rho=final_a.rho * (1.0 / kappa) - final_b.rho,
        kappa=1.0,
    )
    reference = final_b.l2_energy()
    if reference == 0:
        return 0.0
    discrepancy = math.sqrt(difference.l2_energy() / reference)
    logger.info(f"time-scaling check kappa={kappa}: discrepancy={discrepancy:.3e} (dt={dt:.3g})")
    return discrepancy
