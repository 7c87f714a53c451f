"""Measured norms, decay fits and estimate ratios.

All constant-level checks built on this module are boundedness or scaling
checks; the functions return measured ratios, never pass/fail verdicts.
"""

import math

from collections.abc import Callable
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field

import numpy as np

from scipy.integrate import cumulative_trapezoid
from scipy.integrate import trapezoid
from scipy.stats import linregress

from backend.stratsim.constants import FIT_R2_FLAG
from backend.stratsim.constants import MIN_SAMPLES_PER_DECADE
from backend.stratsim.core.numerics.littlewood_paley import BandRange
from backend.stratsim.core.numerics.littlewood_paley import besov_norm
from backend.stratsim.core.numerics.littlewood_paley import lp_norm
from backend.stratsim.core.numerics.littlewood_paley import project_band
from backend.stratsim.core.numerics.littlewood_paley import sobolev_norm
from backend.stratsim.core.numerics.model import ModelState
from backend.stratsim.core.numerics.model import SqgState
from backend.stratsim.core.numerics.model import VorticityState
from backend.stratsim.core.numerics.model import ZState
from backend.stratsim.core.numerics.model import perp_grad_inv_mod
from backend.stratsim.core.numerics.model import to_dispersive
from backend.stratsim.core.numerics.spectral import SpectralField
from backend.stratsim.core.numerics.spectral import fft_forward
from backend.stratsim.core.numerics.spectral import fft_inverse
from backend.stratsim.core.numerics.spectral import pad
from backend.stratsim.core.numerics.timestepper import propagator
from backend.stratsim.foundation.exceptions import GridMismatchError
from backend.stratsim.foundation.exceptions import InsufficientDataError
from backend.stratsim.foundation.exceptions import InvalidArgumentError
from backend.stratsim.foundation.exceptions import NonzeroMeanError
from backend.stratsim.foundation.utils import samples_per_decade
from backend.stratsim.settings import get_logger

logger = get_logger()

DEFAULT_TIME_SAMPLES = 257


@dataclass(frozen=True)
class NormReport:
    """Norms of a state at one time plus running time integrals.

    Attributes:
        time (float): sample time
        sobolev_hn (float): ||u||_{H^n} + ||rho||_{H^n} (||theta||_{H^n} for SQG)
        besov_b1_inf_1 (float): ||Z+||_{B^1_{inf,1}} + ||Z-||_{B^1_{inf,1}} (||theta||_{B^1_{inf,1}} for SQG)
        grad_linf (float): ||grad(u, rho)||_{L^inf}
        l2_energy (float): conserved quadratic energy
        accumulated_bootstrap (float): integral of besov_b1_inf_1 from the first sample
        accumulated_blowup (float): integral of grad_linf from the first sample
    """

    time: float
    sobolev_hn: float
    besov_b1_inf_1: float
    grad_linf: float
    l2_energy: float
    accumulated_bootstrap: float = 0.0
    accumulated_blowup: float = 0.0


def _field(state: ModelState, coeffs: np.ndarray) -> SpectralField:
    return SpectralField(state.grid, coeffs, zero_mode_policy=True)


def primitive_coeffs(state: ModelState) -> list[np.ndarray]:
    """Coefficients of (u1, u2, rho), or (u1, u2, theta) for SQG."""
    stacked = state.stacked()
    u1, u2 = state.velocity_coeffs(stacked)
    match state:
        case VorticityState():
            scalar = stacked[1]
        case ZState():
            scalar = 0.5 * (stacked[0] - stacked[1])
        case SqgState():
            scalar = stacked[0]
        case _:
            raise InvalidArgumentError(f"unsupported state {type(state).__name__}")
    return [u1, u2, scalar]


def combined_sobolev_norm(state: ModelState, n: float) -> float:
    """||u||_{H^n} + ||rho||_{H^n} with ||u||^2 = ||u1||^2 + ||u2||^2; ||theta||_{H^n} for SQG."""
    if isinstance(state, SqgState):
        return sobolev_norm(state.theta, n)
    u1, u2, rho = (_field(state, coeffs) for coeffs in primitive_coeffs(state))
    return math.hypot(sobolev_norm(u1, n), sobolev_norm(u2, n)) + sobolev_norm(rho, n)


def bootstrap_besov_norm(state: ModelState) -> float:
    """Inhomogeneous B^1_{inf,1} size of the dispersive unknowns."""
    match state:
        case SqgState():
            return besov_norm(state.theta, 1, math.inf, 1, homogeneous=False)
        case VorticityState():
            state = to_dispersive(state)
    return besov_norm(state.z_plus, 1, math.inf, 1, homogeneous=False) + besov_norm(
        state.z_minus, 1, math.inf, 1, homogeneous=False
    )


def blowup_functional(state: ModelState) -> float:
    """Pointwise continuation functional max_x (|grad u|^2 + |grad rho|^2)^(1/2).

    Gradients are taken spectrally and the maximum over the physical samples.

    Args:
        state (ModelState): any formulation

    Returns:
        float: ||grad(u, rho)||_{L^inf}, 0 for the zero state
    """
    xi1, xi2 = state.grid.odd_xi
    total = np.zeros((state.grid.n, state.grid.n))
    for coeffs in primitive_coeffs(state):
        total += np.real(fft_inverse(1j * xi1 * coeffs)) ** 2 + np.real(fft_inverse(1j * xi2 * coeffs)) ** 2
    return float(np.sqrt(np.max(total)))


def norm_report(state: ModelState, n_regularity: float) -> NormReport:
    """Instantaneous NormReport (accumulated entries zero)."""
    return NormReport(
        time=state.time,
        sobolev_hn=combined_sobolev_norm(state, n_regularity),
        besov_b1_inf_1=bootstrap_besov_norm(state),
        grad_linf=blowup_functional(state),
        l2_energy=state.l2_energy(),
    )


@dataclass
class NormTracker:
    """Collects NormReports along a trajectory with trapezoid time integrals.

    Attributes:
        n_regularity (float): Sobolev index of sobolev_hn
        reports (list[NormReport]): reports in time order
    """

    n_regularity: float
    reports: list[NormReport] = field(default_factory=list)

    def record(self, state: ModelState) -> NormReport:
        """Measure a state and append its report.

        Args:
            state (ModelState): snapshot later than the previous one

        Raises:
            InvalidArgumentError: snapshot earlier than the last recorded one

        Returns:
            NormReport: with accumulated integrals up to state.time
        """
        current = norm_report(state, self.n_regularity)
        if self.reports:
            previous = self.reports[-1]
            dt = current.time - previous.time
            if dt < 0:
                raise InvalidArgumentError(f"snapshot at t={current.time} precedes t={previous.time}")
            current = NormReport(
                time=current.time,
                sobolev_hn=current.sobolev_hn,
                besov_b1_inf_1=current.besov_b1_inf_1,
                grad_linf=current.grad_linf,
                l2_energy=current.l2_energy,
                accumulated_bootstrap=previous.accumulated_bootstrap
                + 0.5 * dt * (previous.besov_b1_inf_1 + current.besov_b1_inf_1),
                accumulated_blowup=previous.accumulated_blowup + 0.5 * dt * (previous.grad_linf + current.grad_linf),
            )
        self.reports.append(current)
        return current

    @property
    def latest(self) -> NormReport | None:
        """Most recent report."""
        return self.reports[-1] if self.reports else None


def _validated_series(reports: Sequence[NormReport], attribute: str) -> tuple[np.ndarray, np.ndarray]:
    times = np.array([report.time for report in reports], dtype=np.float64)
    values = np.array([getattr(report, attribute) for report in reports], dtype=np.float64)
    if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
        raise InvalidArgumentError(f"non-finite entries in the {attribute} series")
    if np.any(np.diff(times) < 0):
        raise InvalidArgumentError("reports are not sorted by time")
    return times, values


def bootstrap_norm(reports: Sequence[NormReport]) -> float:
    """Trapezoid integral of besov_b1_inf_1 over the report times.

    Args:
        reports (Sequence[NormReport]): reports sorted by time

    Raises:
        InvalidArgumentError: unsorted or non-finite series

    Returns:
        float: L^1_t B^1_{inf,1} norm over the sampled window
    """
    times, values = _validated_series(reports, "besov_b1_inf_1")
    if times.size < 2:
        return 0.0
    return float(trapezoid(values, times))


def blowup_integral(reports: Sequence[NormReport]) -> float:
    """Trapezoid integral of grad_linf over the report times."""
    times, values = _validated_series(reports, "grad_linf")
    if times.size < 2:
        return 0.0
    return float(trapezoid(values, times))


def gronwall_constant(reports: Sequence[NormReport]) -> float:
    """Implied K in ||U(t)||^2_{H^n} <= ||U0||^2_{H^n} exp(K int_0^t ||grad(u, rho)||_inf).

    Args:
        reports (Sequence[NormReport]): tracker output with accumulated integrals

    Returns:
        float: max over samples of log(||U(t)||^2 / ||U0||^2) / accumulated_blowup, at least 0
    """
    _validated_series(reports, "sobolev_hn")
    if not reports or reports[0].sobolev_hn == 0:
        return 0.0
    initial = reports[0].sobolev_hn
    constant = 0.0
    for report in reports[1:]:
        if report.accumulated_blowup > 0 and report.sobolev_hn > 0:
            growth = 2.0 * math.log(report.sobolev_hn / initial)
            constant = max(constant, growth / report.accumulated_blowup)
    return constant


def decay_window(grid_length: float, kappa: float) -> float:
    """Anti-wraparound cap L / (4 kappa) for linear-propagator measurements."""
    if kappa <= 0:
        raise InvalidArgumentError(f"kappa must be positive, got {kappa}")
    return grid_length / (4.0 * kappa)


def log_times(t_min: float, t_max: float, per_decade: int = 2 * MIN_SAMPLES_PER_DECADE) -> np.ndarray:
    """Logarithmically spaced sample times with a given density per decade."""
    if not 0 < t_min < t_max:
        raise InvalidArgumentError(f"need 0 < t_min < t_max, got {t_min}, {t_max}")
    count = max(2, math.ceil(per_decade * math.log10(t_max / t_min)) + 1)
    return np.geomspace(t_min, t_max, count)


@dataclass(frozen=True)
class DecayFit:
    """Log-log fit of the sup norm of a linearly evolved band.

    Attributes:
        band (int): dyadic index k
        times (np.ndarray): sample times
        sup_norms (np.ndarray): ||exp(it Lambda) P_k f||_inf at the sample times
        slope (float): fitted exponent of the sup norm
        intercept (float): fitted log-amplitude
        r_squared (float): coefficient of determination
        window (tuple[float, float]): (t_min, t_max)
        constant_ratios (np.ndarray): ||.||_inf (kappa t)^(1/2) / (2^(2k) ||P_k f||_{L^1})
        lp_slopes (dict[float, float]): fitted exponents of the L^p norms
    """

    band: int
    times: np.ndarray
    sup_norms: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    constant_ratios: np.ndarray
    lp_slopes: dict[float, float] = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        """Fit quality below the acceptance threshold."""
        return self.r_squared < FIT_R2_FLAG

    @property
    def max_constant_ratio(self) -> float:
        """Largest measured decay constant."""
        return float(np.max(self.constant_ratios))


def linear_decay_fit(
    f0: SpectralField,
    kappa: float,
    k: int,
    times: Sequence[float],
    p_values: Sequence[float] = (),
) -> DecayFit:
    """Fit the decay exponent of exp(i t Lambda_kappa) P_k f0.

    Args:
        f0 (SpectralField): initial data, projected onto band k here
        kappa (float): dispersion strength > 0
        k (int): band index
        times (Sequence[float]): increasing positive times inside [0, L / (4 kappa)]
        p_values (Sequence[float]): extra finite exponents p whose L^p decay is fitted. Defaults to ().

    Raises:
        InvalidArgumentError: window violation or empty band
        InsufficientDataError: fewer than 8 samples per decade

    Returns:
        DecayFit: fitted sup-norm decay
    """
    times = np.asarray(times, dtype=np.float64)
    t_cap = decay_window(f0.grid.domain_length, kappa)
    if times.size < 2 or times[0] <= 0 or np.any(np.diff(times) <= 0):
        raise InvalidArgumentError("sample times must be positive and strictly increasing")
    if times[-1] > t_cap * (1 + 1e-12):
        raise InvalidArgumentError(f"t_max={times[-1]} exceeds the anti-wraparound cap {t_cap}")
    if times.size < MIN_SAMPLES_PER_DECADE or samples_per_decade(times[0], times[-1], times.size) < MIN_SAMPLES_PER_DECADE:
        raise InsufficientDataError(f"decay fit needs >= {MIN_SAMPLES_PER_DECADE} samples per decade")
    piece = project_band(f0, k)
    l1 = lp_norm(piece, 1)
    if l1 == 0:
        raise InvalidArgumentError(f"initial data has no content in band {k}")
    sup_norms = np.empty(times.size)
    lp_samples = {float(p): np.empty(times.size) for p in p_values}
    for index, t in enumerate(times):
        evolved = propagator(piece, kappa, t, sign=-1)
        sup_norms[index] = lp_norm(evolved, math.inf)
        for p, samples in lp_samples.items():
            samples[index] = lp_norm(evolved, p)
    log_t = np.log(times)
    fit = linregress(log_t, np.log(sup_norms))
    r_squared = float(fit.rvalue**2)
    if r_squared < FIT_R2_FLAG:
        logger.warning(f"decay fit for band {k} has R^2={r_squared:.4f}")
    lp_slopes = {p: float(linregress(log_t, np.log(samples)).slope) for p, samples in lp_samples.items()}
    logger.debug(f"band {k}: slope={fit.slope:.4f}, R^2={r_squared:.4f}, lp slopes={lp_slopes}")
    return DecayFit(
        band=k,
        times=times,
        sup_norms=sup_norms,
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=r_squared,
        window=(float(times[0]), float(times[-1])),
        constant_ratios=sup_norms * np.sqrt(kappa * times) / (2.0 ** (2 * k) * l1),
        lp_slopes=lp_slopes,
    )


def admissible_r(q: float) -> float:
    """Space exponent r of the half-admissible pair 1/q + 1/(2r) = 1/4.

    Args:
        q (float): time exponent, >= 4 or infinity

    Raises:
        InvalidArgumentError: q < 4

    Returns:
        float: r, infinite at q = 4 and 2 at q = infinity
    """
    if math.isnan(q) or q < 4:
        raise InvalidArgumentError(f"time exponent must be >= 4, got {q}")
    if q == 4:
        return math.inf
    if math.isinf(q):
        return 2.0
    return 2.0 * q / (q - 4.0)


def _space_time_norm(times: np.ndarray, spatial: np.ndarray, q: float) -> float:
    if math.isinf(q):
        return float(np.max(spatial))
    return float(trapezoid(spatial**q, times) ** (1.0 / q))


def _strichartz_scale(kappa: float, q: float, k: int) -> float:
    if math.isinf(q):
        return 1.0
    return kappa ** (-1.0 / q) * 2.0 ** (4.0 * k / q)


def _horizon(grid_length: float, kappa: float, horizon: float | None) -> float:
    cap = decay_window(grid_length, kappa)
    if horizon is None:
        return cap
    if not 0 < horizon <= cap * (1 + 1e-12):
        raise InvalidArgumentError(f"horizon must lie in (0, {cap}], got {horizon}")
    return horizon


@dataclass(frozen=True)
class StrichartzMeasurement:
    """Finite-horizon space-time norm against its predicted scale.

    Attributes:
        q (float): time exponent
        r (float): space exponent
        band (int): dyadic index
        kappa (float): dispersion strength
        horizon (float): time window [0, horizon]
        lhs (float): measured L^q_t L^r_x norm
        predicted (float): kappa^(-1/q) 2^(4k/q) times the data norm
        ratio (float): lhs / predicted, 0 for vanishing data
    """

    q: float
    r: float
    band: int
    kappa: float
    horizon: float
    lhs: float
    predicted: float
    ratio: float


def strichartz_measurement(
    f0: SpectralField,
    kappa: float,
    q: float,
    k: int,
    horizon: float | None = None,
    samples: int = DEFAULT_TIME_SAMPLES,
) -> StrichartzMeasurement:
    """Measure ||exp(i t Lambda_kappa) P_k f0||_{L^q_t L^r_x} on [0, horizon].

    Args:
        f0 (SpectralField): data
        kappa (float): dispersion strength > 0
        q (float): time exponent >= 4, r follows from admissibility
        k (int): band index
        horizon (float | None): time window, at most L / (4 kappa). Defaults to the cap.
        samples (int): uniform time samples of the quadrature. Defaults to 257.

    Returns:
        StrichartzMeasurement: measured and predicted values
    """
    r = admissible_r(q)
    horizon = _horizon(f0.grid.domain_length, kappa, horizon)
    piece = project_band(f0, k)
    times = np.linspace(0.0, horizon, samples)
    spatial = np.array([lp_norm(propagator(piece, kappa, t, sign=-1), r) for t in times])
    lhs = _space_time_norm(times, spatial, q)
    predicted = _strichartz_scale(kappa, q, k) * piece.l2_norm()
    ratio = lhs / predicted if predicted > 0 else 0.0
    return StrichartzMeasurement(q=q, r=r, band=k, kappa=kappa, horizon=horizon, lhs=lhs, predicted=predicted, ratio=ratio)


def strichartz_ratio(
    f0: SpectralField,
    kappa: float,
    q: float,
    k: int,
    horizon: float | None = None,
    samples: int = DEFAULT_TIME_SAMPLES,
) -> float:
    """LHS / (kappa^(-1/q) 2^(4k/q) ||P_k f0||_{L^2}) of the homogeneous estimate."""
    return strichartz_measurement(f0, kappa, q, k, horizon=horizon, samples=samples).ratio


def duhamel_strichartz_measurement(
    forcing: Callable[[float], SpectralField],
    kappa: float,
    q: float,
    k: int,
    horizon: float,
    samples: int = DEFAULT_TIME_SAMPLES,
) -> StrichartzMeasurement:
    """Measure the Duhamel term int_0^t exp(i (t - s) Lambda_kappa) P_k F(s) ds.

    The integral is accumulated with the cumulative trapezoid rule on the
    pulled-back integrand exp(-i s Lambda) P_k F(s); the propagator is exact.

    Args:
        forcing (Callable[[float], SpectralField]): F(s)
        kappa (float): dispersion strength > 0
        q (float): time exponent >= 4
        k (int): band index
        horizon (float): time window, at most L / (4 kappa)
        samples (int): uniform time samples. Defaults to 257.

    Raises:
        InvalidArgumentError: q < 4, or a horizon outside the window; only F(0) is sampled before the check

    Returns:
        StrichartzMeasurement: predicted uses ||P_k F||_{L^1_t L^2_x}
    """
    r = admissible_r(q)
    first = project_band(forcing(0.0), k)
    grid = first.grid
    horizon = _horizon(grid.domain_length, kappa, horizon)
    times = np.linspace(0.0, horizon, samples)
    pieces = [first, *(project_band(forcing(float(s)), k) for s in times[1:])]
    pulled_back = np.stack([propagator(piece, kappa, s, sign=1).coeffs for piece, s in zip(pieces, times, strict=True)])
    accumulated = cumulative_trapezoid(pulled_back, times, axis=0, initial=0)
    spatial = np.array(
        [lp_norm(propagator(SpectralField(grid, coeffs), kappa, t, sign=-1), r) for coeffs, t in zip(accumulated, times, strict=True)]
    )
    lhs = _space_time_norm(times, spatial, q)
    forcing_norm = float(trapezoid([piece.l2_norm() for piece in pieces], times))
    predicted = _strichartz_scale(kappa, q, k) * forcing_norm
    ratio = lhs / predicted if predicted > 0 else 0.0
    return StrichartzMeasurement(q=q, r=r, band=k, kappa=kappa, horizon=horizon, lhs=lhs, predicted=predicted, ratio=ratio)


def duhamel_strichartz_ratio(
    forcing: Callable[[float], SpectralField],
    kappa: float,
    q: float,
    k: int,
    horizon: float,
    samples: int = DEFAULT_TIME_SAMPLES,
) -> float:
    """Measured / predicted ratio of the inhomogeneous estimate with dual pair (inf, 2)."""
    return duhamel_strichartz_measurement(forcing, kappa, q, k, horizon, samples=samples).ratio


def bootstrap_linear_bound_ratio(
    f0: SpectralField,
    kappa: float,
    tau: float,
    q: float = 4.0,
    delta: float = 0.5,
    samples: int = DEFAULT_TIME_SAMPLES,
) -> float:
    """||exp(i t Lambda) f0||_{L^1_tau B^1_{inf,1}} / (tau^(1-1/q) kappa^(-1/q) ||f0||_{H^(2+delta)}).

    Args:
        f0 (SpectralField): data
        kappa (float): dispersion strength > 0
        tau (float): time window, at most L / (4 kappa)
        q (float): Strichartz time exponent. Defaults to 4.
        delta (float): regularity surplus. Defaults to 0.5.
        samples (int): uniform time samples. Defaults to 257.

    Returns:
        float: measured ratio, 0 for vanishing data
    """
    admissible_r(q)
    tau = _horizon(f0.grid.domain_length, kappa, tau)
    times = np.linspace(0.0, tau, samples)
    besov = [besov_norm(propagator(f0, kappa, t, sign=-1), 1, math.inf, 1, homogeneous=False) for t in times]
    lhs = float(trapezoid(besov, times))
    rhs = tau ** (1.0 - 1.0 / q) * kappa ** (-1.0 / q) * sobolev_norm(f0, 2.0 + delta)
    return lhs / rhs if rhs > 0 else 0.0


def _physical(coeffs: np.ndarray) -> np.ndarray:
    return np.real(fft_inverse(coeffs))


def product_estimate_ratio(f: SpectralField, g: SpectralField, m: float) -> float:
    """(||u . grad f||_{H^m} + ||u . |grad| f||_{H^m}) / RHS with u = grad_perp |grad|^-1 g.

    RHS = ||g||_{H^m} ||f||_{B-dot^1_{inf,1}} + ||g||_{B-dot^0_{inf,1}} ||f||_{H^(m+1)}. The products
    are formed without truncation on the zero-padded 2n grid.

    Args:
        f (SpectralField): mean-zero field
        g (SpectralField): mean-zero field generating the velocity
        m (float): regularity >= 0

    Raises:
        NonzeroMeanError: f or g has a nonzero mean
        GridMismatchError: f and g live on different grids

    Returns:
        float: LHS / RHS, 0 when RHS vanishes
    """
    if f.grid != g.grid:
        raise GridMismatchError("f and g must share a grid")
    if not (f.is_mean_zero() and g.is_mean_zero()):
        raise NonzeroMeanError("product estimate needs mean-zero f and g")
    rhs = sobolev_norm(g, m) * besov_norm(f, 1, math.inf, 1) + besov_norm(g, 0, math.inf, 1) * sobolev_norm(f, m + 1)
    if rhs == 0:
        return 0.0
    big_f = pad(f.without_mean(), 2 * f.grid.n)
    big_g = pad(g.without_mean(), 2 * g.grid.n)
    grid = big_f.grid
    xi1, xi2 = grid.odd_xi
    u1_hat, u2_hat = perp_grad_inv_mod(grid, big_g.coeffs)
    u1, u2 = _physical(u1_hat), _physical(u2_hat)
    advective = u1 * _physical(1j * xi1 * big_f.coeffs) + u2 * _physical(1j * xi2 * big_f.coeffs)
    modulus = _physical(grid.abs_xi * big_f.coeffs)

    def hm(samples: np.ndarray) -> float:
        return sobolev_norm(SpectralField(grid, fft_forward(samples)), m)

    lhs = hm(advective) + math.hypot(hm(u1 * modulus), hm(u2 * modulus))
    return lhs / rhs


def summation_ratio(f: SpectralField, l: float = 2.0, delta: float = 0.5) -> float:  # noqa: E741
    """sum_k 2^(l k) ||P_k f||_{L^2} / ||f||_{H^(l + delta)}; 0 for the zero field."""
    denominator = sobolev_norm(f, l + delta)
    if denominator == 0:
        return 0.0
    total = sum(2.0 ** (l * k) * project_band(f, k).l2_norm() for k in BandRange.for_grid(f.grid))
    return total / denominator
