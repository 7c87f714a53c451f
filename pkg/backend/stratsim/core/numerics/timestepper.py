"""Time integration.

Two schemes: classical RK4 on the full tendency, and the integrating-factor
RK4 (Lawson) that treats the diagonal dispersive operator exactly,

    Y' = L Y + N(Y),    E(h) = exp(L h),

    k1 = N(Y)
    k2 = N(E(h/2) (Y + h/2 k1))
    k3 = N(E(h/2) Y + h/2 k2)
    k4 = N(E(h) Y + h E(h/2) k3)
    Y+ = E(h) Y + h/6 (E(h) k1 + 2 E(h/2) (k2 + k3) + k4)
"""

import math

from collections.abc import Callable
from collections.abc import Iterator
from dataclasses import dataclass
from enum import StrEnum
from functools import partial

import numpy as np

from backend.stratsim.constants import DEFAULT_CFL_SAFETY
from backend.stratsim.constants import DEFAULT_DIAGNOSTIC_STRIDE
from backend.stratsim.core.numerics.model import ModelState
from backend.stratsim.core.numerics.model import VorticityState
from backend.stratsim.core.numerics.model import dispersion_relation
from backend.stratsim.core.numerics.model import to_dispersive
from backend.stratsim.core.numerics.model import to_vorticity
from backend.stratsim.core.numerics.spectral import SpectralField
from backend.stratsim.foundation.exceptions import InvalidArgumentError
from backend.stratsim.foundation.exceptions import NumericalAbortError
from backend.stratsim.settings import get_logger

logger = get_logger()

Tendency = Callable[[np.ndarray], np.ndarray]


class Scheme(StrEnum):
    """Available integrators."""

    RK4 = "rk4"
    IFRK4 = "ifrk4"


@dataclass(frozen=True)
class StepperConfig:
    """Integration parameters.

    Attributes:
        scheme (Scheme): integrator
        dt (float | None): fixed step, None for CFL-adaptive steps
        cfl_safety (float): safety factor in (0, 1) of the adaptive step
        t_end (float): final time
        diagnostic_stride (int): steps between yielded snapshots
        nonlinear (bool): switch the transport terms on or off
    """

    scheme: Scheme = Scheme.IFRK4
    dt: float | None = None
    cfl_safety: float = DEFAULT_CFL_SAFETY
    t_end: float = 1.0
    diagnostic_stride: int = DEFAULT_DIAGNOSTIC_STRIDE
    nonlinear: bool = True

    def __post_init__(self):
        """Validate the parameters."""
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.dt is not None and not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidArgumentError(f"fixed dt must be positive, got {self.dt}")
        if not 0 < self.cfl_safety < 1:
            raise InvalidArgumentError(f"cfl safety must be in (0, 1), got {self.cfl_safety}")
        if not math.isfinite(self.t_end):
            raise InvalidArgumentError(f"t_end must be finite, got {self.t_end}")
        if self.diagnostic_stride < 1:
            raise InvalidArgumentError(f"diagnostic stride must be >= 1, got {self.diagnostic_stride}")


def propagator(field: SpectralField, kappa: float, t: float, sign: int = 1) -> SpectralField:
    """Linear semigroup exp(-+ i t Lambda_kappa).

    Args:
        field (SpectralField): data
        kappa (float): dispersion strength
        t (float): elapsed time
        sign (int): +1 for exp(-i t Lambda) (the Z+ and theta flow), -1 for exp(+i t Lambda). Defaults to 1.

    Returns:
        SpectralField: propagated field; real data stays real
    """
    if sign not in (1, -1):
        raise InvalidArgumentError(f"sign must be +1 or -1, got {sign}")
    phase = np.exp(-1j * sign * t * dispersion_relation(field.grid, kappa))
    return SpectralField(field.grid, phase * field.coeffs, zero_mode_policy=field.zero_mode_policy)


def _check_finite(stacked: np.ndarray, last_valid_time: float):
    if not np.all(np.isfinite(stacked)):
        raise NumericalAbortError(
            f"non-finite coefficients after t={last_valid_time}",
            last_valid_time=last_valid_time,
        )


def step_rk4(
    state: ModelState,
    dt: float,
    rhs: Tendency | None = None,
    nonlinear: bool = True,
) -> ModelState:
    """One classical RK4 step.

    Args:
        state (ModelState): current state
        dt (float): step
        rhs (Tendency | None): tendency on stacked coefficients. Defaults to the state's own.
        nonlinear (bool): include transport when rhs is not given. Defaults to True.

    Raises:
        NumericalAbortError: the new state is not finite

    Returns:
        ModelState: state at time + dt
    """
    f = rhs if rhs is not None else partial(state.tendency, nonlinear=nonlinear)
    y = state.stacked()
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    y_next = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _check_finite(y_next, state.time)
    return state.with_stacked(y_next, state.time + dt)


def step_ifrk4(state: ModelState, dt: float, nonlinear: bool = True) -> ModelState:
    """One integrating-factor RK4 step.

    A VorticityState is stepped through its dispersive unknowns and converted back.

    Args:
        state (ModelState): current state
        dt (float): step
        nonlinear (bool): include transport. Defaults to True.

    Raises:
        NumericalAbortError: the new state is not finite

    Returns:
        ModelState: state at time + dt
    """
    if isinstance(state, VorticityState):
        return to_vorticity(step_ifrk4(to_dispersive(state), dt, nonlinear=nonlinear))
    exponent = state.linear_exponent()
    if exponent is None:
        raise InvalidArgumentError(f"{type(state).__name__} has no diagonal linear part")
    full = np.exp(exponent * dt)
    y = state.stacked()
    if not nonlinear:
        y_next = full * y
    else:
        half = np.exp(exponent * (0.5 * dt))
        f = state.nonlinear_tendency
        k1 = f(y)
        k2 = f(half * (y + 0.5 * dt * k1))
        k3 = f(half * y + 0.5 * dt * k2)
        k4 = f(full * y + dt * half * k3)
        y_next = full * y + dt / 6.0 * (full * k1 + 2.0 * half * (k2 + k3) + k4)
    _check_finite(y_next, state.time)
    return state.with_stacked(y_next, state.time + dt)


def cfl_dt(state: ModelState, safety: float = DEFAULT_CFL_SAFETY, scheme: Scheme = Scheme.IFRK4) -> float:
    """Advective step bound safety * dx / max(1, ||u||_inf).

    Args:
        state (ModelState): current state
        safety (float): safety factor. Defaults to 0.5.
        scheme (Scheme): RK4 additionally resolves the oscillation, dt <= safety / kappa. Defaults to IFRK4.

    Returns:
        float: admissible step
    """
    speed = state.max_speed()
    if not math.isfinite(speed):
        raise NumericalAbortError("non-finite velocity in CFL estimate", last_valid_time=state.time)
    dt = safety * state.grid.spacing / max(1.0, speed)
    if scheme == Scheme.RK4 and state.kappa > 0:
        dt = min(dt, safety / state.kappa)
    return dt


def step(state: ModelState, dt: float, config: StepperConfig) -> ModelState:
    """One step with the configured scheme."""
    if config.scheme == Scheme.RK4:
        return step_rk4(state, dt, nonlinear=config.nonlinear)
    return step_ifrk4(state, dt, nonlinear=config.nonlinear)


def iterate(state: ModelState, config: StepperConfig) -> Iterator[ModelState]:
    """Advance to config.t_end, yielding snapshots.

    The initial state, every diagnostic_stride-th state and the final state are
    yielded. A fixed dt is shrunk to the nearest uniform step that lands exactly
    on t_end.

    Args:
        state (ModelState): initial state
        config (StepperConfig): integration parameters

    Yields:
        ModelState: snapshots in increasing time
    """
    t0 = state.time
    span = config.t_end - t0
    if span < 0:
        raise InvalidArgumentError(f"t_end={config.t_end} lies before the state time {t0}")
    yield state
    if span == 0:
        return
    fixed_steps = None
    if config.dt is not None:
        fixed_steps = max(1, math.ceil(span / config.dt - 1e-9))
        fixed_dt = span / fixed_steps
    count = 0
    while True:
        if fixed_steps is not None:
            if count == fixed_steps:
                break
            dt = fixed_dt
        else:
            remaining = config.t_end - state.time
            if remaining <= 1e-12 * max(1.0, abs(config.t_end)):
                break
            dt = min(cfl_dt(state, config.cfl_safety, config.scheme), remaining)
        state = step(state, dt, config)
        count += 1
        if fixed_steps is not None:
            # uniform time labels, no accumulated round-off
            state = state.with_stacked(state.stacked(), t0 + count * fixed_dt)
        finished = fixed_steps is not None and count == fixed_steps
        if count % config.diagnostic_stride == 0 or finished:
            logger.debug(f"step {count}: t={state.time:.6g}, dt={dt:.3g}")
            yield state
    if fixed_steps is None and count % config.diagnostic_stride != 0:
        yield state


def integrate(state: ModelState, config: StepperConfig) -> ModelState:
    """Final state of iterate()."""
    final = state
    for final in iterate(state, config):
        pass
    return final
