"""The three equivalent formulations of the dynamics.

* VorticityState (omega, rho):
      d_t omega + u . grad omega = -kappa d_1 rho
      d_t rho   + u . grad rho   =  kappa d_1 Delta^-1 omega,    u = grad_perp Delta^-1 omega
* ZState (Z+, Z-) with Z+- = |grad|^-1 omega +- rho:
      d_t Z+- = -+ i Lambda_kappa Z+- - NL+-,   NL+- = |grad|^-1 (u . grad omega) +- u . grad rho
  where u = -1/2 grad_perp |grad|^-1 (Z+ + Z-), rho = (Z+ - Z-)/2, omega = |grad| (Z+ + Z-)/2.
* SqgState theta:
      d_t theta + u . grad theta = kappa R_1 theta,    u = grad_perp |grad|^-1 theta

Transport terms are products in physical space followed by dealiasing; all
states are mean-zero and the tendencies keep the zero mode exactly zero.
"""

import abc

from dataclasses import dataclass
from dataclasses import fields
from dataclasses import replace
from typing import ClassVar
from typing import NamedTuple
from typing import Self

import numpy as np

from backend.stratsim.core.numerics.littlewood_paley import homogeneous_sobolev_norm
from backend.stratsim.core.numerics.spectral import GridSpec
from backend.stratsim.core.numerics.spectral import SpectralField
from backend.stratsim.core.numerics.spectral import VectorField
from backend.stratsim.core.numerics.spectral import fft_forward
from backend.stratsim.core.numerics.spectral import fft_inverse
from backend.stratsim.foundation.exceptions import GridMismatchError
from backend.stratsim.foundation.exceptions import InvalidArgumentError
from backend.stratsim.foundation.exceptions import NonzeroMeanError

ENERGY_FLOOR = 1e-300


def _physical(coeffs: np.ndarray) -> np.ndarray:
    return np.real(fft_inverse(coeffs))


def transport(grid: GridSpec, u1: np.ndarray, u2: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Dealiased coefficients of u . grad f for a divergence-free u given in physical space.

    Args:
        grid (GridSpec): lattice
        u1 (np.ndarray): first velocity component, physical samples
        u2 (np.ndarray): second velocity component, physical samples
        coeffs (np.ndarray): coefficients of f

    Returns:
        np.ndarray: coefficients of the product, zero mode exactly zero (divergence form)
    """
    xi1, xi2 = grid.odd_xi
    product = u1 * _physical(1j * xi1 * coeffs) + u2 * _physical(1j * xi2 * coeffs)
    out = fft_forward(product) * grid.dealias_mask
    out[0, 0] = 0.0
    return out


def perp_grad_inv_mod(grid: GridSpec, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of grad_perp |grad|^-1 f, with grad_perp = (-d_2, d_1)."""
    xi1, xi2 = grid.odd_xi
    return -1j * xi2 * grid.inv_abs_xi * coeffs, 1j * xi1 * grid.inv_abs_xi * coeffs


def dispersion_relation(grid: GridSpec, kappa: float) -> np.ndarray:
    """Lambda_kappa(xi) = kappa xi_1 / |xi| on the lattice (0 at xi = 0)."""
    return kappa * grid.odd_xi[0] * grid.inv_abs_xi


@dataclass(frozen=True, eq=False)
class ModelState(abc.ABC):
    """Base of the immutable dynamical states.

    Subclasses declare their field components in COMPONENTS; the integrators work on
    the stacked (components, n, n) coefficient array.
    """

    COMPONENTS: ClassVar[tuple[str, ...]] = ()

    def __post_init__(self):
        """Validate parameters, shared grid and mean-zero data."""
        kappa = getattr(self, "kappa")
        if not np.isfinite(kappa) or kappa < 0:
            raise InvalidArgumentError(f"kappa must be finite and >= 0, got {kappa}")
        grids = {self.component(name).grid for name in self.COMPONENTS}
        if len(grids) != 1:
            raise GridMismatchError("state components live on different grids")
        for name in self.COMPONENTS:
            field = self.component(name)
            if not field.is_mean_zero():
                raise NonzeroMeanError(f"{name} must be mean-zero, mean is {field.mean}")
            if not field.zero_mode_policy:
                object.__setattr__(self, name, field.without_mean())

    def component(self, name: str) -> SpectralField:
        """Field component by name."""
        return getattr(self, name)

    @property
    def grid(self) -> GridSpec:
        """Grid shared by all components."""
        return self.component(self.COMPONENTS[0]).grid

    def stacked(self) -> np.ndarray:
        """Coefficients of all components as one (components, n, n) array."""
        return np.stack([self.component(name).coeffs for name in self.COMPONENTS])

    def with_stacked(self, stacked: np.ndarray, time: float) -> Self:
        """New state of the same kind from a stacked coefficient array."""
        values = {}
        for index, name in enumerate(self.COMPONENTS):
            coeffs = np.array(stacked[index], dtype=np.complex128)
            coeffs[0, 0] = 0.0
            values[name] = SpectralField(self.grid, coeffs, zero_mode_policy=True)
        return replace(self, time=float(time), **values)

    def with_kappa(self, kappa: float) -> Self:
        """Same fields, other dispersion strength."""
        return replace(self, kappa=float(kappa))

    def scaled(self, factor: float) -> Self:
        """All components multiplied by a constant."""
        return self.with_stacked(factor * self.stacked(), self.time)

    @abc.abstractmethod
    def velocity_coeffs(self, stacked: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Velocity coefficients of a stacked state."""
        raise NotImplementedError

    @abc.abstractmethod
    def nonlinear_tendency(self, stacked: np.ndarray) -> np.ndarray:
        """Transport part of the tendency of a stacked state."""
        raise NotImplementedError

    @abc.abstractmethod
    def linear_tendency(self, stacked: np.ndarray) -> np.ndarray:
        """Dispersive part of the tendency of a stacked state."""
        raise NotImplementedError

    def linear_exponent(self) -> np.ndarray | None:
        """Diagonal linear operator per component, or None when the linear part is not diagonal."""
        return None

    @abc.abstractmethod
    def l2_energy(self) -> float:
        """Conserved quadratic energy of the state."""
        raise NotImplementedError

    def tendency(self, stacked: np.ndarray | None = None, nonlinear: bool = True) -> np.ndarray:
        """Full tendency (linear + transport) of a stacked state, defaulting to this state."""
        if stacked is None:
            stacked = self.stacked()
        out = self.linear_tendency(stacked)
        if nonlinear:
            out = out + self.nonlinear_tendency(stacked)
        return out

    def velocity(self) -> VectorField:
        """Velocity of this state."""
        u1, u2 = self.velocity_coeffs(self.stacked())
        return VectorField(
            SpectralField(self.grid, u1, zero_mode_policy=True),
            SpectralField(self.grid, u2, zero_mode_policy=True),
        )

    def max_speed(self) -> float:
        """max_x |u(x)|."""
        u1, u2 = self.velocity_coeffs(self.stacked())
        return float(np.max(np.hypot(_physical(u1), _physical(u2))))

    def _physical_velocity(self, stacked: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        u1, u2 = self.velocity_coeffs(stacked)
        return _physical(u1), _physical(u2)


@dataclass(frozen=True, eq=False)
class VorticityState(ModelState):
    """Boussinesq perturbation in vorticity form.

    Attributes:
        omega (SpectralField): vorticity
        rho (SpectralField): density perturbation
        kappa (float): stratification strength
        time (float): time
    """

    COMPONENTS: ClassVar[tuple[str, ...]] = ("omega", "rho")

    omega: SpectralField
    rho: SpectralField
    kappa: float
    time: float = 0.0

    def velocity_coeffs(self, stacked: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """u = grad_perp Delta^-1 omega."""
        xi1, xi2 = self.grid.odd_xi
        stream = -(self.grid.inv_abs_xi**2) * stacked[0]
        return -1j * xi2 * stream, 1j * xi1 * stream

    def nonlinear_tendency(self, stacked: np.ndarray) -> np.ndarray:
        """-(u . grad omega, u . grad rho)."""
        u1, u2 = self._physical_velocity(stacked)
        return -np.stack([transport(self.grid, u1, u2, stacked[0]), transport(self.grid, u1, u2, stacked[1])])

    def linear_tendency(self, stacked: np.ndarray) -> np.ndarray:
        """(-kappa d_1 rho, kappa d_1 Delta^-1 omega)."""
        xi1 = self.grid.odd_xi[0]
        inv2 = self.grid.inv_abs_xi**2
        return np.stack([-1j * self.kappa * xi1 * stacked[1], -1j * self.kappa * xi1 * inv2 * stacked[0]])

    def l2_energy(self) -> float:
        """||u||^2 + ||rho||^2."""
        return self.velocity().l2_norm() ** 2 + self.rho.l2_norm() ** 2


@dataclass(frozen=True, eq=False)
class ZState(ModelState):
    """Boussinesq perturbation in dispersive unknowns.

    Attributes:
        z_plus (SpectralField): Z+ = |grad|^-1 omega + rho
        z_minus (SpectralField): Z- = |grad|^-1 omega - rho
        kappa (float): stratification strength
        time (float): time
    """

    COMPONENTS: ClassVar[tuple[str, ...]] = ("z_plus", "z_minus")

    z_plus: SpectralField
    z_minus: SpectralField
    kappa: float
    time: float = 0.0

    def velocity_coeffs(self, stacked: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """u = -1/2 grad_perp |grad|^-1 (Z+ + Z-)."""
        u1, u2 = perp_grad_inv_mod(self.grid, stacked[0] + stacked[1])
        return -0.5 * u1, -0.5 * u2

    def nonlinear_tendency(self, stacked: np.ndarray) -> np.ndarray:
        """-NL+- = -(|grad|^-1 (u . grad omega) +- u . grad rho)."""
        u1, u2 = self._physical_velocity(stacked)
        omega = 0.5 * self.grid.abs_xi * (stacked[0] + stacked[1])
        rho = 0.5 * (stacked[0] - stacked[1])
        vortical = self.grid.inv_abs_xi * transport(self.grid, u1, u2, omega)
        buoyant = transport(self.grid, u1, u2, rho)
        return -np.stack([vortical + buoyant, vortical - buoyant])

    def linear_exponent(self) -> np.ndarray:
        """(-i Lambda_kappa, +i Lambda_kappa)."""
        dispersion = dispersion_relation(self.grid, self.kappa)
        return np.stack([-1j * dispersion, 1j * dispersion])

    def linear_tendency(self, stacked: np.ndarray) -> np.ndarray:
        """-+ i Lambda_kappa Z+-."""
        return self.linear_exponent() * stacked

    def l2_energy(self) -> float:
        """(||Z+||^2 + ||Z-||^2) / 2, equal to ||u||^2 + ||rho||^2."""
        return 0.5 * (self.z_plus.l2_norm() ** 2 + self.z_minus.l2_norm() ** 2)


@dataclass(frozen=True, eq=False)
class SqgState(ModelState):
    """Dispersive SQG temperature.

    Attributes:
        theta (SpectralField): temperature
        kappa (float): dispersion strength
        time (float): time
    """

    COMPONENTS: ClassVar[tuple[str, ...]] = ("theta",)

    theta: SpectralField
    kappa: float
    time: float = 0.0

    def velocity_coeffs(self, stacked: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """u = grad_perp (-Delta)^-1/2 theta."""
        return perp_grad_inv_mod(self.grid, stacked[0])

    def nonlinear_tendency(self, stacked: np.ndarray) -> np.ndarray:
        """-u . grad theta."""
        u1, u2 = self._physical_velocity(stacked)
        return -transport(self.grid, u1, u2, stacked[0])[np.newaxis]

    def linear_exponent(self) -> np.ndarray:
        """kappa R_1 = -i Lambda_kappa."""
        return (-1j * dispersion_relation(self.grid, self.kappa))[np.newaxis]

    def linear_tendency(self, stacked: np.ndarray) -> np.ndarray:
        """kappa R_1 theta."""
        return self.linear_exponent() * stacked

    def l2_energy(self) -> float:
        """||theta||^2."""
        return self.theta.l2_norm() ** 2


class PrimitiveFields(NamedTuple):
    """(u, rho, omega) reconstructed from the dispersive unknowns."""

    u: VectorField
    rho: SpectralField
    omega: SpectralField


def to_dispersive(state: VorticityState) -> ZState:
    """Z+- = |grad|^-1 omega +- rho.

    Args:
        state (VorticityState): mean-zero vorticity state

    Returns:
        ZState: dispersive unknowns at the same time
    """
    potential = state.grid.inv_abs_xi * state.omega.coeffs
    return ZState(
        z_plus=SpectralField(state.grid, potential + state.rho.coeffs, zero_mode_policy=True),
        z_minus=SpectralField(state.grid, potential - state.rho.coeffs, zero_mode_policy=True),
        kappa=state.kappa,
        time=state.time,
    )


def from_dispersive(state: ZState) -> PrimitiveFields:
    """u = -1/2 grad_perp |grad|^-1 (Z+ + Z-), rho = (Z+ - Z-)/2, omega = |grad| (Z+ + Z-)/2."""
    grid = state.grid
    total = state.z_plus.coeffs + state.z_minus.coeffs
    return PrimitiveFields(
        u=state.velocity(),
        rho=SpectralField(grid, 0.5 * (state.z_plus.coeffs - state.z_minus.coeffs), zero_mode_policy=True),
        omega=SpectralField(grid, 0.5 * grid.abs_xi * total, zero_mode_policy=True),
    )


def to_vorticity(state: ZState) -> VorticityState:
    """Inverse of to_dispersive."""
    primitive = from_dispersive(state)
    return VorticityState(omega=primitive.omega, rho=primitive.rho, kappa=state.kappa, time=state.time)


def energy_balance_residual(state: ZState, k: int) -> float:
    """Relative defect of ||u||^2_{H-dot^k} + ||rho||^2_{H-dot^k} = (||Z+||^2_{H-dot^k} + ||Z-||^2_{H-dot^k}) / 2.

    Args:
        state (ZState): dispersive state
        k (int): derivative order >= 0

    Returns:
        float: |LHS - RHS| / max(RHS, floor)
    """
    if k < 0:
        raise InvalidArgumentError(f"derivative order must be >= 0, got {k}")
    primitive = from_dispersive(state)
    lhs = (
        homogeneous_sobolev_norm(primitive.u.first, k) ** 2
        + homogeneous_sobolev_norm(primitive.u.second, k) ** 2
        + homogeneous_sobolev_norm(primitive.rho, k) ** 2
    )
    rhs = 0.5 * (homogeneous_sobolev_norm(state.z_plus, k) ** 2 + homogeneous_sobolev_norm(state.z_minus, k) ** 2)
    return abs(lhs - rhs) / max(rhs, ENERGY_FLOOR)


def _as_fields(state: ModelState, tendency: np.ndarray) -> tuple[SpectralField, ...]:
    return tuple(SpectralField(state.grid, coeffs, zero_mode_policy=True) for coeffs in tendency)


def rhs_vorticity(state: VorticityState, nonlinear: bool = True) -> tuple[SpectralField, SpectralField]:
    """Tendencies (d omega/dt, d rho/dt) of the vorticity form."""
    return _as_fields(state, state.tendency(nonlinear=nonlinear))


def rhs_dispersive(state: ZState, nonlinear: bool = True) -> tuple[SpectralField, SpectralField]:
    """Tendencies (dZ+/dt, dZ-/dt) of the dispersive form."""
    return _as_fields(state, state.tendency(nonlinear=nonlinear))


def rhs_sqg(state: SqgState, nonlinear: bool = True) -> SpectralField:
    """Tendency d theta/dt of dispersive SQG."""
    return _as_fields(state, state.tendency(nonlinear=nonlinear))[0]
