"""Periodic-box Fourier machinery.

Every field lives on the square box [0, L)^2 sampled with n points per axis and
is stored as its full n x n array of Fourier coefficients (axis 0 <-> xi_1,
axis 1 <-> xi_2). The forward transform carries the 1/n^2 factor, so the
coefficient at xi = 0 is the mean of the samples and Parseval reads

    integral |f|^2 dx = L^2 * sum |f_hat|^2.

Odd symbols (derivatives, Riesz transforms, the dispersion relation) use a zero
wavenumber on the Nyquist index m = -n/2, so every real-to-real symbol keeps
Hermitian symmetry on the whole lattice.
"""

import math

from dataclasses import dataclass
from dataclasses import replace
from enum import StrEnum
from functools import cached_property
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import scipy.fft

from backend.stratsim.constants import DEFAULT_DEALIAS_FRACTION
from backend.stratsim.foundation.exceptions import GridMismatchError
from backend.stratsim.foundation.exceptions import InvalidArgumentError
from backend.stratsim.foundation.exceptions import NonzeroMeanError
from backend.stratsim.foundation.utils import is_power_of_two
from backend.stratsim.settings import settings

MIN_GRID_POINTS = 8
# relative size of the zero mode below which a field counts as mean-zero
MEAN_TOLERANCE = 1e-12


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class GridSpec:
    """Square periodic box with an n x n lattice of modes.

    Attributes:
        n (int): points per axis, a power of two >= 8
        domain_length (float): box side L
        dealias_fraction (float): modes with max(|m1|, |m2|) > fraction * n / 2 are removed by dealiasing
    """

    n: int
    domain_length: float
    dealias_fraction: float = DEFAULT_DEALIAS_FRACTION

    def __post_init__(self):
        """Validate the geometry."""
        if not is_power_of_two(self.n) or self.n < MIN_GRID_POINTS:
            raise InvalidArgumentError(f"grid points per axis must be a power of two >= {MIN_GRID_POINTS}, got {self.n}")
        if not self.domain_length > 0 or not math.isfinite(self.domain_length):
            raise InvalidArgumentError(f"domain length must be positive, got {self.domain_length}")
        if not 0 < self.dealias_fraction <= 1:
            raise InvalidArgumentError(f"dealias fraction must be in (0, 1], got {self.dealias_fraction}")

    @property
    def spacing(self) -> float:
        """Physical grid spacing L / n."""
        return self.domain_length / self.n

    @property
    def frequency_spacing(self) -> float:
        """Lattice spacing in frequency 2 pi / L."""
        return 2.0 * math.pi / self.domain_length

    @property
    def dealias_cutoff(self) -> float:
        """Largest retained integer mode index."""
        return self.dealias_fraction * self.n / 2

    @cached_property
    def mode_index(self) -> np.ndarray:
        """Integer mode numbers m in FFT order, covering [-n/2, n/2)."""
        return _frozen(np.rint(scipy.fft.fftfreq(self.n, d=1.0 / self.n)).astype(np.int64))

    @cached_property
    def modes(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer lattice (m1, m2) as n x n arrays."""
        m1, m2 = np.meshgrid(self.mode_index, self.mode_index, indexing="ij")
        return _frozen(m1), _frozen(m2)

    @cached_property
    def xi(self) -> tuple[np.ndarray, np.ndarray]:
        """Frequencies (xi1, xi2) = (2 pi / L) * (m1, m2)."""
        m1, m2 = self.modes
        return _frozen(self.frequency_spacing * m1), _frozen(self.frequency_spacing * m2)

    @cached_property
    def odd_xi(self) -> tuple[np.ndarray, np.ndarray]:
        """Frequencies for odd symbols: zero on the Nyquist index of the respective axis."""
        m1, m2 = self.modes
        nyquist = -self.n // 2
        xi1 = np.where(m1 == nyquist, 0.0, self.frequency_spacing * m1)
        xi2 = np.where(m2 == nyquist, 0.0, self.frequency_spacing * m2)
        return _frozen(xi1), _frozen(xi2)

    @cached_property
    def abs_xi(self) -> np.ndarray:
        """|xi| on the lattice."""
        xi1, xi2 = self.xi
        return _frozen(np.hypot(xi1, xi2))

    @cached_property
    def inv_abs_xi(self) -> np.ndarray:
        """1 / |xi| with the value 0 at xi = 0."""
        out = np.zeros((self.n, self.n))
        np.divide(1.0, self.abs_xi, out=out, where=self.abs_xi > 0)
        return _frozen(out)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean mask of the retained modes."""
        m1, m2 = self.modes
        return _frozen(np.maximum(np.abs(m1), np.abs(m2)) <= self.dealias_cutoff)

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical sample points (x1, x2) as n x n arrays."""
        x = self.spacing * np.arange(self.n)
        x1, x2 = np.meshgrid(x, x, indexing="ij")
        return _frozen(x1), _frozen(x2)

    @property
    def max_retained_frequency(self) -> float:
        """Largest |xi| that survives dealiasing."""
        return math.sqrt(2.0) * math.floor(self.dealias_cutoff) * self.frequency_spacing


def make_grid(n: int, domain_length: float, dealias_fraction: float = DEFAULT_DEALIAS_FRACTION) -> GridSpec:
    """Build a validated grid.

    Args:
        n (int): points per axis (power of two >= 8)
        domain_length (float): box side L > 0
        dealias_fraction (float): retained fraction of the half-spectrum. Defaults to 2/3.

    Returns:
        GridSpec: grid with frequency spacing 2 pi / L
    """
    return GridSpec(n=n, domain_length=float(domain_length), dealias_fraction=float(dealias_fraction))


def fft_forward(samples: np.ndarray) -> np.ndarray:
    """Forward transform of an n x n array with the 1/n^2 normalization."""
    return scipy.fft.fft2(samples, norm="forward", workers=settings.fft_workers)


def fft_inverse(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of fft_forward (complex output)."""
    return scipy.fft.ifft2(coeffs, norm="forward", workers=settings.fft_workers)


def _negated_index(coeffs: np.ndarray) -> np.ndarray:
    """Coefficients at -m: out[m] = coeffs[-m]."""
    return np.roll(coeffs[::-1, ::-1], 1, axis=(0, 1))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """A scalar field stored by its Fourier coefficients.

    Attributes:
        grid (GridSpec): lattice the coefficients live on
        coeffs (np.ndarray): complex n x n coefficients
        zero_mode_policy (bool): asserts the coefficient at xi = 0 is exactly zero
    """

    grid: GridSpec
    coeffs: np.ndarray
    zero_mode_policy: bool = False

    def __post_init__(self):
        """Validate shape and the zero-mode policy."""
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if coeffs.shape != (self.grid.n, self.grid.n):
            raise GridMismatchError(f"coefficients of shape {coeffs.shape} do not fit a grid with n={self.grid.n}")
        if self.zero_mode_policy and coeffs[0, 0] != 0:
            raise NonzeroMeanError("zero mode policy set but the mean coefficient is nonzero")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralField":
        """Zero field on a grid."""
        return cls(grid, np.zeros((grid.n, grid.n), dtype=np.complex128), zero_mode_policy=True)

    @property
    def mean(self) -> complex:
        """Coefficient at xi = 0, i.e. the mean of the field."""
        return complex(self.coeffs[0, 0])

    def is_mean_zero(self) -> bool:
        """Whether the zero mode vanishes up to round-off."""
        if self.zero_mode_policy:
            return True
        scale = float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0
        return abs(self.mean) <= MEAN_TOLERANCE * scale

    def without_mean(self) -> "SpectralField":
        """Copy with the zero mode removed and the zero-mode policy set."""
        coeffs = self.coeffs.copy()
        coeffs[0, 0] = 0.0
        return SpectralField(self.grid, coeffs, zero_mode_policy=True)

    def hermitian_defect(self) -> float:
        """Relative violation of coeff(-m) = conj(coeff(m)); 0 for real fields."""
        scale = float(np.max(np.abs(self.coeffs)))
        if scale == 0:
            return 0.0
        return float(np.max(np.abs(_negated_index(self.coeffs) - np.conj(self.coeffs)))) / scale

    def l2_norm(self) -> float:
        """Physical L^2 norm via Parseval."""
        return self.grid.domain_length * float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def inner(self, other: "SpectralField") -> float:
        """Real L^2 inner product <self, other>."""
        _check_same_grid(self, other)
        return self.grid.domain_length**2 * float(np.real(np.vdot(self.coeffs, other.coeffs)))

    def to_physical(self) -> np.ndarray:
        """Real samples of the field."""
        return inverse_transform(self)

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralField":
        """New field on the same grid, the zero-mode policy recomputed from the data."""
        return SpectralField(self.grid, coeffs, zero_mode_policy=bool(coeffs[0, 0] == 0))

    def __add__(self, other: "SpectralField") -> "SpectralField":
        """Sum of two fields."""
        _check_same_grid(self, other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        """Difference of two fields."""
        _check_same_grid(self, other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        """Scalar multiple."""
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        """Negated field."""
        return self.with_coeffs(-self.coeffs)


class VectorField(NamedTuple):
    """Two-component field, e.g. a velocity."""

    first: SpectralField
    second: SpectralField

    def l2_norm(self) -> float:
        """L^2 norm of the vector field."""
        return math.hypot(self.first.l2_norm(), self.second.l2_norm())


def _check_same_grid(a: SpectralField, b: SpectralField):
    if a.grid != b.grid:
        raise GridMismatchError(f"fields live on different grids: {a.grid} vs {b.grid}")


def forward_transform(samples: np.ndarray, grid: GridSpec) -> SpectralField:
    """Transform real samples into a spectral field.

    Args:
        samples (np.ndarray): real n x n samples, samples[i, j] = f(x1_i, x2_j)
        grid (GridSpec): grid of the samples

    Raises:
        GridMismatchError: samples do not match the grid size
        InvalidArgumentError: samples are not real

    Returns:
        SpectralField: coefficients, the zero mode equals the mean
    """
    samples = np.asarray(samples)
    if samples.shape != (grid.n, grid.n):
        raise GridMismatchError(f"samples of shape {samples.shape} do not fit a grid with n={grid.n}")
    if np.iscomplexobj(samples):
        raise InvalidArgumentError("samples must be real-valued")
    return SpectralField(grid, fft_forward(samples.astype(np.float64)))


def inverse_transform(field: SpectralField) -> np.ndarray:
    """Real samples of a field (imaginary round-off discarded)."""
    return np.real(fft_inverse(field.coeffs))


class SymbolKind(StrEnum):
    """Fourier multipliers used by the models."""

    RIESZ1 = "riesz1"
    RIESZ2 = "riesz2"
    MOD_NABLA = "mod_nabla"
    PARTIAL = "partial"
    INV_LAPLACE = "inv_laplace"
    PERP_GRAD_INV_MOD = "perp_grad_inv_mod"
    LAMBDA = "lambda"


@dataclass(frozen=True)
class Symbol:
    """A Fourier multiplier with its parameters.

    Attributes:
        kind (SymbolKind): multiplier family
        power (float): exponent s of |xi|^s (MOD_NABLA)
        axis (int): coordinate direction 1 or 2 (PARTIAL)
        kappa (float): dispersion strength (LAMBDA)
    """

    kind: SymbolKind
    power: float = 0.0
    axis: int = 1
    kappa: float = 1.0

    @classmethod
    def riesz(cls, axis: int) -> "Symbol":
        """Riesz transform -i xi_j / |xi|."""
        if axis not in (1, 2):
            raise InvalidArgumentError(f"axis must be 1 or 2, got {axis}")
        return cls(SymbolKind.RIESZ1 if axis == 1 else SymbolKind.RIESZ2)

    @classmethod
    def mod_nabla(cls, power: float) -> "Symbol":
        """|nabla|^s."""
        return cls(SymbolKind.MOD_NABLA, power=float(power))

    @classmethod
    def partial(cls, axis: int) -> "Symbol":
        """Derivative i xi_j."""
        if axis not in (1, 2):
            raise InvalidArgumentError(f"axis must be 1 or 2, got {axis}")
        return cls(SymbolKind.PARTIAL, axis=axis)

    @classmethod
    def inv_laplace(cls) -> "Symbol":
        """Inverse Laplacian -1 / |xi|^2."""
        return cls(SymbolKind.INV_LAPLACE)

    @classmethod
    def perp_grad_inv_mod(cls) -> "Symbol":
        """Two-component nabla_perp |nabla|^-1."""
        return cls(SymbolKind.PERP_GRAD_INV_MOD)

    @classmethod
    def dispersion(cls, kappa: float) -> "Symbol":
        """Dispersion relation kappa xi_1 / |xi|."""
        return cls(SymbolKind.LAMBDA, kappa=float(kappa))

    @property
    def requires_zero_mean(self) -> bool:
        """Negative-power symbols are only defined on mean-zero data."""
        if self.kind == SymbolKind.MOD_NABLA:
            return self.power < 0
        return self.kind in (SymbolKind.INV_LAPLACE, SymbolKind.PERP_GRAD_INV_MOD)

    @property
    def is_vector(self) -> bool:
        """Whether the symbol produces two components."""
        return self.kind == SymbolKind.PERP_GRAD_INV_MOD


def _mod_power(grid: GridSpec, power: float) -> np.ndarray:
    out = np.zeros((grid.n, grid.n))
    np.power(grid.abs_xi, power, out=out, where=grid.abs_xi > 0)
    return out


@lru_cache(maxsize=256)
def symbol_values(grid: GridSpec, symbol: Symbol) -> np.ndarray:
    """Multiplier evaluated on the lattice.

    All symbols vanish at xi = 0. Vector symbols return an array of shape (2, n, n).

    Args:
        grid (GridSpec): lattice
        symbol (Symbol): multiplier

    Returns:
        np.ndarray: read-only multiplier values
    """
    xi1, xi2 = grid.odd_xi
    inv = grid.inv_abs_xi
    match symbol.kind:
        case SymbolKind.RIESZ1:
            values = -1j * xi1 * inv
        case SymbolKind.RIESZ2:
            values = -1j * xi2 * inv
        case SymbolKind.MOD_NABLA:
            values = _mod_power(grid, symbol.power)
        case SymbolKind.PARTIAL:
            values = 1j * (xi1 if symbol.axis == 1 else xi2)
        case SymbolKind.INV_LAPLACE:
            values = -(inv**2)
        case SymbolKind.PERP_GRAD_INV_MOD:
            values = np.stack([-1j * xi2 * inv, 1j * xi1 * inv])
        case SymbolKind.LAMBDA:
            values = symbol.kappa * xi1 * inv
    return _frozen(np.asarray(values))


def apply_symbol(
    field: SpectralField,
    symbol: Symbol,
    kappa: float | None = None,
) -> SpectralField | VectorField:
    """Apply a Fourier multiplier pointwise on the lattice.

    Args:
        field (SpectralField): input field
        symbol (Symbol): multiplier
        kappa (float | None): overrides the strength of a LAMBDA symbol. Defaults to None.

    Raises:
        NonzeroMeanError: negative-power symbol applied to a field with nonzero mean

    Returns:
        SpectralField | VectorField: a VectorField for PERP_GRAD_INV_MOD, a SpectralField otherwise
    """
    if kappa is not None and symbol.kind == SymbolKind.LAMBDA:
        symbol = replace(symbol, kappa=float(kappa))
    if symbol.requires_zero_mean and not field.is_mean_zero():
        raise NonzeroMeanError(f"symbol {symbol.kind} needs a mean-zero field, mean is {field.mean}")
    values = symbol_values(field.grid, symbol)
    if symbol.is_vector:
        return VectorField(
            SpectralField(field.grid, values[0] * field.coeffs, zero_mode_policy=True),
            SpectralField(field.grid, values[1] * field.coeffs, zero_mode_policy=True),
        )
    return SpectralField(field.grid, values * field.coeffs, zero_mode_policy=True)


def dealias(field: SpectralField) -> SpectralField:
    """Zero the modes outside the dealiasing cutoff (idempotent)."""
    return SpectralField(field.grid, field.coeffs * field.grid.dealias_mask, zero_mode_policy=field.zero_mode_policy)


def _resample(field: SpectralField, target: GridSpec) -> SpectralField:
    """Copy the modes |m| < min(n, n') / 2 onto another grid of the same box."""
    if target.domain_length != field.grid.domain_length:
        raise GridMismatchError("resampling requires the same box")
    keep = min(field.grid.n, target.n) // 2
    src = field.grid.mode_index
    selected = np.flatnonzero(np.abs(src) < keep)
    dst = src[selected] % target.n
    coeffs = np.zeros((target.n, target.n), dtype=np.complex128)
    coeffs[np.ix_(dst, dst)] = field.coeffs[np.ix_(selected, selected)]
    return SpectralField(target, coeffs, zero_mode_policy=field.zero_mode_policy)


def pad(field: SpectralField, n: int) -> SpectralField:
    """Zero-pad a field onto a finer grid of the same box.

    Products of two padded fields with n >= 2 * field.grid.n are alias-free. The
    Nyquist row and column of the source are dropped to keep the field real.

    Args:
        field (SpectralField): field to pad
        n (int): points per axis of the finer grid

    Returns:
        SpectralField: padded field
    """
    if n < field.grid.n:
        raise InvalidArgumentError(f"cannot pad from n={field.grid.n} down to n={n}")
    return _resample(field, make_grid(n, field.grid.domain_length, field.grid.dealias_fraction))


def truncate(field: SpectralField, n: int) -> SpectralField:
    """Restrict a field to a coarser grid of the same box."""
    if n > field.grid.n:
        raise InvalidArgumentError(f"cannot truncate from n={field.grid.n} up to n={n}")
    return _resample(field, make_grid(n, field.grid.domain_length, field.grid.dealias_fraction))
