"""Dyadic frequency projections and the Sobolev/Besov norms built on them.

The bump is the standard smooth step: with g(t) = exp(-1/t) for t > 0,

    psi(x) = g(2 - |x|) / (g(2 - |x|) + g(|x| - 1)),

which is exactly 1 on [-1, 1] and exactly 0 outside (-2, 2). The band profile
phi(x) = psi(x) - psi(2x) is supported in (1/2, 2), and P_k multiplies the
coefficients by phi(2^-k |xi|).
"""

import math

from collections.abc import Callable
from collections.abc import Iterator
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from backend.stratsim.core.numerics.spectral import GridSpec
from backend.stratsim.core.numerics.spectral import SpectralField
from backend.stratsim.core.numerics.spectral import inverse_transform
from backend.stratsim.foundation.exceptions import InvalidArgumentError


def _smooth_step(t: np.ndarray) -> np.ndarray:
    positive = t > 0
    safe = np.where(positive, t, 1.0)
    return np.where(positive, np.exp(-1.0 / safe), 0.0)


def bump_psi(x: float | np.ndarray) -> float | np.ndarray:
    """Even smooth bump, 1 on [-1, 1] and 0 outside (-2, 2).

    Args:
        x (float | np.ndarray): evaluation points

    Returns:
        float | np.ndarray: psi(x), a float for scalar input
    """
    a = np.abs(np.asarray(x, dtype=np.float64))
    inner = _smooth_step(2.0 - a)
    outer = _smooth_step(a - 1.0)
    values = inner / (inner + outer)
    return float(values) if values.ndim == 0 else values


def bump_phi(x: float | np.ndarray) -> float | np.ndarray:
    """Band profile phi(x) = psi(x) - psi(2x)."""
    values = np.asarray(bump_psi(x)) - np.asarray(bump_psi(2.0 * np.asarray(x, dtype=np.float64)))
    return float(values) if values.ndim == 0 else values


@dataclass(frozen=True)
class BumpProfile:
    """The pair (psi, phi) defining the dyadic decomposition."""

    psi: Callable = bump_psi
    phi: Callable = bump_phi

    def telescoping_residual(self, radii: np.ndarray, k_span: int) -> float:
        """Max violation of sum_{|k| <= K} phi(2^-k r) = psi(2^-K r) - psi(2^(K+1) r).

        Args:
            radii (np.ndarray): positive radii
            k_span (int): K

        Returns:
            float: maximal absolute residual
        """
        radii = np.asarray(radii, dtype=np.float64)
        total = sum(np.asarray(self.phi(2.0**-k * radii)) for k in range(-k_span, k_span + 1))
        expected = np.asarray(self.psi(2.0**-k_span * radii)) - np.asarray(self.psi(2.0 ** (k_span + 1) * radii))
        return float(np.max(np.abs(total - expected)))


BUMP = BumpProfile()


@dataclass(frozen=True)
class BandRange:
    """Dyadic indices resolvable on a grid, iterated in ascending order."""

    k_min: int
    k_max: int

    @classmethod
    def for_grid(cls, grid: GridSpec) -> "BandRange":
        """Bands covering every lattice radius between 2 pi / L and the largest retained |xi|.

        Args:
            grid (GridSpec): lattice

        Returns:
            BandRange: with 2^k_min <= 2 pi / L < 2^(k_min + 1) and 2^(k_max - 1) < r_max <= 2^k_max
        """
        k_min = math.floor(math.log2(grid.frequency_spacing))
        k_max = math.ceil(math.log2(grid.max_retained_frequency))
        return cls(k_min=k_min, k_max=k_max)

    def __iter__(self) -> Iterator[int]:
        """Ascending band indices."""
        return iter(range(self.k_min, self.k_max + 1))

    def __contains__(self, k: object) -> bool:
        """Membership test."""
        return isinstance(k, int) and self.k_min <= k <= self.k_max

    def __len__(self) -> int:
        """Number of bands."""
        return self.k_max - self.k_min + 1


@lru_cache(maxsize=512)
def band_multiplier(grid: GridSpec, k: int) -> np.ndarray:
    """phi(2^-k |xi|) on the lattice."""
    values = np.asarray(bump_phi(2.0**-k * grid.abs_xi))
    values.setflags(write=False)
    return values


@lru_cache(maxsize=64)
def low_pass_multiplier(grid: GridSpec) -> np.ndarray:
    """psi(|xi|) on the lattice."""
    values = np.asarray(bump_psi(grid.abs_xi))
    values.setflags(write=False)
    return values


def project_band(field: SpectralField, k: int) -> SpectralField:
    """Littlewood-Paley projection P_k.

    Args:
        field (SpectralField): input field
        k (int): dyadic index, |xi| ~ 2^k

    Returns:
        SpectralField: the band-k piece; the zero field when the band misses the lattice
    """
    bands = BandRange.for_grid(field.grid)
    # phi(2^-k r) vanishes on the whole lattice outside these indices
    if not bands.k_min - 1 <= k <= bands.k_max + 1:
        return SpectralField.zeros(field.grid)
    return SpectralField(field.grid, band_multiplier(field.grid, k) * field.coeffs, zero_mode_policy=True)


def low_pass(field: SpectralField) -> SpectralField:
    """Low-frequency part f * psi-check, i.e. the multiplier psi(|xi|)."""
    return SpectralField(field.grid, low_pass_multiplier(field.grid) * field.coeffs)


def _check_exponent(name: str, value: float):
    if math.isnan(value) or value < 1:
        raise InvalidArgumentError(f"{name} must be a real >= 1 or infinity, got {value}")


def lp_norm(field: SpectralField, p: float) -> float:
    """Rectangle-rule L^p norm of the physical field.

    Args:
        field (SpectralField): input field
        p (float): integrability exponent in [1, inf]

    Returns:
        float: ||f||_{L^p}
    """
    _check_exponent("p", p)
    samples = np.abs(inverse_transform(field))
    if math.isinf(p):
        return float(np.max(samples))
    cell = field.grid.spacing**2
    if p == 2:
        return float(np.sqrt(cell * np.sum(samples**2)))
    return float((cell * np.sum(samples**p)) ** (1.0 / p))


def besov_norm(field: SpectralField, s: float, p: float, q: float, homogeneous: bool = True) -> float:
    """Besov norm over the grid's band range.

    Args:
        field (SpectralField): input field
        s (float): regularity
        p (float): integrability exponent in [1, inf]
        q (float): summation exponent in [1, inf]
        homogeneous (bool): drop the low-frequency term. Defaults to True.

    Raises:
        InvalidArgumentError: p or q below 1

    Returns:
        float: (sum_k (2^(sk) ||P_k f||_p)^q)^(1/q), plus ||psi(|D|) f||_p when inhomogeneous
    """
    _check_exponent("p", p)
    _check_exponent("q", q)
    terms = np.array([2.0 ** (s * k) * lp_norm(project_band(field, k), p) for k in BandRange.for_grid(field.grid)])
    if math.isinf(q):
        total = float(np.max(terms)) if terms.size else 0.0
    else:
        total = float(np.sum(terms**q) ** (1.0 / q))
    if not homogeneous:
        total += lp_norm(low_pass(field), p)
    return total


def sobolev_norm(field: SpectralField, n: float) -> float:
    """Inhomogeneous H^n norm (sum (1 + |xi|^2)^n |f_hat|^2 L^2)^(1/2).

    Args:
        field (SpectralField): input field
        n (float): regularity >= 0

    Returns:
        float: ||f||_{H^n}
    """
    if n < 0:
        raise InvalidArgumentError(f"regularity must be >= 0, got {n}")
    weight = (1.0 + field.grid.abs_xi**2) ** n
    return field.grid.domain_length * float(np.sqrt(np.sum(weight * np.abs(field.coeffs) ** 2)))


def homogeneous_sobolev_norm(field: SpectralField, s: float) -> float:
    """Homogeneous H-dot^s norm; s = 0 gives the L^2 norm."""
    if s == 0:
        return field.l2_norm()
    weight = np.zeros_like(field.grid.abs_xi)
    np.power(field.grid.abs_xi, 2.0 * s, out=weight, where=field.grid.abs_xi > 0)
    return field.grid.domain_length * float(np.sqrt(np.sum(weight * np.abs(field.coeffs) ** 2)))


def bernstein_constants(field: SpectralField) -> dict[int, float]:
    """Measured C_k = ||P_k f||_inf / (2^k ||P_k f||_2) for every populated band."""
    constants = {}
    for k in BandRange.for_grid(field.grid):
        piece = project_band(field, k)
        l2 = piece.l2_norm()
        if l2 > 0:
            constants[k] = lp_norm(piece, math.inf) / (2.0**k * l2)
    return constants


def norm_equivalence_ratio(field: SpectralField, s: float) -> float:
    """||f||_{H^s} / ||f||_{B^s_{2,2}} (inhomogeneous); 0 for the zero field."""
    besov = besov_norm(field, s, 2, 2, homogeneous=False)
    if besov == 0:
        return 0.0
    return sobolev_norm(field, s) / besov
