"""Invariant suite run by the selftest subcommand.

Every check measures one quantity that must stay below a bound: exact
identities at round-off level, conservation at the tendency level, and the
boundedness/scaling statements on small grids.
"""

import math

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from backend.stratsim.core.experiments import axial_packet
from backend.stratsim.core.experiments import random_band_field
from backend.stratsim.core.experiments import time_scaling_check
from backend.stratsim.core.numerics.diagnostics import linear_decay_fit
from backend.stratsim.core.numerics.diagnostics import log_times
from backend.stratsim.core.numerics.diagnostics import product_estimate_ratio
from backend.stratsim.core.numerics.diagnostics import strichartz_ratio
from backend.stratsim.core.numerics.diagnostics import summation_ratio
from backend.stratsim.core.numerics.littlewood_paley import BUMP
from backend.stratsim.core.numerics.model import SqgState
from backend.stratsim.core.numerics.model import VorticityState
from backend.stratsim.core.numerics.model import ZState
from backend.stratsim.core.numerics.model import energy_balance_residual
from backend.stratsim.core.numerics.model import rhs_dispersive
from backend.stratsim.core.numerics.model import rhs_sqg
from backend.stratsim.core.numerics.model import rhs_vorticity
from backend.stratsim.core.numerics.model import to_dispersive
from backend.stratsim.core.numerics.spectral import GridSpec
from backend.stratsim.core.numerics.spectral import Symbol
from backend.stratsim.core.numerics.spectral import apply_symbol
from backend.stratsim.core.numerics.spectral import make_grid
from backend.stratsim.core.numerics.timestepper import propagator
from backend.stratsim.core.numerics.timestepper import step_ifrk4
from backend.stratsim.core.persistence import decode_checkpoint
from backend.stratsim.core.persistence import encode_checkpoint
from backend.stratsim.settings import get_logger

logger = get_logger()

SMALL_GRID = 32
PRODUCT_BOUND = 50.0
SUMMATION_BOUND = 10.0
CORPUS_PAIRS = 100


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one invariant check.

    Attributes:
        name (str): check identifier
        value (float): measured quantity
        bound (float): largest admissible value
    """

    name: str
    value: float
    bound: float

    @property
    def passed(self) -> bool:
        """Measured value within the bound."""
        return math.isfinite(self.value) and self.value <= self.bound


def _grid() -> GridSpec:
    return make_grid(SMALL_GRID, 2.0 * math.pi)


def _random_z(rng: np.random.Generator) -> ZState:
    grid = _grid()
    return ZState(
        z_plus=random_band_field(grid, rng, n_regularity=1.0),
        z_minus=random_band_field(grid, rng, n_regularity=1.0),
        kappa=float(rng.uniform(0.5, 4.0)),
    )


def check_partition_of_unity(rng: np.random.Generator) -> CheckResult:
    radii = np.geomspace(1e-3, 1e3, 2001)
    return CheckResult("partition_of_unity", BUMP.telescoping_residual(radii, 12), 1e-12)


def check_hermitian_symmetry(rng: np.random.Generator) -> CheckResult:
    field = random_band_field(_grid(), rng)
    outputs = [
        apply_symbol(field, Symbol.riesz(1)),
        apply_symbol(field, Symbol.riesz(2)),
        apply_symbol(field, Symbol.mod_nabla(-1)),
        propagator(field, 2.0, 3.0),
    ]
    return CheckResult("hermitian_symmetry", max(out.hermitian_defect() for out in outputs), 1e-12)


def check_energy_balance(rng: np.random.Generator) -> CheckResult:
    worst = max(energy_balance_residual(_random_z(rng), k) for _ in range(20) for k in (0, 1, 3))
    return CheckResult("energy_balance", worst, 1e-11)


def check_formulation_equivalence(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for _ in range(10):
        zstate = _random_z(rng)
        primitive = VorticityState(
            omega=random_band_field(zstate.grid, rng),
            rho=random_band_field(zstate.grid, rng),
            kappa=zstate.kappa,
        )
        d_omega, d_rho = rhs_vorticity(primitive)
        d_plus, d_minus = rhs_dispersive(to_dispersive(primitive))
        potential = primitive.grid.inv_abs_xi * d_omega.coeffs
        scale = max(np.max(np.abs(d_plus.coeffs)), np.max(np.abs(d_minus.coeffs)))
        error = max(
            np.max(np.abs(potential + d_rho.coeffs - d_plus.coeffs)),
            np.max(np.abs(potential - d_rho.coeffs - d_minus.coeffs)),
        )
        worst = max(worst, float(error / scale))
    return CheckResult("formulation_equivalence", worst, 1e-10)


def check_tendency_conservation(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for _ in range(10):
        zstate = _random_z(rng)
        d_plus, d_minus = rhs_dispersive(zstate)
        rate = zstate.z_plus.inner(d_plus) + zstate.z_minus.inner(d_minus)
        scale = zstate.z_plus.l2_norm() * d_plus.l2_norm() + zstate.z_minus.l2_norm() * d_minus.l2_norm()
        worst = max(worst, abs(rate) / scale)
        sqg = SqgState(theta=zstate.z_plus, kappa=zstate.kappa)
        d_theta = rhs_sqg(sqg)
        worst = max(worst, abs(sqg.theta.inner(d_theta)) / (sqg.theta.l2_norm() * d_theta.l2_norm()))
    return CheckResult("tendency_conservation", worst, 1e-11)


def check_propagator_unitarity(rng: np.random.Generator) -> CheckResult:
    field = random_band_field(_grid(), rng)
    norm = field.l2_norm()
    drift = abs(propagator(field, 1.5, 10.0).l2_norm() - norm) / norm
    composed = propagator(propagator(field, 1.5, 2.0), 1.5, 3.0)
    direct = propagator(field, 1.5, 5.0)
    group = float(np.max(np.abs(composed.coeffs - direct.coeffs)) / np.max(np.abs(field.coeffs)))
    return CheckResult("propagator_unitarity", max(drift, group), 1e-12)


def check_linear_ifrk4(rng: np.random.Generator) -> CheckResult:
    zstate = _random_z(rng)
    stepped = zstate
    for _ in range(10):
        stepped = step_ifrk4(stepped, 0.37, nonlinear=False)
    exact = propagator(zstate.z_plus, zstate.kappa, stepped.time)
    error = np.max(np.abs(stepped.z_plus.coeffs - exact.coeffs)) / np.max(np.abs(exact.coeffs))
    return CheckResult("linear_ifrk4_exact", float(error), 1e-12)


def check_checkpoint_roundtrip(rng: np.random.Generator) -> CheckResult:
    zstate = _random_z(rng)
    loaded = decode_checkpoint(encode_checkpoint(zstate))
    identical = np.array_equal(loaded.stacked(), zstate.stacked()) and loaded.kappa == zstate.kappa
    return CheckResult("checkpoint_roundtrip", 0.0 if identical else 1.0, 0.0)


def check_strichartz_unitary_pair(rng: np.random.Generator) -> CheckResult:
    field = random_band_field(make_grid(SMALL_GRID, 8.0 * math.pi), rng)
    ratio = strichartz_ratio(field, 1.0, math.inf, 0, samples=33)
    return CheckResult("strichartz_energy_pair", abs(ratio - 1.0), 1e-12)


def check_time_scaling_identity(rng: np.random.Generator) -> CheckResult:
    grid = _grid()
    omega = random_band_field(grid, rng) * 0.1
    rho = random_band_field(grid, rng) * 0.1
    return CheckResult("time_scaling_identity", time_scaling_check(omega, rho, 1.0, 0.2), 1e-12)


def check_product_estimate(rng: np.random.Generator) -> CheckResult:
    grid = _grid()
    worst = 0.0
    for _ in range(CORPUS_PAIRS):
        f = random_band_field(grid, rng, n_regularity=float(rng.uniform(0.0, 3.0)))
        g = random_band_field(grid, rng, n_regularity=float(rng.uniform(0.0, 3.0)))
        worst = max(worst, *(product_estimate_ratio(f, g, m) for m in (0.0, 1.0, 2.5)))
    return CheckResult("product_estimate_bounded", worst, PRODUCT_BOUND)


def check_summation(rng: np.random.Generator) -> CheckResult:
    grid = _grid()
    worst = max(summation_ratio(random_band_field(grid, rng), 2.0, 0.5) for _ in range(2 * CORPUS_PAIRS))
    return CheckResult("summation_bounded", worst, SUMMATION_BOUND)


def check_linear_decay(rng: np.random.Generator) -> CheckResult:
    grid = make_grid(512, 200.0 * math.pi)
    fit = linear_decay_fit(axial_packet(grid, 0), 1.0, 0, log_times(5.0, 150.0), p_values=(4.0,))
    # sup rate -1/2, L4 rate -1/4 (weighted so both share the bound)
    worst = max(abs(fit.slope + 0.5), 2.0 * abs(fit.lp_slopes[4.0] + 0.25))
    return CheckResult("linear_decay_exponent", worst, 0.1)


QUICK_CHECKS: tuple[Callable[[np.random.Generator], CheckResult], ...] = (
    check_partition_of_unity,
    check_hermitian_symmetry,
    check_energy_balance,
    check_formulation_equivalence,
    check_tendency_conservation,
    check_propagator_unitarity,
    check_linear_ifrk4,
    check_checkpoint_roundtrip,
    check_strichartz_unitary_pair,
    check_time_scaling_identity,
)

FULL_CHECKS = (*QUICK_CHECKS, check_product_estimate, check_summation, check_linear_decay)


def run_selftest(seed: int = 0, quick: bool = False) -> list[CheckResult]:
    """Run the invariant suite.

    Args:
        seed (int): seed of the random inputs. Defaults to 0.
        quick (bool): skip the corpus and decay checks. Defaults to False.

    Returns:
        list[CheckResult]: one result per check, in suite order
    """
    rng = np.random.default_rng(seed)
    results = []
    for check in QUICK_CHECKS if quick else FULL_CHECKS:
        result = check(rng)
        level = "info" if result.passed else "warning"
        logger.log(level.upper(), f"selftest {result.name}: {result.value:.3e} (bound {result.bound:.1e})")
        results.append(result)
    return results
