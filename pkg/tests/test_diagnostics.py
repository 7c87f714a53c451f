import math

import numpy as np
import pytest

from backend.stratsim.core.experiments import axial_packet
from backend.stratsim.core.experiments import localized_bump
from backend.stratsim.core.experiments import random_band_field
from backend.stratsim.core.numerics.diagnostics import NormReport
from backend.stratsim.core.numerics.diagnostics import NormTracker
from backend.stratsim.core.numerics.diagnostics import admissible_r
from backend.stratsim.core.numerics.diagnostics import blowup_functional
from backend.stratsim.core.numerics.diagnostics import blowup_integral
from backend.stratsim.core.numerics.diagnostics import bootstrap_besov_norm
from backend.stratsim.core.numerics.diagnostics import bootstrap_linear_bound_ratio
from backend.stratsim.core.numerics.diagnostics import bootstrap_norm
from backend.stratsim.core.numerics.diagnostics import combined_sobolev_norm
from backend.stratsim.core.numerics.diagnostics import decay_window
from backend.stratsim.core.numerics.diagnostics import duhamel_strichartz_measurement
from backend.stratsim.core.numerics.diagnostics import duhamel_strichartz_ratio
from backend.stratsim.core.numerics.diagnostics import gronwall_constant
from backend.stratsim.core.numerics.diagnostics import linear_decay_fit
from backend.stratsim.core.numerics.diagnostics import log_times
from backend.stratsim.core.numerics.diagnostics import norm_report
from backend.stratsim.core.numerics.diagnostics import product_estimate_ratio
from backend.stratsim.core.numerics.diagnostics import strichartz_measurement
from backend.stratsim.core.numerics.diagnostics import strichartz_ratio
from backend.stratsim.core.numerics.diagnostics import summation_ratio
from backend.stratsim.core.numerics.model import VorticityState
from backend.stratsim.core.numerics.model import to_dispersive
from backend.stratsim.core.numerics.spectral import SpectralField
from backend.stratsim.core.numerics.spectral import make_grid
from backend.stratsim.core.numerics.timestepper import propagator
from backend.stratsim.foundation.exceptions import InsufficientDataError
from backend.stratsim.foundation.exceptions import InvalidArgumentError
from backend.stratsim.foundation.exceptions import NonzeroMeanError


def _report(time: float, sobolev_hn: float = 1.0, accumulated_blowup: float = 0.0) -> NormReport:
    return NormReport(
        time=time,
        sobolev_hn=sobolev_hn,
        besov_b1_inf_1=1.0,
        grad_linf=1.0,
        l2_energy=1.0,
        accumulated_blowup=accumulated_blowup,
    )


def test_norms_agree_across_formulations(vorticity_state):
    dispersive = to_dispersive(vorticity_state)
    assert combined_sobolev_norm(dispersive, 3.5) == pytest.approx(combined_sobolev_norm(vorticity_state, 3.5), rel=1e-12)
    assert bootstrap_besov_norm(dispersive) == pytest.approx(bootstrap_besov_norm(vorticity_state), rel=1e-12)
    assert blowup_functional(dispersive) == pytest.approx(blowup_functional(vorticity_state), rel=1e-12)


def test_norms_are_homogeneous(vorticity_state):
    doubled = vorticity_state.scaled(2.0)
    assert combined_sobolev_norm(doubled, 2.0) == pytest.approx(2.0 * combined_sobolev_norm(vorticity_state, 2.0))
    assert blowup_functional(doubled) == pytest.approx(2.0 * blowup_functional(vorticity_state))


def test_blowup_functional_of_a_density_wave(grid, sampled):
    state = VorticityState(omega=SpectralField.zeros(grid), rho=sampled(lambda x1, x2: np.cos(x1)), kappa=1.0)
    assert blowup_functional(state) == pytest.approx(1.0, rel=1e-12)
    assert blowup_functional(state.scaled(0.0)) == 0.0


def test_norm_report_of_a_state(sqg_state):
    report = norm_report(sqg_state, 1.0)
    assert report.time == sqg_state.time
    assert report.l2_energy == pytest.approx(sqg_state.theta.l2_norm() ** 2)
    assert report.accumulated_bootstrap == 0.0


def test_tracker_accumulates_time_integrals(zstate):
    tracker = NormTracker(n_regularity=1.0)
    for time in (0.0, 1.0, 3.0):
        tracker.record(zstate.with_stacked(zstate.stacked(), time))
    latest = tracker.latest
    assert latest.accumulated_blowup == pytest.approx(3.0 * latest.grad_linf, rel=1e-12)
    assert latest.accumulated_bootstrap == pytest.approx(3.0 * latest.besov_b1_inf_1, rel=1e-12)
    assert bootstrap_norm(tracker.reports) == pytest.approx(latest.accumulated_bootstrap, rel=1e-12)
    assert blowup_integral(tracker.reports) == pytest.approx(latest.accumulated_blowup, rel=1e-12)
    with pytest.raises(InvalidArgumentError):
        tracker.record(zstate.with_stacked(zstate.stacked(), 2.0))


def test_time_integrals_validate_their_series():
    reports = [_report(0.0), _report(1.0)]
    assert bootstrap_norm(reports[:1]) == 0.0
    with pytest.raises(InvalidArgumentError):
        bootstrap_norm(reports[::-1])
    with pytest.raises(InvalidArgumentError):
        blowup_integral([_report(0.0), _report(math.nan)])


def test_gronwall_constant():
    assert gronwall_constant([_report(0.0), _report(1.0, accumulated_blowup=1.0)]) == 0.0
    growing = [_report(0.0), _report(1.0, sobolev_hn=math.e, accumulated_blowup=1.0)]
    assert gronwall_constant(growing) == pytest.approx(2.0)


def test_decay_window_and_log_times():
    assert decay_window(100.0, 5.0) == 5.0
    with pytest.raises(InvalidArgumentError):
        decay_window(100.0, 0.0)
    times = log_times(1.0, 100.0, 16)
    assert times.size == 33
    assert times[0] == pytest.approx(1.0)
    assert times[-1] == pytest.approx(100.0)
    with pytest.raises(InvalidArgumentError):
        log_times(10.0, 1.0)


def test_linear_decay_fit_guards(random_field):
    field = random_field()
    # the 2 pi box caps the window at pi / 2 for kappa = 1
    with pytest.raises(InvalidArgumentError):
        linear_decay_fit(field, 1.0, 0, log_times(0.1, 10.0))
    with pytest.raises(InsufficientDataError):
        linear_decay_fit(field, 1.0, 0, [0.1, 0.2, 0.4, 1.0])
    with pytest.raises(InvalidArgumentError):
        linear_decay_fit(field, 1.0, 0, [0.2, 0.1])
    with pytest.raises(InvalidArgumentError):
        linear_decay_fit(field, 1.0, 10, log_times(0.1, 1.5))


def test_linear_decay_fit_reports_lp_slopes():
    grid = make_grid(64, 16.0 * math.pi)
    fit = linear_decay_fit(localized_bump(grid), 1.0, 0, log_times(1.0, 10.0), p_values=(4.0,))
    assert fit.times.size == fit.sup_norms.size == fit.constant_ratios.size
    assert fit.window == (pytest.approx(1.0), pytest.approx(10.0))
    assert set(fit.lp_slopes) == {4.0}
    assert math.isfinite(fit.slope)
    assert 0.0 <= fit.r_squared <= 1.0


@pytest.mark.slow
@pytest.mark.parametrize("band", [-1, 0, 1, 2])
def test_sup_and_l4_decay_rates(band):
    grid = make_grid(1024, 200.0 * math.pi)
    fit = linear_decay_fit(axial_packet(grid, band), 1.0, band, log_times(5.0, 150.0), p_values=(4.0,))
    # (kappa t)^(-1/2) in sup, (kappa t)^(-1/4) in L^4
    assert -0.6 <= fit.slope <= -0.4
    assert -0.3 <= fit.lp_slopes[4.0] <= -0.2
    assert fit.r_squared > 0.9


@pytest.mark.parametrize(("q", "r"), [(4.0, math.inf), (8.0, 4.0), (12.0, 3.0), (math.inf, 2.0)])
def test_admissible_pairs(q, r):
    assert admissible_r(q) == r


def test_admissible_pair_rejects_small_q():
    with pytest.raises(InvalidArgumentError):
        admissible_r(3.0)


def test_energy_pair_ratio_is_one(rng):
    field = random_band_field(make_grid(32, 8.0 * math.pi), rng)
    assert strichartz_ratio(field, 1.0, math.inf, 0, samples=33) == pytest.approx(1.0, abs=1e-12)


def test_strichartz_measurement_respects_the_window(random_field):
    field = random_field()
    measurement = strichartz_measurement(field, 1.0, 4.0, 1, samples=9)
    assert measurement.horizon == pytest.approx(decay_window(field.grid.domain_length, 1.0))
    assert measurement.r == math.inf
    assert measurement.ratio > 0.0
    with pytest.raises(InvalidArgumentError):
        strichartz_measurement(field, 1.0, 4.0, 1, horizon=10.0)


def test_duhamel_ratio(random_field, grid):
    field = random_field()
    assert duhamel_strichartz_ratio(lambda s: SpectralField.zeros(grid), 1.0, 4.0, 1, 1.0, samples=5) == 0.0
    resonant = duhamel_strichartz_ratio(lambda s: propagator(field, 1.0, s, sign=-1), 1.0, 4.0, 1, 1.0, samples=9)
    assert math.isfinite(resonant)
    assert resonant > 0.0


def test_resonant_energy_pair_duhamel_ratio_is_one(random_field):
    field = random_field()
    ratio = duhamel_strichartz_ratio(lambda s: propagator(field, 1.0, s, sign=-1), 1.0, math.inf, 1, 1.0, samples=9)
    assert ratio == pytest.approx(1.0, rel=1e-10)


def test_duhamel_ratio_is_stable_across_kappa(random_field):
    shape = random_field()
    ratios = []
    for kappa in (1.0, 4.0):
        horizon = decay_window(shape.grid.domain_length, kappa)

        def forcing(s: float, horizon: float = horizon) -> SpectralField:
            return shape * (1.0 + 0.5 * math.sin(2.0 * math.pi * s / horizon))

        ratios.append(duhamel_strichartz_ratio(forcing, kappa, 4.0, 1, horizon, samples=33))
    assert ratios[1] == pytest.approx(ratios[0], rel=0.3)


def test_duhamel_horizon_is_checked_before_sampling_the_forcing(random_field, mocker):
    field = random_field()
    forcing = mocker.Mock(return_value=field)
    with pytest.raises(InvalidArgumentError):
        duhamel_strichartz_measurement(forcing, 1.0, 4.0, 1, 10.0, samples=9)
    assert forcing.call_count == 1
    with pytest.raises(InvalidArgumentError):
        duhamel_strichartz_measurement(forcing, 1.0, 4.0, 1, -1.0, samples=9)
    assert forcing.call_count == 2
    measurement = duhamel_strichartz_measurement(forcing, 1.0, 4.0, 1, 1.0, samples=9)
    assert forcing.call_count == 2 + 9
    assert measurement.horizon == 1.0


def test_bootstrap_linear_bound_ratio(random_field):
    ratio = bootstrap_linear_bound_ratio(random_field(), 1.0, 1.0, samples=9)
    assert math.isfinite(ratio)
    assert ratio > 0.0


@pytest.mark.slow
def test_accumulated_bootstrap_norm_grows_like_square_root_of_time():
    packet = axial_packet(make_grid(256, 100.0 * math.pi), 0)
    early, late = 20.0, 75.0
    # the ratio divides by tau^(3/4) for q = 4
    accumulated = {tau: bootstrap_linear_bound_ratio(packet, 1.0, tau, samples=129) * tau**0.75 for tau in (early, late)}
    exponent = math.log(accumulated[late] / accumulated[early]) / math.log(late / early)
    assert 0.4 <= exponent <= 0.7


def test_product_estimate_ratio(random_field, sampled):
    ratio = product_estimate_ratio(random_field(), random_field(), 1.0)
    assert math.isfinite(ratio)
    assert ratio > 0.0
    with pytest.raises(NonzeroMeanError):
        product_estimate_ratio(sampled(lambda x1, x2: 1.0 + np.cos(x1)), random_field(), 1.0)


def test_summation_ratio(grid, random_field):
    assert summation_ratio(SpectralField.zeros(grid)) == 0.0
    assert summation_ratio(random_field(), 2.0, 0.5) > 0.0


def test_product_estimate_corpus_is_bounded(grid, rng):
    worst = 0.0
    for _ in range(100):
        f = random_band_field(grid, rng, n_regularity=float(rng.uniform(0.0, 3.0)))
        g = random_band_field(grid, rng, n_regularity=float(rng.uniform(0.0, 3.0)))
        worst = max(worst, product_estimate_ratio(f, g, float(rng.uniform(0.0, 3.0))))
    assert 0.0 < worst < 50.0
