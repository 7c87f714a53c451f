"""Command Handlers.

receive commands, run the numerics and stage the result files of the study
"""

import math

from dataclasses import asdict
from dataclasses import replace

from backend.stratsim.constants import REFERENCE_ALPHA
from backend.stratsim.constants import REFERENCE_BETA
from backend.stratsim.core.domain import commands
from backend.stratsim.core.domain import model
from backend.stratsim.core.experiments import axial_packet
from backend.stratsim.core.experiments import fit_power_law
from backend.stratsim.core.experiments import fit_scaling
from backend.stratsim.core.experiments import is_monotone_in_epsilon
from backend.stratsim.core.experiments import lifespan_sweep
from backend.stratsim.core.experiments import localized_bump
from backend.stratsim.core.experiments import make_initial_data
from backend.stratsim.core.experiments import predicted_lifespan
from backend.stratsim.core.experiments import sweep_tasks
from backend.stratsim.core.experiments import time_scaling_check
from backend.stratsim.core.numerics.diagnostics import NormTracker
from backend.stratsim.core.numerics.diagnostics import decay_window
from backend.stratsim.core.numerics.diagnostics import duhamel_strichartz_measurement
from backend.stratsim.core.numerics.diagnostics import gronwall_constant
from backend.stratsim.core.numerics.diagnostics import linear_decay_fit
from backend.stratsim.core.numerics.diagnostics import log_times
from backend.stratsim.core.numerics.diagnostics import strichartz_measurement
from backend.stratsim.core.numerics.littlewood_paley import project_band
from backend.stratsim.core.numerics.model import VorticityState
from backend.stratsim.core.numerics.timestepper import cfl_dt
from backend.stratsim.core.numerics.timestepper import iterate
from backend.stratsim.core.numerics.timestepper import propagator
from backend.stratsim.core.persistence import encode_checkpoint
from backend.stratsim.core.persistence import load_checkpoint
from backend.stratsim.core.persistence import records_csv
from backend.stratsim.core.persistence import records_json
from backend.stratsim.core.persistence import render_csv
from backend.stratsim.core.persistence import render_json
from backend.stratsim.core.persistence import render_plot_script
from backend.stratsim.core.selftest import run_selftest
from backend.stratsim.core.service import unit_of_work
from backend.stratsim.foundation.exceptions import InsufficientDataError
from backend.stratsim.foundation.exceptions import InvalidArgumentError
from backend.stratsim.scheduler.task import ProgressHeartbeat
from backend.stratsim.settings import get_logger

logger = get_logger()


def _attach_table(study: model.Study, stem: str, rows: list[dict]):
    """Stage rows as stem.csv and stem.json, columns in the key order of the first row."""
    columns = list(rows[0]) if rows else []
    study.attach(f"{stem}.csv", render_csv(columns, rows))
    study.attach(f"{stem}.json", render_json(columns, rows))


def simulate(
    cmd: commands.SimulateCommand,
    uow: unit_of_work.AbstractResultsUnitOfWork,
):
    """Simulate handler: integrate one trajectory and stage its norm history.

    Args:
        cmd (commands.SimulateCommand): command triggering this handler
        uow (unit_of_work.AbstractResultsUnitOfWork): unit of work
    """
    with uow:
        study = model.Study(name=cmd.name)
        if cmd.resume_from is not None:
            state = load_checkpoint(cmd.resume_from, grid=cmd.grid)
            logger.info(f"resuming from {cmd.resume_from} at t={state.time}")
        else:
            state = make_initial_data(cmd.initial, cmd.grid, kappa=cmd.kappa)
        initial_energy = state.l2_energy()
        tracker = NormTracker(cmd.n_regularity)
        rows = []
        final = state
        for snapshot in iterate(state, cmd.stepper):
            report = tracker.record(snapshot)
            row = asdict(report)
            row["energy_drift"] = report.l2_energy / initial_energy - 1.0 if initial_energy > 0 else 0.0
            rows.append(row)
            final = snapshot
        study.outcome["gronwall_constant"] = gronwall_constant(tracker.reports)
        study.outcome["final_time"] = final.time
        _attach_table(study, "simulate_norms", rows)
        if cmd.checkpoint:
            study.attach("simulate_final.chk", encode_checkpoint(final))
        if cmd.emit_plots:
            study.attach(
                "simulate_norms_plot.py",
                render_plot_script(
                    "simulate_norms.csv", "time", ["sobolev_hn", "besov_b1_inf_1", "grad_linf"], "norm history", log_y=True
                ),
            )
        # save data
        uow.studies.add(study)
        study.generate_event_simulation_completed(rows=rows[-1:], final_time=final.time, aborted=False)
        # commit
        uow.commit()


def sweep(
    cmd: commands.SweepCommand,
    uow: unit_of_work.AbstractResultsUnitOfWork,
):
    """Sweep handler: lifespan sweep, monotonicity and the scaling fit.

    The quick profile only checks monotonicity along the epsilon axis.

    Args:
        cmd (commands.SweepCommand): command triggering this handler
        uow (unit_of_work.AbstractResultsUnitOfWork): unit of work
    """
    with uow:
        study = model.Study(name=cmd.name)
        config = cmd.sweep
        with ProgressHeartbeat(len(sweep_tasks(config)), cmd.progress_interval_sec) as heartbeat:
            records = lifespan_sweep(config.eps_axis, config.kappa_axis, config, on_record=heartbeat.tick)
        summary: dict[str, object] = {
            "runs": len(records),
            "censored": sum(record.censored for record in records),
            "monotone_in_epsilon": is_monotone_in_epsilon(records, config.reference_kappa),
        }
        if not cmd.quick:
            try:
                fit = fit_scaling(records, config.reference_kappa, config.reference_epsilon)
                summary.update(
                    {
                        "alpha_eps": fit.alpha_eps.exponent,
                        "alpha_reference": REFERENCE_ALPHA,
                        "alpha_r_squared": fit.alpha_eps.r_squared,
                        "beta_kappa": fit.beta_kappa.exponent,
                        "beta_reference": REFERENCE_BETA,
                        "beta_r_squared": fit.beta_kappa.r_squared,
                        "fit_accepted": fit.accepted,
                        "consistent": fit.consistent,
                    }
                )
            except InsufficientDataError as error:
                logger.warning(f"scaling fit skipped: {error}")
        rows = []
        for record in records:
            row = record.as_row()
            row["predicted"] = predicted_lifespan(record.kappa, record.epsilon) if record.kappa > 0 else math.nan
            rows.append(row)
        study.outcome.update(summary)
        study.attach("sweep_records.csv", records_csv(records))
        study.attach("sweep_records.json", records_json(records))
        study.attach("sweep_summary.json", render_json(list(summary), [summary]))
        if cmd.emit_plots:
            study.attach(
                "sweep_records_plot.py",
                render_plot_script("sweep_records.csv", "epsilon", ["T_star"], "lifespan proxy", log_x=True, log_y=True),
            )
        # save data
        uow.studies.add(study)
        study.generate_event_sweep_completed(rows=rows, summary=summary)
        # commit
        uow.commit()


def decay(
    cmd: commands.DecayCommand,
    uow: unit_of_work.AbstractResultsUnitOfWork,
):
    """Decay handler: fit the sup-norm decay of the linear flow band by band.

    Args:
        cmd (commands.DecayCommand): command triggering this handler
        uow (unit_of_work.AbstractResultsUnitOfWork): unit of work
    """
    if not cmd.bands:
        raise InvalidArgumentError("decay needs at least one band")
    with uow:
        study = model.Study(name=cmd.name)
        times = log_times(cmd.t_min, cmd.t_max, cmd.samples_per_decade)
        fits = [
            linear_decay_fit(
                axial_packet(cmd.grid, k, cmd.angular_spread, cmd.radial_spread),
                cmd.kappa,
                k,
                times,
                p_values=cmd.p_values,
            )
            for k in cmd.bands
        ]
        rows = []
        for fit in fits:
            row = {
                "band": fit.band,
                "slope": fit.slope,
                "r_squared": fit.r_squared,
                "t_min": fit.window[0],
                "t_max": fit.window[1],
                "max_constant_ratio": fit.max_constant_ratio,
                "flagged": fit.flagged,
            }
            for p, slope in fit.lp_slopes.items():
                row[f"L{p:g}_slope"] = slope
                row[f"L{p:g}_bound"] = -0.5 + 1.0 / p
            rows.append(row)
        series = [
            {"time": t, **{f"band_{fit.band}": fit.sup_norms[index] for fit in fits}} for index, t in enumerate(times)
        ]
        _attach_table(study, "decay_fits", rows)
        _attach_table(study, "decay_series", series)
        if cmd.emit_plots:
            study.attach(
                "decay_series_plot.py",
                render_plot_script(
                    "decay_series.csv", "time", [f"band_{k}" for k in cmd.bands], "linear decay", log_x=True, log_y=True
                ),
            )
        # save data
        uow.studies.add(study)
        study.generate_event_decay_measured(rows=rows)
        # commit
        uow.commit()


def _band_normalized_lhs(lhs: float, piece_norm: float) -> float:
    return lhs / piece_norm if piece_norm > 0 else 0.0


def strichartz(
    cmd: commands.StrichartzCommand,
    uow: unit_of_work.AbstractResultsUnitOfWork,
):
    """Strichartz handler: homogeneous ratios along the kappa axis, band shift and Duhamel ratios.

    Args:
        cmd (commands.StrichartzCommand): command triggering this handler
        uow (unit_of_work.AbstractResultsUnitOfWork): unit of work
    """
    with uow:
        study = model.Study(name=cmd.name)
        f0 = localized_bump(cmd.grid, cmd.width)
        rows = []
        homogeneous = []
        for kappa in cmd.kappas:
            measurement = strichartz_measurement(f0, kappa, cmd.q, cmd.band, horizon=cmd.horizon, samples=cmd.samples)
            homogeneous.append(measurement)
            rows.append({"kind": "homogeneous", **asdict(measurement)})
        for kappa in cmd.duhamel_kappas:

            def forcing(s: float, kappa: float = kappa):  # noqa: ANN202
                return propagator(f0, kappa, s, sign=-1)

            horizon = cmd.horizon if cmd.horizon is not None else decay_window(cmd.grid.domain_length, kappa)
            measurement = duhamel_strichartz_measurement(forcing, kappa, cmd.q, cmd.band, horizon, samples=cmd.samples)
            rows.append({"kind": "duhamel", **asdict(measurement)})

        summary: dict[str, object] = {}
        if homogeneous:
            # data dilated by 2 puts the same profile one band up
            dilated = localized_bump(cmd.grid, 0.5 * cmd.width)
            base = homogeneous[0]
            shifted = strichartz_measurement(
                dilated, base.kappa, cmd.q, cmd.band + 1, horizon=cmd.horizon, samples=cmd.samples
            )
            base_lhs = _band_normalized_lhs(base.lhs, project_band(f0, cmd.band).l2_norm())
            shifted_lhs = _band_normalized_lhs(shifted.lhs, project_band(dilated, cmd.band + 1).l2_norm())
            summary["band_shift_factor"] = shifted_lhs / base_lhs if base_lhs > 0 else math.nan
            try:
                fit = fit_power_law([m.kappa for m in homogeneous], [m.lhs for m in homogeneous])
                summary["lhs_kappa_exponent"] = fit.exponent
                summary["lhs_kappa_r_squared"] = fit.r_squared
            except InsufficientDataError as error:
                logger.warning(f"kappa exponent skipped: {error}")
        duhamel_ratios = [row["ratio"] for row in rows if row["kind"] == "duhamel"]
        if duhamel_ratios and min(duhamel_ratios) > 0:
            summary["duhamel_spread"] = max(duhamel_ratios) / min(duhamel_ratios) - 1.0
        study.outcome.update(summary)
        _attach_table(study, "strichartz", rows)
        study.attach("strichartz_summary.json", render_json(list(summary), [summary]))
        if cmd.emit_plots:
            study.attach(
                "strichartz_plot.py",
                render_plot_script("strichartz.csv", "kappa", ["lhs", "ratio"], "Strichartz ratios", log_x=True, log_y=True),
            )
        # save data
        uow.studies.add(study)
        study.generate_event_strichartz_measured(rows=rows, summary=summary)
        # commit
        uow.commit()


def symmetry(
    cmd: commands.SymmetryCommand,
    uow: unit_of_work.AbstractResultsUnitOfWork,
):
    """Symmetry handler: time-scaling discrepancy under successive dt halvings.

    Args:
        cmd (commands.SymmetryCommand): command triggering this handler
        uow (unit_of_work.AbstractResultsUnitOfWork): unit of work
    """
    with uow:
        study = model.Study(name=cmd.name)
        state = make_initial_data(cmd.initial, cmd.grid, kappa=1.0)
        if not isinstance(state, VorticityState):
            raise InvalidArgumentError("the time-scaling check runs on the Boussinesq system")
        base_dt = cmd.stepper.dt
        if base_dt is None:
            run_a = state.with_kappa(cmd.kappa)
            run_b = state.scaled(1.0 / cmd.kappa)
            base_dt = min(
                cfl_dt(run_a, cmd.stepper.cfl_safety, cmd.stepper.scheme),
                cfl_dt(run_b, cmd.stepper.cfl_safety, cmd.stepper.scheme),
            )
        rows = []
        previous = None
        for level in range(cmd.refinements + 1):
            dt = base_dt / 2**level
            discrepancy = time_scaling_check(state.omega, state.rho, cmd.kappa, cmd.t_horizon, replace(cmd.stepper, dt=dt))
            order = math.log2(previous / discrepancy) if previous and discrepancy > 0 else math.nan
            rows.append({"variant": "same_dt", "dt": dt, "discrepancy": discrepancy, "observed_order": order})
            previous = discrepancy
        matched = time_scaling_check(
            state.omega, state.rho, cmd.kappa, cmd.t_horizon, replace(cmd.stepper, dt=base_dt), matched_steps=True
        )
        rows.append({"variant": "matched_steps", "dt": base_dt, "discrepancy": matched, "observed_order": math.nan})
        _attach_table(study, "symmetry", rows)
        # save data
        uow.studies.add(study)
        study.generate_event_symmetry_checked(rows=rows)
        # commit
        uow.commit()


def selftest(
    cmd: commands.SelftestCommand,
    uow: unit_of_work.AbstractResultsUnitOfWork,
):
    """Selftest handler: run the invariant suite.

    Args:
        cmd (commands.SelftestCommand): command triggering this handler
        uow (unit_of_work.AbstractResultsUnitOfWork): unit of work
    """
    with uow:
        study = model.Study(name=cmd.name)
        results = run_selftest(seed=cmd.seed, quick=cmd.quick)
        rows = [
            {"check": result.name, "value": result.value, "bound": result.bound, "passed": result.passed}
            for result in results
        ]
        passed = all(result.passed for result in results)
        study.outcome["passed"] = passed
        _attach_table(study, "selftest", rows)
        # save data
        uow.studies.add(study)
        study.generate_event_selftest_finished(rows=rows, passed=passed)
        # commit
        uow.commit()
