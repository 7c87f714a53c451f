import math

import pytest

from backend.stratsim import bootstrap
from backend.stratsim.core.domain import commands
from backend.stratsim.core.domain import events
from backend.stratsim.core.domain import model
from backend.stratsim.core.experiments import InitialDataSpec
from backend.stratsim.core.experiments import ModelKind
from backend.stratsim.core.experiments import StopReason
from backend.stratsim.core.experiments import SweepConfig
from backend.stratsim.core.experiments import SweepRecord
from backend.stratsim.core.experiments import predicted_lifespan
from backend.stratsim.core.numerics.spectral import make_grid
from backend.stratsim.core.numerics.timestepper import StepperConfig
from backend.stratsim.core.persistence import decode_checkpoint
from backend.stratsim.core.repository import FilesystemResultsRepository
from backend.stratsim.core.repository import InMemoryResultsRepository
from backend.stratsim.core.selftest import CheckResult
from backend.stratsim.core.service.handlers.event_handlers import render_table
from backend.stratsim.core.service.unit_of_work import ResultsUnitOfWork
from backend.stratsim.foundation.exceptions import InvalidArgumentError
from backend.stratsim.messagebus import InvalidMessageTypeError

HANDLERS = "backend.stratsim.core.service.handlers.command_handlers"


@pytest.fixture
def repository():
    return InMemoryResultsRepository()


@pytest.fixture
def bus(repository):
    return bootstrap.bootstrap(uow=ResultsUnitOfWork(repository))


@pytest.fixture
def passing_selftest(mocker):
    return mocker.patch(f"{HANDLERS}.run_selftest", return_value=[CheckResult("identity", 0.0, 1e-12)])


@pytest.fixture
def no_scheduler(mocker):
    return mocker.patch("backend.stratsim.scheduler.task.BackgroundScheduler")


def _fake_run(task):
    return SweepRecord(
        model=ModelKind.BOUSSINESQ,
        epsilon=task.epsilon,
        kappa=task.kappa,
        n_regularity=3.5,
        t_star=predicted_lifespan(task.kappa, task.epsilon),
        stop_reason=StopReason.H_N_DOUBLING,
        seed=task.seed,
        grid_n=64,
        domain_length=20.0 * math.pi,
        dt=0.01,
    )


def test_simulate_stages_norms_checkpoint_and_plot(bus, repository):
    cmd = commands.SimulateCommand(
        grid=make_grid(16, 2.0 * math.pi),
        initial=InitialDataSpec(epsilon=0.05, n_regularity=1.0),
        kappa=1.0,
        stepper=StepperConfig(dt=0.01, t_end=0.03, diagnostic_stride=1),
        n_regularity=1.0,
        checkpoint=True,
        emit_plots=True,
    )
    bus.handle(cmd)
    assert set(repository.files) == {
        "simulate_norms.csv",
        "simulate_norms.json",
        "simulate_final.chk",
        "simulate_norms_plot.py",
    }
    assert len(repository.files["simulate_norms.csv"].splitlines()) == 5
    assert "energy_drift" in repository.files["simulate_norms.csv"].splitlines()[0]
    assert decode_checkpoint(repository.files["simulate_final.chk"]).time == pytest.approx(0.03)
    study = bus.uow.studies.get("simulate")
    assert study.outcome["final_time"] == pytest.approx(0.03)
    assert math.isfinite(study.outcome["gronwall_constant"])


def test_sweep_fits_the_scaling_exponents(bus, repository, mocker, no_scheduler):
    run_task = mocker.patch("backend.stratsim.core.experiments.run_sweep_task", side_effect=_fake_run)
    bus.handle(commands.SweepCommand(sweep=SweepConfig(), progress_interval_sec=60))
    assert run_task.call_count == 9
    no_scheduler.return_value.add_job.assert_called_once()
    outcome = bus.uow.studies.get("sweep").outcome
    assert outcome["runs"] == 9
    assert outcome["censored"] == 0
    assert outcome["monotone_in_epsilon"]
    assert outcome["alpha_eps"] == pytest.approx(-4.0 / 3.0, abs=1e-10)
    assert outcome["beta_kappa"] == pytest.approx(1.0 / 3.0, abs=1e-10)
    assert outcome["fit_accepted"]
    assert {"sweep_records.csv", "sweep_records.json", "sweep_summary.json"} <= set(repository.files)
    assert len(repository.files["sweep_records.csv"].splitlines()) == 10


def test_quick_sweep_skips_the_fit(bus, repository, mocker, no_scheduler):
    mocker.patch("backend.stratsim.core.experiments.run_sweep_task", side_effect=_fake_run)
    bus.handle(commands.SweepCommand(sweep=SweepConfig.quick(), quick=True))
    outcome = bus.uow.studies.get("sweep").outcome
    assert outcome["runs"] == 3
    assert outcome["monotone_in_epsilon"]
    assert "alpha_eps" not in outcome


def test_decay_stages_fits_and_series(bus, repository):
    cmd = commands.DecayCommand(
        grid=make_grid(64, 16.0 * math.pi),
        kappa=1.0,
        bands=(0,),
        t_min=1.0,
        t_max=10.0,
        samples_per_decade=16,
        emit_plots=True,
    )
    bus.handle(cmd)
    header = repository.files["decay_fits.csv"].splitlines()[0].split(",")
    assert header[0] == "band"
    assert "L4_slope" in header
    assert "L4_bound" in header
    series = repository.files["decay_series.csv"].splitlines()
    assert series[0] == "time,band_0"
    assert len(series) == 18
    assert "decay_series_plot.py" in repository.files


def test_decay_needs_a_band(bus, repository):
    cmd = commands.DecayCommand(
        grid=make_grid(64, 16.0 * math.pi), kappa=1.0, bands=(), t_min=1.0, t_max=10.0, samples_per_decade=16
    )
    with pytest.raises(InvalidArgumentError):
        bus.handle(cmd)
    assert repository.files == {}


def test_strichartz_summary(bus, repository):
    cmd = commands.StrichartzCommand(
        grid=make_grid(32, 8.0 * math.pi),
        kappas=(1.0, 2.0, 4.0, 8.0),
        q=4.0,
        band=0,
        duhamel_kappas=(1.0, 4.0),
        samples=9,
    )
    bus.handle(cmd)
    outcome = bus.uow.studies.get("strichartz").outcome
    assert math.isfinite(outcome["band_shift_factor"])
    assert math.isfinite(outcome["lhs_kappa_exponent"])
    assert outcome["duhamel_spread"] >= 0.0
    lines = repository.files["strichartz.csv"].splitlines()
    assert len(lines) == 1 + 4 + 2
    assert lines[0].startswith("kind,q,r,band,kappa")
    assert "strichartz_summary.json" in repository.files


@pytest.mark.slow
def test_strichartz_scalings(bus):
    cmd = commands.StrichartzCommand(
        grid=make_grid(256, 16.0 * math.pi),
        kappas=(1.0, 2.0, 4.0, 8.0),
        q=4.0,
        band=0,
        duhamel_kappas=(1.0, 4.0),
        samples=65,
    )
    bus.handle(cmd)
    outcome = bus.uow.studies.get("strichartz").outcome
    assert -0.35 <= outcome["lhs_kappa_exponent"] <= -0.15
    assert outcome["band_shift_factor"] == pytest.approx(2.0, rel=0.2)
    assert outcome["duhamel_spread"] <= 0.3


def test_symmetry_rows(bus, repository):
    cmd = commands.SymmetryCommand(
        grid=make_grid(16, 2.0 * math.pi),
        initial=InitialDataSpec(epsilon=0.05, n_regularity=1.0),
        kappa=2.0,
        t_horizon=0.1,
        stepper=StepperConfig(dt=0.02),
        refinements=1,
    )
    bus.handle(cmd)
    lines = repository.files["symmetry.csv"].splitlines()
    assert lines[0] == "variant,dt,discrepancy,observed_order"
    assert [line.split(",")[0] for line in lines[1:]] == ["same_dt", "same_dt", "matched_steps"]
    assert float(lines[-1].split(",")[2]) < 1e-12


def test_symmetry_rejects_sqg_data(bus):
    cmd = commands.SymmetryCommand(
        grid=make_grid(16, 2.0 * math.pi),
        initial=InitialDataSpec(epsilon=0.05, model=ModelKind.SQG),
        kappa=2.0,
        t_horizon=0.1,
    )
    with pytest.raises(InvalidArgumentError):
        bus.handle(cmd)


def test_selftest_outcome(bus, repository, passing_selftest):
    bus.handle(commands.SelftestCommand(seed=3, quick=True))
    passing_selftest.assert_called_once_with(seed=3, quick=True)
    assert bus.uow.studies.get("selftest").outcome == {"passed": True}
    assert set(repository.files) == {"selftest.csv", "selftest.json"}


def test_failed_command_writes_nothing(bus, repository, mocker):
    mocker.patch(f"{HANDLERS}.run_selftest", side_effect=RuntimeError("boom"))
    with pytest.raises(RuntimeError):
        bus.handle(commands.SelftestCommand())
    assert repository.files == {}
    assert repository.staged == {}


def test_event_handler_failures_do_not_stop_the_bus(mocker, repository, passing_selftest):
    calls = []

    def failing(event: events.SelftestFinishedEvent):
        calls.append(event)
        raise RuntimeError("table rendering failed")

    mocker.patch.dict(bootstrap.EVENT_HANDLERS, {events.SelftestFinishedEvent: [failing]})
    bus = bootstrap.bootstrap(uow=ResultsUnitOfWork(repository))
    bus.handle(commands.SelftestCommand())
    assert len(calls) == 1
    assert calls[0].passed
    assert "selftest.csv" in repository.files


def test_invalid_message(bus):
    with pytest.raises(InvalidMessageTypeError):
        bus.handle("simulate")


def test_default_bootstrap_keeps_results_in_memory():
    bus = bootstrap.bootstrap()
    assert isinstance(bus.uow._repository, InMemoryResultsRepository)
    with pytest.raises(RuntimeError):
        bus.uow.studies  # noqa: B018


def test_filesystem_repository(tmp_path):
    repository = FilesystemResultsRepository(tmp_path / "out")
    study = model.Study("simulate")
    study.attach("a.csv", "x\n1\n")
    study.attach("b.chk", b"\x00\x01")
    repository.add(study)
    assert sorted(repository.persist_staged()) == ["a.csv", "b.chk"]
    assert (tmp_path / "out" / "a.csv").read_text() == "x\n1\n"
    assert (tmp_path / "out" / "b.chk").read_bytes() == b"\x00\x01"
    assert repository.get("simulate") is study
    assert repository.get("sweep") is None


def test_discarded_studies_are_not_written(repository):
    study = model.Study("decay")
    study.attach("decay.csv", "band\n")
    repository.add(study)
    repository.discard_staged()
    assert repository.persist_staged() == []
    assert repository.files == {}


def test_study_identity():
    study = model.Study("sweep")
    study.attach("x.csv", "1")
    study.attach("x.csv", "2")
    assert study.artifacts["x.csv"].content == "2"
    assert study == model.Study("sweep")
    assert study != "sweep"
    assert len({study, model.Study("sweep")}) == 1
    assert repr(study) == "<Study sweep, 1 artifacts>"


def test_render_table():
    assert render_table([]) == ""
    table = render_table([{"check": "identity", "value": 1.0 / 3.0}], title="selftest")
    assert "identity" in table
    assert "0.333333" in table
    assert "selftest" in table
