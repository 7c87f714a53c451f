import pytest

from backend.stratsim.scheduler.task import ProgressHeartbeat


@pytest.fixture
def scheduler(mocker):
    return mocker.patch("backend.stratsim.scheduler.task.BackgroundScheduler")


@pytest.fixture
def log(mocker):
    return mocker.patch("backend.stratsim.scheduler.task.logger")


def test_ticks_are_counted(log):
    heartbeat = ProgressHeartbeat(total=4)
    heartbeat.tick()
    heartbeat.tick("record")
    assert heartbeat.completed == 2
    heartbeat.report()
    message = log.info.call_args.args[0]
    assert "2/4 runs" in message
    assert "eta" in message


def test_report_before_the_first_run(log):
    ProgressHeartbeat(total=3).report()
    message = log.info.call_args.args[0]
    assert "0/3 runs" in message
    assert "eta" not in message


def test_scheduler_lifecycle(scheduler, log):
    with ProgressHeartbeat(total=2, interval_sec=5) as heartbeat:
        instance = scheduler.return_value
        instance.add_job.assert_called_once_with(heartbeat.report, "interval", seconds=5)
        instance.start.assert_called_once()
        heartbeat.tick()
    instance.shutdown.assert_called_once_with(wait=False)
    assert "1/2 runs" in log.info.call_args.args[0]


def test_stop_without_start(scheduler, log):
    heartbeat = ProgressHeartbeat(total=1)
    heartbeat.stop()
    scheduler.return_value.shutdown.assert_not_called()
    log.info.assert_called_once()
