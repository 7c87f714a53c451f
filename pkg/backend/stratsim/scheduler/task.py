"""Scheduler Task that logs the progress of long sweeps."""

import threading
import time

from apscheduler.schedulers.background import BackgroundScheduler

from backend.stratsim.settings import get_logger

logger = get_logger()


class ProgressHeartbeat:
    """Counts finished sweep runs and logs the progress at a fixed interval.

    The counter is fed from the main thread (`tick`) while `report` runs in the
    scheduler thread.
    """

    def __init__(self, total: int, interval_sec: int = 30):
        """Initialize the ProgressHeartbeat.

        Args:
            total (int): number of runs of the sweep
            interval_sec (int): logging interval in seconds. Defaults to 30.
        """
        self.total = total
        self.interval_sec = interval_sec
        self.completed = 0
        self._lock = threading.Lock()
        self._started_at = time.monotonic()
        self._scheduler: BackgroundScheduler | None = None

    def tick(self, *_):  # noqa: ANN002
        """Register one finished run."""
        with self._lock:
            self.completed += 1

    def report(self):
        """Log completed runs, elapsed time and a linear ETA."""
        with self._lock:
            completed = self.completed
        elapsed = time.monotonic() - self._started_at
        if completed:
            eta = elapsed / completed * (self.total - completed)
            logger.info(f"[sweep progress] {completed}/{self.total} runs | elapsed {elapsed:.0f}s | eta {eta:.0f}s")
        else:
            logger.info(f"[sweep progress] 0/{self.total} runs | elapsed {elapsed:.0f}s")

    def start(self):
        """Start the background scheduler.

        Note:
            The scheduler runs in a daemon thread; call `stop` once the sweep returns.
        """
        self._started_at = time.monotonic()
        self._scheduler = BackgroundScheduler()
        self._scheduler.add_job(self.report, "interval", seconds=self.interval_sec)
        self._scheduler.start()

    def stop(self):
        """Stop the scheduler and log the final count."""
        if self._scheduler is not None:
            self._scheduler.shutdown(wait=False)
            self._scheduler = None
        self.report()

    def __enter__(self) -> "ProgressHeartbeat":
        """Start on entering."""
        self.start()
        return self

    def __exit__(self, *args):
        """Stop on exit."""
        self.stop()
