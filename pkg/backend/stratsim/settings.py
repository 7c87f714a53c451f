"""Process settings."""

import contextlib
import sys

from loguru import logger
from pydantic import Field
from pydantic_settings import BaseSettings
from pydantic_settings import SettingsConfigDict

LOG_FORMAT = "<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | pid {process} | <cyan>{name}</cyan>:{line} - <level>{message}</level>"


class Settings(BaseSettings):
    """Process-wide settings read from the environment.

    Run parameters (grid, physics, experiments) live in the TOML run
    configuration, not here.

    Args:
        BaseSettings (BaseSettings): pydantic BaseSettings class
    """

    model_config = SettingsConfigDict(case_sensitive=True)

    debug: bool = Field(False, validation_alias="DEBUG")
    wait_for_debugger_connected: bool = Field(False, validation_alias="WAIT_FOR_DEBUGGER")
    log_level: str = Field("INFO", validation_alias="LOG_LEVEL")
    threads: int = Field(1, ge=1, validation_alias="STRATSIM_THREADS")
    fft_workers: int = Field(1, ge=1, validation_alias="STRATSIM_FFT_WORKERS")

    def __init__(self, *args, **kwargs) -> None:
        """Init settings and the log sink of this process."""
        super().__init__(*args, **kwargs)
        self._configure_sink()

    def _configure_sink(self):
        # sweep workers import this module again, one sink per process
        with contextlib.suppress(ValueError):
            logger.remove(0)
        if logger._core.handlers:  # noqa: SLF001
            return
        try:
            logger.add(sys.stderr, level=self.log_level, format=LOG_FORMAT, enqueue=True)
        except ValueError:
            logger.add(sys.stderr, level="INFO", format=LOG_FORMAT, enqueue=True)
            logger.warning(f"unknown LOG_LEVEL {self.log_level!r}, falling back to INFO")


settings = Settings()


def get_logger():  # noqa: ANN201
    """Logger shared by every stratsim module."""
    return logger
