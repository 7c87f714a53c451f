"""Results unit of work.

A study handler stages its tables, checkpoints and plot scripts inside one
unit of work; commit writes them, leaving the block without commit drops them.
"""

from typing import Optional

from backend.stratsim.core import repository
from backend.stratsim.core.repository import AbstractResultsRepository
from backend.stratsim.foundation.service.unit_of_work import AbstractUnitOfWork
from backend.stratsim.settings import get_logger

logger = get_logger()


class AbstractResultsUnitOfWork(AbstractUnitOfWork):
    """Abstract class to define Study unit of work behavior.

    Args:
        AbstractUnitOfWork (AbstractUnitOfWork): Base abstract unit of work
    """

    def __init__(self):
        """Abstract Unit of Work Constructor."""
        self._studies: Optional[repository.AbstractResultsRepository] = None

    def collect_new_events(self):
        """Collect events from all visited repository items."""
        if self._studies is not None:
            for study in self.studies.seen:
                while study.events:
                    yield study.events.pop(0)

    @property
    def studies(self) -> repository.AbstractResultsRepository:
        """Ensure studies is initialized before use."""
        if self._studies is None:
            raise RuntimeError("Studies repository has not been initialized yet.")
        return self._studies

    @studies.setter
    def studies(self, value: repository.AbstractResultsRepository):
        self._studies = value


class ResultsUnitOfWork(AbstractResultsUnitOfWork):
    """Concrete Unit of Work: artifacts are written on commit, dropped on rollback."""

    def __init__(self, repository: AbstractResultsRepository):
        """Unit of work initialization.

        Args:
            repository (AbstractResultsRepository): results storage
        """
        super().__init__()
        self._repository = repository

    def __enter__(self) -> "ResultsUnitOfWork":
        """Context manager entering."""
        self.studies = self._repository
        return self

    def __exit__(self, *args):
        """Exit from context manager."""
        super().__exit__(*args)

    def _commit(self):
        """Commit work."""
        written = self._repository.persist_staged()
        logger.info(f"committed {len(written)} artifact(s)")

    def rollback(self):
        """Rollback work."""
        self._repository.discard_staged()
