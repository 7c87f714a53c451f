"""core repository.

abstraction around persistent storage of study results: studies are staged in
memory and their artifacts reach the storage only on persist
"""

import abc

from pathlib import Path

from backend.stratsim.core.domain import model
from backend.stratsim.settings import get_logger

logger = get_logger()


class AbstractResultsRepository(abc.ABC):
    """Abstract repository.

    From this, concrete repository for Study must be implemented

    Args:
        abc (abc.ABC): Abstract class
    """

    def __init__(self):
        """Initialize repository."""
        # track seen elements
        self.seen: set[model.Study] = set()
        self.staged: dict[str, model.Study] = {}

    def add(self, study: model.Study):
        """Stage a Study.

        Args:
            study (model.Study): Study model instance
        """
        self.staged[study.name] = study
        # track seen element
        self.seen.add(study)

    def get(self, name: str) -> model.Study | None:
        """Get a staged or already persisted Study by name.

        Args:
            name (str): Study identifier

        Returns:
            model.Study | None: Study model instance or None
        """
        study = self.staged.get(name) or next((seen for seen in self.seen if seen.name == name), None)
        if study:
            # track seen element
            self.seen.add(study)
        return study

    def persist_staged(self) -> list[str]:
        """Write the artifacts of every staged Study.

        Returns:
            list[str]: names of the written artifacts
        """
        written = []
        for study in self.staged.values():
            for artifact in study.artifacts.values():
                self._write(artifact)
                written.append(artifact.name)
        self.staged.clear()
        return written

    def discard_staged(self):
        """Drop staged studies without writing anything."""
        if self.staged:
            logger.warning(f"discarding unsaved studies: {sorted(self.staged)}")
        self.staged.clear()

    @abc.abstractmethod
    def _write(self, artifact: model.Artifact):
        raise NotImplementedError


class InMemoryResultsRepository(AbstractResultsRepository):
    """In Memory repository for Study artifacts.

    Args:
        AbstractResultsRepository (AbstractResultsRepository): abstract class defining
            repository behavior
    """

    def __init__(self):
        """Initialize repository."""
        super().__init__()
        self.files: dict[str, str | bytes] = {}

    def _write(self, artifact: model.Artifact):
        self.files[artifact.name] = artifact.content


class FilesystemResultsRepository(AbstractResultsRepository):
    """Repository writing Study artifacts below an output directory."""

    def __init__(self, out_dir: Path):
        """Initialize repository.

        Args:
            out_dir (Path): output directory, created on first write
        """
        super().__init__()
        self.out_dir = Path(out_dir)

    def _write(self, artifact: model.Artifact):
        path = self.out_dir / artifact.name
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(artifact.content, bytes):
            path.write_bytes(artifact.content)
        else:
            path.write_text(artifact.content)
        logger.debug(f"wrote {path}")
