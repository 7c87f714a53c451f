"""Domain Models.

In this file are defined the domain entities of a study run.

aggregate: cluster of associated objects that is treated as a unit for
the purpose of data changes. (defines consistency boundary).

value object: immutable domain object entirely defined by its attributes.

entity: domain object whose attributes may change,
but with a recognizable identity over time.
"""

from dataclasses import dataclass

from backend.stratsim.core.domain import events
from backend.stratsim.foundation.domain.events import Event
from backend.stratsim.settings import get_logger

logger = get_logger()


@dataclass(frozen=True)
class Artifact:
    """Output file of a study (value object).

    Attributes:
        name (str): file name relative to the output directory
        content (str | bytes): file content
    """

    name: str
    content: str | bytes


class Study:
    """core business model aggregate: one subcommand run and the files it produces."""

    def __init__(self, name: str) -> None:
        """Initialize entity.

        Args:
            name (str): study identifier, also the prefix of its artifacts
        """
        self.name = name
        self.artifacts: dict[str, Artifact] = {}
        self.outcome: dict[str, object] = {}
        # tracks generated events related to this aggregate
        self.events: list[Event] = []

    def attach(self, name: str, content: str | bytes):
        """Attach an output file.

        Args:
            name (str): file name relative to the output directory
            content (str | bytes): file content
        """
        if name in self.artifacts:
            logger.warning(f"artifact {name} of study {self.name} overwritten")
        self.artifacts[name] = Artifact(name=name, content=content)

    def generate_event_simulation_completed(self, rows: list[dict], final_time: float, aborted: bool):
        """Generate event in response to command execution."""
        self.events.append(
            events.SimulationCompletedEvent(study=self.name, rows=rows, final_time=final_time, aborted=aborted)
        )

    def generate_event_sweep_completed(self, rows: list[dict], summary: dict[str, object]):
        """Generate event in response to command execution."""
        self.events.append(events.SweepCompletedEvent(study=self.name, rows=rows, summary=summary))

    def generate_event_decay_measured(self, rows: list[dict]):
        """Generate event in response to command execution."""
        self.events.append(events.DecayMeasuredEvent(study=self.name, rows=rows))

    def generate_event_strichartz_measured(self, rows: list[dict], summary: dict[str, object]):
        """Generate event in response to command execution."""
        self.events.append(events.StrichartzMeasuredEvent(study=self.name, rows=rows, summary=summary))

    def generate_event_symmetry_checked(self, rows: list[dict]):
        """Generate event in response to command execution."""
        self.events.append(events.SymmetryCheckedEvent(study=self.name, rows=rows))

    def generate_event_selftest_finished(self, rows: list[dict], passed: bool):
        """Generate event in response to command execution."""
        self.events.append(events.SelftestFinishedEvent(study=self.name, rows=rows, passed=passed))

    def __repr__(self) -> str:
        """String representation."""
        return f"<Study {self.name}, {len(self.artifacts)} artifacts>"

    def __eq__(self, obj: object) -> bool:
        """Equals."""
        if not isinstance(obj, Study):
            return False
        return obj.name == self.name

    def __hash__(self) -> int:
        """Hash."""
        return hash(self.name)
