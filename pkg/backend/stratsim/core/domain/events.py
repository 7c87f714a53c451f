"""Events.

Represent something that happened during a study and has to be handled.
Rows are flat dicts rendered as summary tables by the event handlers.
"""

from dataclasses import dataclass
from dataclasses import field

from backend.stratsim.foundation.domain.events import Event


@dataclass
class SimulationCompletedEvent(Event):
    """Simulation Completed Event."""

    study: str
    rows: list[dict]
    final_time: float
    aborted: bool = False


@dataclass
class SweepCompletedEvent(Event):
    """Sweep Completed Event."""

    study: str
    rows: list[dict]
    summary: dict[str, object] = field(default_factory=dict)


@dataclass
class DecayMeasuredEvent(Event):
    """Decay Measured Event."""

    study: str
    rows: list[dict]


@dataclass
class StrichartzMeasuredEvent(Event):
    """Strichartz Measured Event."""

    study: str
    rows: list[dict]
    summary: dict[str, object] = field(default_factory=dict)


@dataclass
class SymmetryCheckedEvent(Event):
    """Symmetry Checked Event."""

    study: str
    rows: list[dict]


@dataclass
class SelftestFinishedEvent(Event):
    """Selftest Finished Event."""

    study: str
    rows: list[dict]
    passed: bool
