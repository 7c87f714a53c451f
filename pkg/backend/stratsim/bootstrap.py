"""Wiring of the study handlers.

Builds the results unit of work and binds it into every handler that asks for it.
"""

import functools
import inspect

from collections.abc import Callable
from pathlib import Path
from typing import Any

from backend.stratsim import messagebus
from backend.stratsim.core.domain import commands
from backend.stratsim.core.domain import events
from backend.stratsim.core.repository import FilesystemResultsRepository
from backend.stratsim.core.repository import InMemoryResultsRepository
from backend.stratsim.core.service import unit_of_work
from backend.stratsim.core.service.handlers import command_handlers
from backend.stratsim.core.service.handlers import event_handlers
from backend.stratsim.foundation.domain import commands as commands_common
from backend.stratsim.foundation.domain import events as events_common

EVENT_HANDLERS: dict[type[events_common.Event], list[Callable]] = {
    events.SimulationCompletedEvent: [event_handlers.simulation_completed_event],
    events.SweepCompletedEvent: [event_handlers.sweep_completed_event],
    events.DecayMeasuredEvent: [event_handlers.decay_measured_event],
    events.StrichartzMeasuredEvent: [event_handlers.strichartz_measured_event],
    events.SymmetryCheckedEvent: [event_handlers.symmetry_checked_event],
    events.SelftestFinishedEvent: [event_handlers.selftest_finished_event],
}

COMMAND_HANDLERS: dict[type[commands_common.Command], Callable] = {
    commands.SimulateCommand: command_handlers.simulate,
    commands.SweepCommand: command_handlers.sweep,
    commands.DecayCommand: command_handlers.decay,
    commands.StrichartzCommand: command_handlers.strichartz,
    commands.SymmetryCommand: command_handlers.symmetry,
    commands.SelftestCommand: command_handlers.selftest,
}


def bootstrap(
    uow: unit_of_work.AbstractResultsUnitOfWork | None = None,
    out_dir: Path | None = None,
) -> messagebus.MessageBus:
    """Build the message bus the CLI dispatches studies on.

    Args:
        uow (unit_of_work.AbstractResultsUnitOfWork | None): core unit of work.
            Defaults to a ResultsUnitOfWork on out_dir.
        out_dir (Path | None): output directory of the default unit of work.
            Defaults to None, which keeps the results in memory.

    Returns:
        messagebus.MessageBus: bus with every study handler registered
    """
    if uow is None:
        repository = FilesystemResultsRepository(out_dir) if out_dir is not None else InMemoryResultsRepository()
        uow = unit_of_work.ResultsUnitOfWork(repository)

    dependencies = {"uow": uow}

    injected_event_handlers = {
        event_type: [_inject_dependencies(handler, dependencies) for handler in event_handlers]
        for event_type, event_handlers in EVENT_HANDLERS.items()
    }

    injected_command_handlers = {
        command_type: _inject_dependencies(handler, dependencies) for command_type, handler in COMMAND_HANDLERS.items()
    }

    return messagebus.MessageBus(
        uow=uow,
        event_handlers=injected_event_handlers,
        command_handlers=injected_command_handlers,
    )


def _inject_dependencies(handler: Callable, dependencies: dict[str, Any]) -> Callable:
    """Bind the dependencies a handler asks for by parameter name.

    Args:
        handler (Callable): study command or event handler
        dependencies (dict[str, Any]): injectable objects keyed by parameter name

    Returns:
        Callable: one-argument handler carrying the original name for logging
    """
    params = inspect.signature(handler).parameters
    deps = {name: dependency for name, dependency in dependencies.items() if name in params}

    @functools.wraps(handler)
    def bound(message):  # noqa ANN202
        return handler(message, **deps)

    return bound
