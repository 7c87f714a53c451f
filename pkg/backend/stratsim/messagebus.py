"""Message bus.

A study command runs its handler once; the events the study raises are
drained afterwards, in the order they were raised.
"""

import time

from collections import deque
from collections.abc import Callable
from typing import Union

from backend.stratsim.core.service import unit_of_work
from backend.stratsim.foundation.domain import commands
from backend.stratsim.foundation.domain import events
from backend.stratsim.foundation.exceptions import StratSimBaseError
from backend.stratsim.settings import get_logger

logger = get_logger()

Message = Union[commands.Command, events.Event]


class InvalidMessageTypeError(StratSimBaseError):
    """Raised when something other than a Command or an Event reaches the bus."""


class MessageBus:
    """Dispatches study commands and their events.

    A failing command propagates to the caller so the entrypoint can map it
    to an exit code. A failing event handler is logged and skipped: the
    artifacts of the study are already committed by then.
    """

    def __init__(
        self,
        uow: unit_of_work.AbstractResultsUnitOfWork,
        event_handlers: dict[type[events.Event], list[Callable]],
        command_handlers: dict[type[commands.Command], Callable],
    ):
        """Inits MessageBus.

        Args:
            uow (unit_of_work.AbstractResultsUnitOfWork): results unit of work
            event_handlers (dict[type[events.Event], list[Callable]]): study event subscribers
            command_handlers (dict[type[commands.Command], Callable]): one handler per study command
        """
        self.uow = uow
        self.event_handlers = event_handlers
        self.command_handlers = command_handlers
        self.pending: deque[Message] = deque()

    def handle(self, message: Message):
        """Run a command, or deliver an event, and everything it raises.

        Args:
            message (Message): study command or event

        Raises:
            InvalidMessageTypeError: message is neither a Command nor an Event
        """
        self.pending.append(message)
        while self.pending:
            current = self.pending.popleft()
            if isinstance(current, commands.Command):
                self._run_command(current)
            elif isinstance(current, events.Event):
                self._deliver_event(current)
            else:
                self.pending.clear()
                raise InvalidMessageTypeError(f"{current!r} is not an Event or Command")

    def _run_command(self, command: commands.Command):
        handler = self.command_handlers.get(type(command))
        if handler is None:
            raise InvalidMessageTypeError(f"no handler registered for command {command.name}")
        logger.debug(f"running study {command.name}")
        started = time.perf_counter()
        try:
            handler(command)
        except Exception:
            logger.exception(f"study {command.name} failed after {time.perf_counter() - started:.2f}s")
            self.pending.clear()
            raise
        logger.info(f"study {command.name} finished in {time.perf_counter() - started:.2f}s")
        self.pending.extend(self.uow.collect_new_events())

    def _deliver_event(self, event: events.Event):
        for subscriber in self.event_handlers.get(type(event), []):
            label = getattr(subscriber, "__name__", subscriber)
            logger.debug(f"delivering {event.name} to {label}")
            try:
                subscriber(event)
            except Exception:
                logger.exception(f"subscriber {label} failed on {event.name}")
                continue
            self.pending.extend(self.uow.collect_new_events())
