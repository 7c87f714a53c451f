"""Events.

Represent something that happened during a study and has to be handled
"""


class Event:
    """Event."""

    @property
    def name(self) -> str:
        """Short event name used in logs."""
        return type(self).__name__.removesuffix("Event")
