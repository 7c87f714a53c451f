"""Commands.

Represent jobs the simulator should perform, one per CLI subcommand.
"""


class Command:
    """Command."""

    @property
    def name(self) -> str:
        """Short command name used in logs, e.g. ``simulate``."""
        return type(self).__name__.removesuffix("Command").lower()
