"""Event Handlers.

receive events and report the outcome of a study as summary tables
"""

from prettytable import PrettyTable

from backend.stratsim.core.domain import events
from backend.stratsim.foundation.utils import format_float
from backend.stratsim.settings import get_logger

logger = get_logger()


def _format(value: object) -> str:
    if isinstance(value, float):
        return format_float(value, digits=6)
    return str(value)


def render_table(rows: list[dict], title: str | None = None) -> str:
    """Render rows as a text table, columns in the key order of the first row.

    Args:
        rows (list[dict]): flat rows
        title (str | None): table title. Defaults to None.

    Returns:
        str: table text, empty for no rows
    """
    if not rows:
        return ""
    table = PrettyTable()
    table.field_names = list(rows[0])
    for row in rows:
        table.add_row([_format(row.get(column, "")) for column in table.field_names])
    table.align = "r"
    if title:
        table.title = title
    return table.get_string()


def simulation_completed_event(
    event: events.SimulationCompletedEvent,
):
    """Simulation Completed Event.

    Args:
        event (events.SimulationCompletedEvent): event generated internally.
    """
    logger.info(f"{event.study} reached t={event.final_time:.6g}\n{render_table(event.rows, 'final norms')}")


def sweep_completed_event(
    event: events.SweepCompletedEvent,
):
    """Sweep Completed Event.

    Args:
        event (events.SweepCompletedEvent): event generated internally.
    """
    logger.info(f"{event.study} records\n{render_table(event.rows)}")
    logger.info(f"{event.study} summary\n{render_table([event.summary])}")
    if not event.summary.get("monotone_in_epsilon", True):
        logger.warning("lifespan proxy is not strictly decreasing in epsilon")


def decay_measured_event(
    event: events.DecayMeasuredEvent,
):
    """Decay Measured Event.

    Args:
        event (events.DecayMeasuredEvent): event generated internally.
    """
    logger.info(f"{event.study} fits\n{render_table(event.rows)}")


def strichartz_measured_event(
    event: events.StrichartzMeasuredEvent,
):
    """Strichartz Measured Event.

    Args:
        event (events.StrichartzMeasuredEvent): event generated internally.
    """
    logger.info(f"{event.study} ratios\n{render_table(event.rows)}")
    if event.summary:
        logger.info(f"{event.study} summary\n{render_table([event.summary])}")


def symmetry_checked_event(
    event: events.SymmetryCheckedEvent,
):
    """Symmetry Checked Event.

    Args:
        event (events.SymmetryCheckedEvent): event generated internally.
    """
    logger.info(f"{event.study} discrepancies\n{render_table(event.rows)}")


def selftest_finished_event(
    event: events.SelftestFinishedEvent,
):
    """Selftest Finished Event.

    Args:
        event (events.SelftestFinishedEvent): event generated internally.
    """
    table = render_table(event.rows)
    if event.passed:
        logger.info(f"selftest passed\n{table}")
    else:
        failed = [row["check"] for row in event.rows if not row["passed"]]
        logger.error(f"selftest failed: {', '.join(failed)}\n{table}")
