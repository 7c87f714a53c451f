"""Utility functions."""

import math

from backend.stratsim.constants import FLOAT_SIGNIFICANT_DIGITS


def is_power_of_two(value: int) -> bool:
    """Checks if provided integer is a positive power of two.

    Args:
        value (int): integer to check

    Returns:
        bool: power of two or not
    """
    return value > 0 and (value & (value - 1)) == 0


def format_float(value: float, digits: int = FLOAT_SIGNIFICANT_DIGITS) -> str:
    """Format a float; the default precision reads back bit-identical.

    Args:
        value (float): value to serialize
        digits (int): significant digits. Defaults to 17.

    Returns:
        str: general format with the requested significant digits
    """
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return f"{value:.{digits}g}"


def samples_per_decade(t_min: float, t_max: float, count: int) -> float:
    """Density of a sampling in log time.

    Args:
        t_min (float): first sample time (> 0)
        t_max (float): last sample time
        count (int): number of samples

    Returns:
        float: samples per decade, infinite for a degenerate window
    """
    decades = math.log10(t_max / t_min)
    if decades <= 0:
        return math.inf
    return count / decades
