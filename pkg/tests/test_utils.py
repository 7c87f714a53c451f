import math

import pytest

from backend.stratsim.foundation.utils import format_float
from backend.stratsim.foundation.utils import is_power_of_two
from backend.stratsim.foundation.utils import samples_per_decade


@pytest.mark.parametrize(("value", "expected"), [(1, True), (2, True), (256, True), (0, False), (-4, False), (12, False)])
def test_is_power_of_two(value, expected):
    assert is_power_of_two(value) == expected


def test_format_float_reads_back_exactly():
    for value in (0.1, 1.0 / 3.0, math.pi * 1e-300, -2.5e17):
        assert float(format_float(value)) == value
    assert format_float(math.inf) == "inf"
    assert format_float(-math.inf) == "-inf"
    assert format_float(math.nan) == "nan"
    assert format_float(0.5, digits=3) == "0.5"


def test_samples_per_decade():
    assert samples_per_decade(1.0, 100.0, 16) == pytest.approx(8.0)
    assert samples_per_decade(2.0, 2.0, 5) == math.inf
