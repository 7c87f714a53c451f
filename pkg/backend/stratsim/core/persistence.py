"""Result serialization.

Checkpoint layout (little-endian):

    8s   magic b"STRATSIM"
    u32  format version
    u32  model tag (1 vorticity, 2 dispersive, 3 sqg)
    u32  n
    f64  L
    f64  kappa
    f64  time
    then one complex128 n x n coefficient array per component, row-major.

Tables are CSV (header row first) and JSON arrays of objects with the same
keys. CSV floats carry 17 significant digits; JSON floats use the shortest
repr that reads back to the same double.
"""

import csv
import io
import json
import math
import struct

from collections.abc import Iterable
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from backend.stratsim.constants import CHECKPOINT_MAGIC
from backend.stratsim.constants import CHECKPOINT_VERSION
from backend.stratsim.constants import DEFAULT_DEALIAS_FRACTION
from backend.stratsim.constants import RECORD_COLUMNS
from backend.stratsim.core.experiments import SweepRecord
from backend.stratsim.core.numerics.model import ModelState
from backend.stratsim.core.numerics.model import SqgState
from backend.stratsim.core.numerics.model import VorticityState
from backend.stratsim.core.numerics.model import ZState
from backend.stratsim.core.numerics.spectral import GridSpec
from backend.stratsim.core.numerics.spectral import SpectralField
from backend.stratsim.core.numerics.spectral import make_grid
from backend.stratsim.foundation.exceptions import CheckpointFormatError
from backend.stratsim.foundation.exceptions import GridMismatchError
from backend.stratsim.foundation.exceptions import TruncatedCheckpointError
from backend.stratsim.foundation.utils import format_float

HEADER = struct.Struct("<8sIIIddd")
COEFF_DTYPE = np.dtype("<c16")

MODEL_TAGS: dict[type[ModelState], int] = {
    VorticityState: 1,
    ZState: 2,
    SqgState: 3,
}
STATE_TYPES = {tag: state_type for state_type, tag in MODEL_TAGS.items()}


def encode_checkpoint(state: ModelState) -> bytes:
    """Serialize a state.

    Args:
        state (ModelState): any formulation

    Returns:
        bytes: header followed by the coefficient arrays
    """
    grid = state.grid
    header = HEADER.pack(
        CHECKPOINT_MAGIC,
        CHECKPOINT_VERSION,
        MODEL_TAGS[type(state)],
        grid.n,
        grid.domain_length,
        state.kappa,
        state.time,
    )
    payload = b"".join(
        np.ascontiguousarray(state.component(name).coeffs, dtype=COEFF_DTYPE).tobytes(order="C")
        for name in state.COMPONENTS
    )
    return header + payload


def decode_checkpoint(data: bytes, grid: GridSpec | None = None) -> ModelState:
    """Deserialize a state.

    Args:
        data (bytes): checkpoint content
        grid (GridSpec | None): grid of the run the state is loaded into. Defaults to None.

    Raises:
        TruncatedCheckpointError: fewer bytes than header and payload
        CheckpointFormatError: wrong magic, version or model tag, or trailing bytes
        GridMismatchError: checkpoint does not match the given grid

    Returns:
        ModelState: state with bit-identical coefficients
    """
    if len(data) < HEADER.size:
        raise TruncatedCheckpointError(f"checkpoint has {len(data)} bytes, header needs {HEADER.size}")
    magic, version, tag, n, length, kappa, time = HEADER.unpack_from(data)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointFormatError(f"bad magic tag {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointFormatError(f"unsupported checkpoint version {version}")
    if tag not in STATE_TYPES:
        raise CheckpointFormatError(f"unknown model tag {tag}")
    state_type = STATE_TYPES[tag]
    components = state_type.COMPONENTS
    block = n * n * COEFF_DTYPE.itemsize
    expected = HEADER.size + len(components) * block
    if len(data) < expected:
        raise TruncatedCheckpointError(f"checkpoint has {len(data)} bytes, expected {expected}")
    if len(data) > expected:
        raise CheckpointFormatError(f"{len(data) - expected} trailing bytes after the payload")
    if grid is not None and (grid.n != n or grid.domain_length != length):
        raise GridMismatchError(f"checkpoint grid (n={n}, L={length}) differs from run grid (n={grid.n}, L={grid.domain_length})")
    if grid is None:
        grid = make_grid(n, length, DEFAULT_DEALIAS_FRACTION)
    fields = {}
    for index, name in enumerate(components):
        start = HEADER.size + index * block
        coeffs = np.frombuffer(data, dtype=COEFF_DTYPE, count=n * n, offset=start).reshape(n, n)
        fields[name] = SpectralField(grid, coeffs.astype(np.complex128))
    return state_type(**fields, kappa=kappa, time=time)


def save_checkpoint(state: ModelState, path: Path):
    """Write encode_checkpoint(state) to path."""
    Path(path).write_bytes(encode_checkpoint(state))


def load_checkpoint(path: Path, grid: GridSpec | None = None) -> ModelState:
    """Read a checkpoint written by save_checkpoint."""
    return decode_checkpoint(Path(path).read_bytes(), grid=grid)


def _cell(value: object) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float | np.floating):
        return format_float(float(value))
    return str(value)


def _json_value(value: object) -> object:
    if isinstance(value, bool | np.bool_):
        return bool(value)
    if isinstance(value, float | np.floating):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, int | np.integer):
        return int(value)
    if value is None:
        return None
    return str(value)


def render_csv(columns: Sequence[str], rows: Iterable[dict]) -> str:
    """CSV text with a header row.

    Args:
        columns (Sequence[str]): column order
        rows (Iterable[dict]): rows keyed by column

    Returns:
        str: CSV content with "\\n" line endings
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[column]) for column in columns])
    return buffer.getvalue()


def render_json(columns: Sequence[str], rows: Iterable[dict]) -> str:
    """JSON array of objects, keys in column order; non-finite floats become null."""
    objects = [{column: _json_value(row[column]) for column in columns} for row in rows]
    return json.dumps(objects, indent=2, allow_nan=False) + "\n"


def records_csv(records: Sequence[SweepRecord]) -> str:
    """Sweep records as CSV."""
    return render_csv(RECORD_COLUMNS, (record.as_row() for record in records))


def records_json(records: Sequence[SweepRecord]) -> str:
    """Sweep records as JSON."""
    return render_json(RECORD_COLUMNS, (record.as_row() for record in records))


def write_records(records: Sequence[SweepRecord], path: Path):
    """Write records as CSV at path and as JSON next to it.

    Args:
        records (Sequence[SweepRecord]): sweep output
        path (Path): CSV path; the JSON file gets the suffix .json
    """
    path = Path(path)
    path.write_text(records_csv(records))
    path.with_suffix(".json").write_text(records_json(records))


PLOT_TEMPLATE = '''"""Plot {title}."""

import csv

import matplotlib.pyplot as plt

with open("{csv_name}", newline="") as handle:
    rows = list(csv.DictReader(handle))

fig, ax = plt.subplots(figsize=(6, 4))
{series}
ax.set_xlabel("{x}")
ax.set_ylabel("{y_label}")
ax.set_xscale("{x_scale}")
ax.set_yscale("{y_scale}")
ax.set_title("{title}")
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig("{png_name}", dpi=150)
'''

SERIES_TEMPLATE = (
    'ax.plot([float(r["{x}"]) for r in rows], [float(r["{y}"]) for r in rows], marker="o", label="{y}")'
)


def render_plot_script(
    csv_name: str,
    x: str,
    ys: Sequence[str],
    title: str,
    log_x: bool = False,
    log_y: bool = False,
) -> str:
    """Standalone matplotlib script plotting columns of a CSV file.

    Args:
        csv_name (str): CSV file name, relative to the script
        x (str): abscissa column
        ys (Sequence[str]): ordinate columns
        title (str): figure title
        log_x (bool): logarithmic abscissa. Defaults to False.
        log_y (bool): logarithmic ordinate. Defaults to False.

    Returns:
        str: Python source of the script
    """
    return PLOT_TEMPLATE.format(
        title=title,
        csv_name=csv_name,
        series="\n".join(SERIES_TEMPLATE.format(x=x, y=y) for y in ys),
        x=x,
        y_label=", ".join(ys),
        x_scale="log" if log_x else "linear",
        y_scale="log" if log_y else "linear",
        png_name=Path(csv_name).with_suffix(".png").name,
    )
