"""Plain-text matrix dump format.

A file is a sequence of blocks. Each block starts with a header line
``%% <name> <rows> <cols>`` followed by `rows` lines of `cols`
whitespace-separated values written with ``repr`` so they read back exactly.
One-dimensional arrays are stored as a single column.
"""

from collections.abc import Mapping
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray
from structqn_core.errors import ParseError

HEADER = "%%"


def write_matrices(path: str | Path, matrices: Mapping[str, ArrayLike]) -> None:
    """Write named matrices to `path` in the dump format."""
    lines: list[str] = []
    for name, value in matrices.items():
        if not name or any(ch.isspace() for ch in name):
            raise ValueError(f"matrix name must be a non-empty token, got {name!r}")
        array = np.asarray(value, dtype=np.float64)
        if array.ndim == 1:
            array = array[:, None]
        if array.ndim != 2:
            raise ValueError(f"{name}: expected a 1-D or 2-D array, got {array.ndim}-D")
        rows, cols = array.shape
        lines.append(f"{HEADER} {name} {rows} {cols}")
        lines.extend(" ".join(repr(float(v)) for v in row) for row in array)
    Path(path).write_text("\n".join(lines) + "\n" if lines else "")


def read_matrices(path: str | Path) -> dict[str, NDArray[np.float64]]:
    """Read every block from a dump file, keyed by name."""
    lines = Path(path).read_text().splitlines()
    result: dict[str, NDArray[np.float64]] = {}
    i = 0
    while i < len(lines):
        parts = lines[i].split()
        if len(parts) != 4 or parts[0] != HEADER:
            raise ParseError(f"expected '{HEADER} <name> <rows> <cols>'", line_number=i + 1)
        name = parts[1]
        try:
            rows, cols = int(parts[2]), int(parts[3])
        except ValueError as e:
            raise ParseError("matrix shape must be two integers", line_number=i + 1) from e
        block = np.zeros((rows, cols))
        for r in range(rows):
            line_number = i + 2 + r
            if line_number > len(lines):
                raise ParseError(f"{name}: truncated block", line_number=line_number)
            fields = lines[line_number - 1].split()
            if len(fields) != cols:
                raise ParseError(
                    f"{name}: expected {cols} values, got {len(fields)}", line_number=line_number
                )
            try:
                block[r] = [float(v) for v in fields]
            except ValueError as e:
                raise ParseError(f"{name}: non-numeric value", line_number=line_number) from e
        result[name] = block
        i += 1 + rows
    return result
