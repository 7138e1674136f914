"""LIBSVM text format reader.

One sample per line: ``label index:value index:value ...`` with 1-based,
strictly increasing feature indices separated by whitespace. Blank lines are
skipped; comments are not part of the format and are rejected.

Labels must be ±1, or 0/1 in which case 0 is read as −1.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from loguru import logger
from numpy.typing import NDArray
from structqn_core.errors import EmptyDatasetError, ParseError


@dataclass(frozen=True)
class LibsvmData:
    """Feature rows dᵢ as a CSR matrix (samples × features) and labels yᵢ ∈ {−1, 1}."""

    features: sp.csr_matrix
    labels: NDArray[np.float64]

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def _parse_line(line: str, line_number: int) -> tuple[float, list[int], list[float]]:
    if "#" in line:
        raise ParseError("comments are not allowed", line_number)
    tokens = line.split()
    try:
        label = float(tokens[0])
    except ValueError as e:
        raise ParseError(f"invalid label {tokens[0]!r}", line_number) from e
    indices: list[int] = []
    values: list[float] = []
    for token in tokens[1:]:
        index_text, sep, value_text = token.partition(":")
        if not sep:
            raise ParseError(f"expected index:value, got {token!r}", line_number)
        try:
            index = int(index_text)
            value = float(value_text)
        except ValueError as e:
            raise ParseError(f"invalid feature {token!r}", line_number) from e
        if index < 1:
            raise ParseError(f"feature indices are 1-based, got {index}", line_number)
        if indices and index <= indices[-1]:
            raise ParseError(f"feature index {index} does not increase", line_number)
        indices.append(index)
        values.append(value)
    return label, indices, values


def parse_libsvm(text: str, n_features: int | None = None) -> LibsvmData:
    """
    Parse LIBSVM-formatted text.

    Args:
        text: File contents
        n_features: Column count; defaults to the largest index seen

    Raises:
        ParseError: On a malformed line, with its 1-based line number
        EmptyDatasetError: If no sample is present
    """
    labels: list[float] = []
    rows: list[int] = []
    cols: list[int] = []
    data: list[float] = []
    label_lines: list[int] = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        label, indices, values = _parse_line(line, line_number)
        row = len(labels)
        labels.append(label)
        label_lines.append(line_number)
        rows.extend([row] * len(indices))
        cols.extend(i - 1 for i in indices)
        data.extend(values)
    if not labels:
        raise EmptyDatasetError("no samples found")

    y = np.asarray(labels)
    distinct = set(np.unique(y).tolist())
    if distinct <= {0.0, 1.0}:
        y = np.where(y == 0.0, -1.0, 1.0)
    elif not distinct <= {-1.0, 1.0}:
        bad = next(i for i, v in enumerate(labels) if v not in (-1.0, 1.0))
        raise ParseError(f"labels must be ±1 or 0/1, got {labels[bad]:g}", label_lines[bad])

    width = max(cols, default=-1) + 1
    if n_features is not None:
        if n_features < width:
            raise ParseError(f"feature index {width} exceeds n_features = {n_features}")
        width = n_features
    features = sp.csr_matrix((data, (rows, cols)), shape=(len(labels), width))
    return LibsvmData(features, y)


def read_libsvm(path: str | Path, n_features: int | None = None) -> LibsvmData:
    """Read a LIBSVM file; see `parse_libsvm`."""
    dataset = parse_libsvm(Path(path).read_text(), n_features)
    logger.info(
        f"📊 Loaded {dataset.n_samples} samples × {dataset.n_features} features from {path}"
    )
    return dataset
