"""structqn common - Shared utilities: logging, settings and matrix dumps."""

__version__ = "0.1.0"

from structqn_common.log import configure_logging
from structqn_common.matrix_io import read_matrices, write_matrices
from structqn_common.settings import Settings, load_settings

__all__ = [
    "Settings",
    "configure_logging",
    "load_settings",
    "read_matrices",
    "write_matrices",
]
