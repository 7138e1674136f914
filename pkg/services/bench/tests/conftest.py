"""Shared fixtures: suite files written into a temporary directory."""

from collections.abc import Callable
from pathlib import Path
from textwrap import dedent

import pytest

TWO_SOLVERS = """
[[solvers]]
name = "minus"
variant = "minus"
memory = 5

[[solvers]]
name = "lbfgs"
variant = "lbfgs"
memory = 5
"""


@pytest.fixture
def suite_file(tmp_path: Path) -> Callable[[str], Path]:
    """Write TOML text to suite.toml next to the test's scratch files."""

    def write(text: str) -> Path:
        path = tmp_path / "suite.toml"
        path.write_text(dedent(text))
        return path

    return write


@pytest.fixture
def two_solvers() -> str:
    """Solver tables for a Minus run and its L-BFGS baseline."""
    return TWO_SOLVERS


@pytest.fixture
def quadratic_suite(suite_file) -> Path:
    """Two solvers on one structured quadratic family with five seeds."""
    return suite_file(
        dedent(
            """
        metrics = ["iterations", "f_evals"]

        [suite]
        name = "quadratics"

        [[problems]]
        generator = "structured_quadratic"
        params = { n = 20, r = 2 }
        seeds = [0, 1, 2, 3, 4]
        """
        )
        + TWO_SOLVERS
    )
