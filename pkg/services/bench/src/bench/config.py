"""Benchmark suite configuration read from TOML.

Example::

    metrics = ["iterations", "time"]

    [suite]
    name = "quadratics"
    output = "results/quadratics"

    [[problems]]
    name = "quad-100"
    generator = "structured_quadratic"
    params = { n = 100, phi = 1.0 }
    seeds = [0, 1, 2, 3, 4]

    [[solvers]]
    name = "minus-init1"
    variant = "minus"
    memory = 8
    epsilon = 5e-6
    init_strategy = "init1"
"""

import copy
import inspect
import tomllib
from pathlib import Path
from typing import Any

from pydantic import Field, field_validator
from structqn_core.errors import ConfigError
from structqn_core.models.base import StrictModel
from structqn_core.models.config import SolverConfig
from structqn_problems.registry import GENERATORS

from bench.profiles import Metric

# Problem parameters that name files; resolved against the config file's directory.
PATH_PARAMS = ("path",)


class SuiteSettings(StrictModel):
    name: str = "suite"
    output: str = "results"


class ProblemEntry(StrictModel):
    """
    One problem family in the suite.

    `seeds` only applies to generators that take a seed; every seed becomes
    its own run and the summary averages over them.
    """

    name: str | None = None
    generator: str
    params: dict[str, Any] = Field(default_factory=dict)
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)

    @field_validator("generator")
    @classmethod
    def known_generator(cls, value: str) -> str:
        if value not in GENERATORS:
            raise ValueError(f"unknown generator {value!r}")
        return value

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        params = "-".join(f"{k}{v}" for k, v in sorted(self.params.items()) if k not in PATH_PARAMS)
        return f"{self.generator}-{params}" if params else self.generator

    @property
    def seeded(self) -> bool:
        return "seed" in inspect.signature(GENERATORS[self.generator]).parameters

    def run_seeds(self) -> list[int | None]:
        return list(self.seeds) if self.seeded else [None]


class SolverEntry(StrictModel):
    name: str
    config: SolverConfig


class SuiteConfig(StrictModel):
    suite: SuiteSettings = Field(default_factory=SuiteSettings)
    problems: list[ProblemEntry] = Field(min_length=1)
    solvers: list[SolverEntry] = Field(min_length=1)
    metrics: list[Metric] = Field(default_factory=lambda: [Metric.ITERATIONS])

    @field_validator("solvers")
    @classmethod
    def unique_solver_names(cls, value: list[SolverEntry]) -> list[SolverEntry]:
        names = [entry.name for entry in value]
        if len(set(names)) != len(names):
            raise ValueError("solver names must be unique")
        return value


def _solver_entries(raw: Any) -> list[SolverEntry]:
    if not isinstance(raw, list):
        raise ConfigError("expected an array of tables", "solvers")
    entries = []
    for i, table in enumerate(raw):
        if not isinstance(table, dict):
            raise ConfigError("expected a table", f"solvers.{i}")
        settings = dict(table)
        name = settings.pop("name", None)
        if not isinstance(name, str) or not name:
            raise ConfigError("every solver needs a name", f"solvers.{i}.name")
        if "wolfe" in settings and not isinstance(settings["wolfe"], dict):
            raise ConfigError("expected a table", f"solvers.{i}.wolfe")
        entries.append(
            SolverEntry(name=name, config=SolverConfig.from_mapping(settings, f"solvers.{i}"))
        )
    return entries


def _resolve_paths(problems: list[dict[str, Any]], base: Path) -> None:
    for i, problem in enumerate(problems):
        params = problem.get("params")
        if not isinstance(params, dict):
            continue
        for key in PATH_PARAMS:
            if key not in params:
                continue
            path = Path(params[key])
            if not path.is_absolute():
                path = base / path
            if not path.is_file():
                raise ConfigError(f"data file not found: {path}", f"problems.{i}.params.{key}")
            params[key] = str(path)


def _check_params(problems: list[ProblemEntry]) -> None:
    for i, entry in enumerate(problems):
        if entry.seeded and "seed" in entry.params:
            raise ConfigError("set seeds instead of params.seed", f"problems.{i}.params.seed")
        params = {**entry.params, "seed": 0} if entry.seeded else dict(entry.params)
        try:
            inspect.signature(GENERATORS[entry.generator]).bind(**params)
        except TypeError as e:
            raise ConfigError(str(e), f"problems.{i}.params") from e


def parse_suite(data: dict[str, Any], base: Path | None = None) -> SuiteConfig:
    """
    Validate a parsed suite document.

    Args:
        data: Parsed TOML
        base: Directory that relative data paths are resolved against

    Raises:
        ConfigError: With the dotted path of the first invalid field
    """
    document = copy.deepcopy(dict(data))
    solvers = _solver_entries(document.pop("solvers", None))
    problems = document.get("problems")
    if isinstance(problems, list):
        _resolve_paths([p for p in problems if isinstance(p, dict)], base or Path.cwd())
    suite = SuiteConfig.from_mapping({**document, "solvers": solvers})
    _check_params(suite.problems)
    return suite


def load_suite(path: str | Path) -> SuiteConfig:
    """
    Read and validate a suite TOML file.

    Raises:
        ConfigError: If the file is missing, not valid TOML, or fails validation
    """
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text())
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    return parse_suite(data, path.parent)
