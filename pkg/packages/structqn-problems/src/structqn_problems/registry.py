"""Problem generators by name, and the ``generator:key=value,...`` spec syntax."""

import inspect
from collections.abc import Callable, Mapping
from typing import Any

from structqn_core.errors import ConfigError
from structqn_core.problem import StructuredProblem

from structqn_problems.logistic import make_logistic
from structqn_problems.poisson import make_poisson_control
from structqn_problems.quadratic import make_structured_quadratic
from structqn_problems.quartic import make_structured_quartic

GENERATORS: dict[str, Callable[..., StructuredProblem]] = {
    "structured_quadratic": make_structured_quadratic,
    "logistic": make_logistic,
    "poisson_control": make_poisson_control,
    "structured_quartic": make_structured_quartic,
}


def _scalar(text: str) -> int | float | str:
    for convert in (int, float):
        try:
            return convert(text)
        except ValueError:
            pass
    return text


def parse_problem_spec(spec: str) -> tuple[str, dict[str, Any]]:
    """
    Split ``generator:key=value,...`` into the generator name and its parameters.

    Values are read as int, then float, then kept as strings.

    Raises:
        ConfigError: If the spec is malformed
    """
    generator, _, rest = spec.partition(":")
    generator = generator.strip()
    if not generator:
        raise ConfigError(f"empty generator in {spec!r}", "problem")
    params: dict[str, Any] = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"expected key=value, got {item!r}", "problem")
        params[key.strip()] = _scalar(value.strip())
    return generator, params


def build_problem(
    generator: str, params: Mapping[str, Any], field_path: str = "problem"
) -> StructuredProblem:
    """
    Instantiate a problem from a generator name and keyword parameters.

    Raises:
        ConfigError: If the generator is unknown or the parameters do not fit it
    """
    try:
        factory = GENERATORS[generator]
    except KeyError:
        known = ", ".join(sorted(GENERATORS))
        raise ConfigError(
            f"unknown generator {generator!r} (known: {known})", f"{field_path}.generator"
        ) from None
    try:
        inspect.signature(factory).bind(**params)
    except TypeError as e:
        raise ConfigError(str(e), f"{field_path}.params") from e
    return factory(**params)


def problem_from_spec(spec: str) -> StructuredProblem:
    """Build a problem from ``generator:key=value,...``, e.g. ``structured_quartic:n=100,seed=0``."""
    generator, params = parse_problem_spec(spec)
    return build_problem(generator, params)
