"""Environment-driven runtime settings."""

import os
from collections.abc import Mapping

from pydantic import Field
from structqn_core.errors import ConfigError
from structqn_core.models.base import StrictModel

ENV_VARS = {
    "workers": "STRUCTQN_WORKERS",
    "log_level": "STRUCTQN_LOG_LEVEL",
    "run_integration_tests": "RUN_INTEGRATION_TESTS",
}


class Settings(StrictModel):
    """Process-wide settings read from the environment."""

    workers: int = Field(default=1, ge=1)
    log_level: str = "INFO"
    run_integration_tests: bool = False


def load_settings(environ: Mapping[str, str] | None = None) -> Settings:
    """
    Read settings from environment variables.

    Args:
        environ: Mapping to read from (defaults to os.environ)

    Returns:
        Validated settings

    Raises:
        ConfigError: If a variable holds an invalid value; the field path
            names the environment variable
    """
    env = os.environ if environ is None else environ
    values = {field: env[var] for field, var in ENV_VARS.items() if var in env}
    try:
        return Settings.from_mapping(values)
    except ConfigError as e:
        field = (e.field_path or "").split(".")[0]
        raise ConfigError(str(e).split(": ", 1)[-1], ENV_VARS.get(field, field)) from e
