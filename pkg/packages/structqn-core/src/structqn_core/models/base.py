"""Base model with shared validation behaviour using pydantic."""

from collections.abc import Mapping
from typing import Any, Self

from pydantic import BaseModel, ConfigDict, ValidationError

from structqn_core.errors import ConfigError


def config_error_from(error: ValidationError, prefix: str = "") -> ConfigError:
    """Convert the first pydantic validation error into a ConfigError with a dotted path."""
    first = error.errors()[0]
    parts = [prefix] if prefix else []
    parts.extend(str(part) for part in first["loc"])
    return ConfigError(first["msg"], field_path=".".join(parts) or None)


class StrictModel(BaseModel):
    """
    Base for configuration models.

    Unknown keys are rejected, instances are immutable, and every validation
    failure surfaces as a ConfigError naming the offending field.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    def __init__(self, **data: Any):
        try:
            super().__init__(**data)
        except ValidationError as e:
            raise config_error_from(e) from e

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], prefix: str = "") -> Self:
        """
        Validate a plain mapping (e.g. parsed TOML).

        Args:
            data: Raw configuration values
            prefix: Dotted path of this mapping inside a larger document

        Returns:
            Validated model instance

        Raises:
            ConfigError: If any field is missing or invalid
        """
        try:
            return cls.model_validate(dict(data))
        except ValidationError as e:
            raise config_error_from(e, prefix) from e
