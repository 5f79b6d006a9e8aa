"""Configuration management for the plasticity lab.

Two layers live here:

* :class:`Settings` holds process-level options read from the environment
  or a ``.env`` file (output root, log level, worker count).
* The flat text experiment format: ``dotted.key = value`` lines that are
  parsed into nested dictionaries and validated by the pydantic models each
  module owns (see ``plasticity_lab.harness.config.ExperimentConfig``).
"""

from __future__ import annotations

import copy
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Type, TypeVar

from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from plasticity_lab.utils.errors import ConfigurationError

ModelT = TypeVar("ModelT", bound=BaseModel)


class Settings(BaseSettings):
    """Project settings loaded from environment or a `.env` file."""

    model_config = SettingsConfigDict(
        env_prefix="PLASTICITY_LAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    output_root: str = Field(
        default="./runs",
        description="Root directory for experiment outputs when a config does not set one.",
    )
    log_level: str = Field(
        default="INFO",
        description="Logging level passed to logging.basicConfig by the CLI.",
    )
    default_workers: int = Field(
        default=1,
        ge=1,
        description="Number of worker processes used to run (arm, seed) jobs.",
    )
    default_dtype: str = Field(
        default="float32",
        description="Floating point precision for training runs (float32 or float64).",
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return a cached settings instance."""

    return Settings()


def reset_settings_cache() -> Settings:
    """Clear and refresh the cached settings instance."""

    get_settings.cache_clear()
    refreshed = get_settings()
    globals()["settings"] = refreshed
    return refreshed


settings = get_settings()


def split_list(value: Any) -> Any:
    """Split a comma separated string into a list; pass other values through.

    Used as a ``mode="before"`` validator by list fields so that flat config
    values such as ``seeds = 0,1,2`` validate.
    """

    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


def parse_flat_text(text: str, *, source: str = "<config>") -> Dict[str, str]:
    """Parse ``key = value`` lines into an ordered mapping of raw strings."""

    entries: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"{source}:{lineno}: empty key")
        if key in entries:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key '{key}'")
        entries[key] = value
    return entries


def set_dotted(tree: Dict[str, Any], key: str, value: Any) -> None:
    """Assign ``value`` at a dotted path, creating intermediate dicts."""

    parts = key.split(".")
    node = tree
    for part in parts[:-1]:
        child = node.get(part)
        if child is None:
            child = {}
            node[part] = child
        elif not isinstance(child, dict):
            raise ConfigurationError(f"'{key}' descends into non-section '{part}'")
        node = child
    node[parts[-1]] = value


def unflatten(entries: Mapping[str, Any]) -> Dict[str, Any]:
    """Turn ``{"a.b": 1}`` into ``{"a": {"b": 1}}``."""

    tree: Dict[str, Any] = {}
    for key, value in entries.items():
        set_dotted(tree, key, value)
    return tree


def known_keys(model: Type[BaseModel], prefix: str = "") -> Iterable[str]:
    """Yield every dotted leaf key a model tree accepts."""

    for name, field in model.model_fields.items():
        annotation = field.annotation
        if isinstance(annotation, type) and issubclass(annotation, BaseModel):
            yield from known_keys(annotation, f"{prefix}{name}.")
        else:
            yield f"{prefix}{name}"


def check_known(model: Type[BaseModel], keys: Iterable[str]) -> None:
    """Raise ConfigurationError listing every key the model does not define."""

    allowed = set(known_keys(model))
    unknown = sorted(k for k in keys if k not in allowed)
    if unknown:
        raise ConfigurationError(f"Unknown config keys: {', '.join(unknown)}")


def load_model(model: Type[ModelT], path: str | Path) -> ModelT:
    """Read a flat text config file and validate it into ``model``."""

    target = Path(path)
    if not target.exists():
        raise FileNotFoundError(f"Config file not found: {target}")
    entries = parse_flat_text(target.read_text(encoding="utf-8"), source=str(target))
    check_known(model, entries)
    return model.model_validate(unflatten(entries))


def flatten_model(config: BaseModel) -> Dict[str, str]:
    """Flatten a model into dotted keys with text values; ``None`` is omitted."""

    flat: Dict[str, str] = {}

    def _format(value: Any) -> str:
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return repr(value)
        if isinstance(value, (list, tuple)):
            return ", ".join(_format(item) for item in value)
        if isinstance(value, BaseModel) and hasattr(value, "to_text"):
            return value.to_text()
        return str(value)

    def _walk(node: BaseModel, prefix: str) -> None:
        for name in type(node).model_fields:
            value = getattr(node, name)
            key = f"{prefix}{name}"
            if isinstance(value, BaseModel) and not hasattr(value, "to_text"):
                _walk(value, key + ".")
            elif value is None:
                continue
            else:
                flat[key] = _format(value)

    _walk(config, "")
    return flat


def dump_model(config: BaseModel) -> str:
    """Render a model as flat config text that :func:`load_model` reads back."""

    lines = [f"{key} = {value}" for key, value in flatten_model(config).items()]
    return "\n".join(lines) + "\n"


def apply_overrides(config: ModelT, overrides: Mapping[str, Any]) -> ModelT:
    """Return a re-validated copy of ``config`` with dotted-key overrides applied."""

    if not overrides:
        return config
    check_known(type(config), overrides)
    tree = copy.deepcopy(config.model_dump(mode="python"))
    for key, value in overrides.items():
        set_dotted(tree, key, value)
    return type(config).model_validate(tree)


def parse_assignments(pairs: Iterable[str]) -> Dict[str, str]:
    """Parse CLI ``key=value`` strings."""

    overrides: Dict[str, str] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigurationError(f"Override must look like key=value, got {pair!r}")
        key, value = (part.strip() for part in pair.split("=", 1))
        overrides[key] = value
    return overrides
