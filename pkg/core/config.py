"""
Run configuration loading.

Merges, in order: ``settings.PICKLING_LINE`` defaults, the selected profile,
an optional INI run config (decouple ``RepositoryIni`` format, ``[settings]``
section) and explicit command-line overrides. Each app builds its own typed
config dataclass from the resulting ``RunConfig``.
"""

import logging
from dataclasses import dataclass, field
from types import MappingProxyType

from decouple import Config, RepositoryIni
from django.conf import settings

from .exceptions import ConfigurationError
from .profiles import get_profile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """
    Frozen view over the merged configuration values of one run.
    """

    profile: str
    values: MappingProxyType = field(repr=False)

    @property
    def seed(self):
        return int(self.values["seed"])

    def __getitem__(self, key):
        try:
            return self.values[key]
        except KeyError:
            raise ConfigurationError(f"Unknown configuration key '{key}'")

    def with_overrides(self, **overrides):
        """Return a copy with some values replaced (keys must already exist)."""
        unknown = set(overrides) - set(self.values)
        if unknown:
            raise ConfigurationError(f"Unknown configuration keys: {sorted(unknown)}")
        merged = dict(self.values)
        merged.update(overrides)
        return RunConfig(profile=self.profile, values=MappingProxyType(merged))

    def as_dict(self):
        return dict(self.values)


def _cast_like(default):
    """Pick the decouple cast matching the type of a default value."""
    if isinstance(default, bool):
        return bool
    if isinstance(default, int):
        return int
    if isinstance(default, float):
        return float
    return str


def read_config_file(path, defaults):
    """
    Read an INI run config and cast every key like its default.

    Keys are case-insensitive and must name an existing setting.
    """
    try:
        repository = RepositoryIni(str(path))
    except OSError as exc:
        raise ConfigurationError(f"Cannot read config file {path}: {exc}")

    reader = Config(repository)
    section = RepositoryIni.SECTION
    if not repository.parser.has_section(section):
        raise ConfigurationError(f"Config file {path} has no [{section}] section")

    overrides = {}
    for option in repository.parser.options(section):
        key = option.lower()
        if key not in defaults:
            raise ConfigurationError(f"Unknown key '{option}' in config file {path}")
        try:
            overrides[key] = reader(option, cast=_cast_like(defaults[key]))
        except ValueError as exc:
            raise ConfigurationError(f"Bad value for '{option}' in {path}: {exc}")
    logger.debug("Read %d overrides from %s", len(overrides), path)
    return overrides


def load_run_config(profile=None, config_file=None, seed=None, **overrides):
    """
    Build the RunConfig for a run.

    Args:
        profile: "desk" or "full" (defaults to settings.PICKLING_PROFILE)
        config_file: optional path to an INI run config
        seed: optional master seed overriding every other source
        **overrides: explicit values (highest precedence after seed)

    Returns:
        RunConfig
    """
    profile = profile or settings.PICKLING_PROFILE
    values = dict(settings.PICKLING_LINE)
    values.update(get_profile(profile))
    if config_file:
        values.update(read_config_file(config_file, values))
    unknown = set(overrides) - set(values)
    if unknown:
        raise ConfigurationError(f"Unknown configuration keys: {sorted(unknown)}")
    values.update(overrides)
    if seed is not None:
        values["seed"] = int(seed)
    return RunConfig(profile=profile, values=MappingProxyType(values))
