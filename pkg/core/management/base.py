"""
Base class for the project's management commands.

Adds the global flags every CLI verb accepts (--config, --seed, --profile)
and turns domain errors into CommandError.
"""

import logging

from django.core.management.base import BaseCommand, CommandError

from core.config import load_run_config
from core.exceptions import PicklingLineError
from core.profiles import PROFILES

logger = logging.getLogger(__name__)


class PicklingCommand(BaseCommand):
    """Management command with run-config flags and domain error handling."""

    def add_arguments(self, parser):
        parser.add_argument(
            "--config",
            dest="config_file",
            default=None,
            help="INI run config with a [settings] section",
        )
        parser.add_argument(
            "--seed",
            type=int,
            default=None,
            help="Master seed (overrides config)",
        )
        parser.add_argument(
            "--profile",
            choices=sorted(PROFILES),
            default=None,
            help="Run profile (default: settings.PICKLING_PROFILE)",
        )

    def load_config(self, options):
        """Build the RunConfig from the global flags."""
        return load_run_config(
            profile=options.get("profile"),
            config_file=options.get("config_file"),
            seed=options.get("seed"),
        )

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except PicklingLineError as exc:
            logger.error("%s failed: %s", self.__class__.__module__, exc)
            raise CommandError(str(exc)) from exc

    def success(self, message):
        self.stdout.write(self.style.SUCCESS(message))
