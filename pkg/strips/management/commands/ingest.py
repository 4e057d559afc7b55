"""
Management command ingesting a historical strip file into a dataset directory.

Usage: python manage.py ingest --input history.csv [--schema schema.ini] --out runs/dataset
"""

from core.management.base import PicklingCommand
from strips.dataset import Dataset, write_dataset
from strips.ingest import StripSchema, ingest_history
from strips.speed_table import load_speed_table, validate_speed_table


class Command(PicklingCommand):
    """Validate a strip history and write strips, vocabulary and stats."""

    help = "Ingest a delimited strip history into a dataset directory"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--input", required=True, help="Delimited history file")
        parser.add_argument("--schema", default=None, help="INI column mapping")
        parser.add_argument("--out", required=True, help="Dataset directory")

    def handle(self, *args, **options):
        config = self.load_config(options)
        schema = StripSchema.from_ini(options["schema"]) if options["schema"] else None
        result = ingest_history(
            options["input"],
            schema=schema,
            density=config["steel_density"],
            length_min=config["length_min"],
            length_max=config["length_max"],
        )
        # every strip must be simulable
        validate_speed_table(load_speed_table(config["speed_table_path"]), result.strips)

        for diagnostic in result.diagnostics:
            self.stderr.write(str(diagnostic))
        write_dataset(
            options["out"],
            Dataset(strips=result.strips, vocabulary=result.vocabulary, stats=result.stats),
        )
        self.success(
            f"Ingested {len(result.strips)} strips over {len(result.vocabulary)} grades "
            f"into {options['out']} ({len(result.diagnostics)} problems reported)"
        )
