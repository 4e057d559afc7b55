"""
Management command writing the bundled synthetic strip history.

Usage: python manage.py seed_history --out runs/history.csv [--strips 500] [--grades 5]
"""

from core.management.base import PicklingCommand
from harness.seeding import make_rng
from strips.dataset import write_strips_csv
from strips.history import generate_history


class Command(PicklingCommand):
    """Write a synthetic batch-structured strip history as CSV."""

    help = "Generate the synthetic strip history used by the desk profile"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--out", required=True, help="Output CSV file")
        parser.add_argument(
            "--strips",
            type=int,
            default=None,
            help="Number of strips (default: HISTORY_STRIPS setting)",
        )
        parser.add_argument(
            "--grades",
            type=int,
            default=None,
            help="Number of grades (default: HISTORY_GRADES setting)",
        )

    def handle(self, *args, **options):
        config = self.load_config(options)
        history = generate_history(
            make_rng(config.seed, "history"),
            strips=options["strips"] or config["history_strips"],
            grades=options["grades"] or config["history_grades"],
            density=config["steel_density"],
            length_min=config["length_min"],
            length_max=config["length_max"],
        )
        path = write_strips_csv(history, options["out"])
        self.success(f"Wrote {len(history)} strips to {path}")
