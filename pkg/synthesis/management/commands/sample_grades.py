"""
Management command sampling grades from a trained grade model.

Usage: python manage.py sample_grades --model runs/grades.pkln --count 100 --out grades.txt
"""

from pathlib import Path

from core.management.base import PicklingCommand
from harness.seeding import make_rng
from synthesis.grades import grade_model_from_bytes, sample_grades


class Command(PicklingCommand):
    """Write one sampled grade per line."""

    help = "Sample a batch-structured grade sequence"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--model", required=True, help="Grade model checkpoint")
        parser.add_argument("--count", type=int, required=True, help="Number of grades")
        parser.add_argument("--temperature", type=float, default=None)
        parser.add_argument("--out", required=True, help="Output text file")

    def handle(self, *args, **options):
        config = self.load_config(options)
        model = grade_model_from_bytes(Path(options["model"]).read_bytes())
        grades = sample_grades(
            model,
            options["count"],
            make_rng(config.seed, "sample_grades"),
            temperature=options["temperature"],
        )
        path = Path(options["out"])
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(grades) + "\n")
        self.success(f"Wrote {len(grades)} grades to {path}")
