"""
Management command generating synthetic strips.

Grades come either from a text file (one per line) or from a grade model
checkpoint, which is then sampled for --count grades.

Usage:
    python manage.py gen_strips --grades grades.pkln --cgan cgan.pkln \
        --count 500 --out strips.csv
"""

from pathlib import Path

from core.exceptions import RejectedInputError
from core.management.base import PicklingCommand
from harness.seeding import make_rng
from nn.checkpoint import NETWORK_MAGIC
from strips.dataset import read_dataset, write_strips_csv
from synthesis.cgan import cgan_from_bytes, generate_strips
from synthesis.fidelity import evaluate_fidelity
from synthesis.grades import grade_model_from_bytes, sample_grades


class Command(PicklingCommand):
    """Turn a grade sequence into full strip records with the CGAN."""

    help = "Generate synthetic strips from grades and a trained CGAN"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--grades", required=True, help="Grade file or grade model checkpoint")
        parser.add_argument("--cgan", required=True, help="CGAN checkpoint")
        parser.add_argument("--count", type=int, default=None, help="Strips to generate")
        parser.add_argument("--out", required=True, help="Output strips CSV")
        parser.add_argument(
            "--compare",
            default=None,
            help="Dataset directory to compare against (writes a fidelity report)",
        )

    def read_grades(self, path, count, seed):
        data = Path(path).read_bytes()
        if data[:4] == NETWORK_MAGIC:
            if not count:
                raise RejectedInputError("--count is required when sampling from a grade model")
            return sample_grades(grade_model_from_bytes(data), count, make_rng(seed, "gen_grades"))
        grades = [line.strip() for line in data.decode().splitlines() if line.strip()]
        return grades[:count] if count else grades

    def handle(self, *args, **options):
        config = self.load_config(options)
        grades = self.read_grades(options["grades"], options["count"], config.seed)
        model = cgan_from_bytes(Path(options["cgan"]).read_bytes())
        result = generate_strips(
            model,
            grades,
            make_rng(config.seed, "gen_strips"),
            density=config["steel_density"],
            length_min=config["length_min"],
            length_max=config["length_max"],
        )
        path = write_strips_csv(result.strips, options["out"])
        self.stdout.write(f"Repairs: {result.repairs}")

        if options["compare"]:
            real = read_dataset(options["compare"]).strips
            report = evaluate_fidelity(real, result.strips)
            report_path = path.with_name(path.stem + "_fidelity.csv")
            report.write_csv(report_path)
            self.stdout.write(f"Fidelity report written to {report_path}")
        self.success(f"Wrote {len(result.strips)} strips to {path}")
