"""
Management command precomputing a scenario set.

Usage:
    python manage.py precompute_scenarios --source generated --grades runs/grades.pkln \
        --cgan runs/cgan.pkln --count 800 --out runs/scenarios/generated.json
    python manage.py precompute_scenarios --source historical --dataset runs/dataset \
        --count 200 --out runs/scenarios/historical.json
"""

from pathlib import Path

from core.exceptions import ConfigurationError
from core.management.base import PicklingCommand
from harness.models import ScenarioSet
from harness.scenarios import GENERATED, SOURCES, precompute_scenarios
from line.scenario import write_scenarios
from line.state import LineConfig
from strips.dataset import read_dataset
from strips.speed_table import load_speed_table
from synthesis.cgan import cgan_from_bytes
from synthesis.grades import grade_model_from_bytes


class Command(PicklingCommand):
    """Write strip queues, initial conditions and disturbance seeds once for all agents."""

    help = "Precompute a scenario set from generated or historical strips"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--source", choices=SOURCES, required=True)
        parser.add_argument("--count", type=int, required=True, help="Number of scenarios")
        parser.add_argument("--grades", default=None, help="Grade model checkpoint (generated)")
        parser.add_argument("--cgan", default=None, help="CGAN checkpoint (generated)")
        parser.add_argument("--dataset", default=None, help="Dataset directory (historical)")
        parser.add_argument("--out", required=True, help="Scenario set JSON file")
        parser.add_argument("--name", default=None, help="Ledger name (default: file stem)")

    def handle(self, *args, **options):
        config = self.load_config(options)
        line_config = LineConfig.from_run_config(config)
        speed_table = load_speed_table(config["speed_table_path"])
        models = {}
        if options["source"] == GENERATED:
            if not options["grades"] or not options["cgan"]:
                raise ConfigurationError("--grades and --cgan are required for generated scenarios")
            models["grade_model"] = grade_model_from_bytes(Path(options["grades"]).read_bytes())
            models["cgan"] = cgan_from_bytes(Path(options["cgan"]).read_bytes())
        else:
            if not options["dataset"]:
                raise ConfigurationError("--dataset is required for historical scenarios")
            models["strips"] = read_dataset(options["dataset"]).strips

        scenarios = precompute_scenarios(
            options["count"],
            options["source"],
            line_config,
            speed_table,
            config.seed,
            strip_config={
                "density": config["steel_density"],
                "length_min": config["length_min"],
                "length_max": config["length_max"],
            },
            **models,
        )
        path = write_scenarios(options["out"], scenarios)
        record = ScenarioSet.record(
            path,
            config,
            name=options["name"] or path.stem,
            count=len(scenarios),
            episode_strips=line_config.episode_strips,
        )
        self.stdout.write(f"Scenario digest {record.digest}")
        self.success(f"Wrote {len(scenarios)} {options['source']} scenarios to {path}")
