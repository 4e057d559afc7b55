"""
Management command training an RL agent bank.

Usage:
    python manage.py train_rl --variant p-coop --generated runs/scenarios/generated.json \
        --historical runs/scenarios/historical.json --out runs/p_coop.pklb
"""

from pathlib import Path

from agents.bank import QNetworkBank
from agents.variants import get_variant
from core.management.base import PicklingCommand
from harness.episodes import EpisodeSetup
from harness.models import TrainingKind, TrainingRun
from harness.seeding import make_rng
from harness.training import TrainingSchedule, train
from line.scenario import read_scenarios
from strips.speed_table import load_speed_table


class Command(PicklingCommand):
    """Phase 1 on generated scenarios with exploration, phase 2 greedy on historical ones."""

    help = "Train a P-Coop or F-Coop Q-network bank"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--variant", required=True, help="p_coop / p-coop or f_coop / f-coop")
        parser.add_argument("--generated", default=None, help="Phase 1 scenario set")
        parser.add_argument("--historical", default=None, help="Phase 2 scenario set")
        parser.add_argument("--out", required=True, help="Bank checkpoint file")
        parser.add_argument("--curves", default=None, help="Training curves CSV")

    def handle(self, *args, **options):
        config = self.load_config(options)
        variant = get_variant(options["variant"], intra_period=config["rl_intra_period"])
        setup = EpisodeSetup.from_run_config(config, load_speed_table(config["speed_table_path"]))
        schedule = TrainingSchedule.from_run_config(config)
        generated = read_scenarios(options["generated"]) if options["generated"] else []
        historical = read_scenarios(options["historical"]) if options["historical"] else []

        bank = QNetworkBank.from_run_config(
            variant, config, make_rng(config.seed, f"rl.{variant.name}.init")
        )
        path = Path(options["out"])
        path.parent.mkdir(parents=True, exist_ok=True)
        bank, curves = train(
            setup, bank, schedule, generated, historical, config.seed, checkpoint_path=path
        )
        bank.save(path)
        curves_path = Path(options["curves"] or path.with_suffix(".curves.csv"))
        curves.write_csv(curves_path)

        window = curves.report_window(schedule.report_window)
        metrics = {"active_time": bank.active_times()}
        if window:
            metrics["report_window_deaths"] = sum(row["cause"] == "death" for row in window)
            metrics["report_window_mean_speed"] = sum(row["speed_mean"] for row in window) / len(
                window
            )
        final_loss = next(
            (row["mean_loss"] for row in reversed(curves.rows) if row["updates"]), None
        )
        TrainingRun.record(
            path,
            config,
            kind=TrainingKind.RL_BANK,
            variant=variant.name,
            epochs=schedule.total_episodes,
            final_loss=final_loss,
            metrics=metrics,
        )
        self.stdout.write(f"Training curves written to {curves_path}")
        self.success(f"{variant.name} bank written to {path}")
