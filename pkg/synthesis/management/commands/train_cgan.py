"""
Management command training the strip CGAN.

Usage: python manage.py train_cgan --dataset runs/dataset --out runs/cgan.pkln
"""

from pathlib import Path

from core.exceptions import ConfigurationError
from core.management.base import PicklingCommand
from harness.models import TrainingKind, TrainingRun
from harness.seeding import make_rng
from strips.dataset import read_dataset
from synthesis.cgan import CganConfig, build_windows, cgan_to_bytes, train_cgan


class Command(PicklingCommand):
    """Fit the conditional GAN on windows of consecutive strips."""

    help = "Train the conditional GAN over strip windows"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--dataset", required=True, help="Dataset directory")
        parser.add_argument("--out", required=True, help="Checkpoint file")

    def handle(self, *args, **options):
        config = self.load_config(options)
        dataset = read_dataset(options["dataset"])
        if dataset.stats is None:
            raise ConfigurationError("Dataset has no standardization stats (constant column)")
        cgan_config = CganConfig.from_run_config(config)
        windows, grade_ids = build_windows(
            dataset.strips, dataset.vocabulary, dataset.stats, cgan_config.window_length
        )
        model = train_cgan(
            windows,
            grade_ids,
            dataset.vocabulary,
            dataset.stats,
            cgan_config,
            make_rng(config.seed, "cgan"),
        )
        path = Path(options["out"])
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(cgan_to_bytes(model))
        TrainingRun.record(
            path,
            config,
            kind=TrainingKind.CGAN,
            epochs=cgan_config.epochs,
            final_loss=model.generator_losses[-1] if model.generator_losses else None,
            metrics={
                "discriminator_loss": (
                    model.discriminator_losses[-1] if model.discriminator_losses else None
                ),
                "collapse_epochs": model.collapse_epochs,
            },
        )
        if model.collapse_epochs:
            self.stderr.write(f"Mode collapse warnings at epochs {model.collapse_epochs}")
        self.success(f"CGAN written to {path}")
