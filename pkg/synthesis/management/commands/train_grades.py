"""
Management command training the grade sequence model.

Usage: python manage.py train_grades --dataset runs/dataset --out runs/grades.pkln
"""

from pathlib import Path

from core.management.base import PicklingCommand
from harness.models import TrainingKind, TrainingRun
from harness.seeding import make_rng
from strips.dataset import read_dataset
from synthesis.grades import (
    GradeModelConfig,
    build_training_sequences,
    grade_model_to_bytes,
    train_grade_model,
)


class Command(PicklingCommand):
    """Fit the LSTM grade model on a dataset's strip order."""

    help = "Train the grade sequence model on an ingested dataset"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--dataset", required=True, help="Dataset directory")
        parser.add_argument("--out", required=True, help="Checkpoint file")

    def handle(self, *args, **options):
        config = self.load_config(options)
        dataset = read_dataset(options["dataset"])
        model_config = GradeModelConfig.from_run_config(config)
        sequences = build_training_sequences(
            dataset.strips, dataset.vocabulary, model_config.sequence_length
        )
        self.stdout.write(
            f"Training on {len(sequences)} windows, vocabulary {dataset.vocabulary.size} tokens"
        )
        model = train_grade_model(
            sequences, dataset.vocabulary, model_config, make_rng(config.seed, "grade_model")
        )

        path = Path(options["out"])
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(grade_model_to_bytes(model))
        final_loss = model.loss_history[-1] if model.loss_history else None
        TrainingRun.record(
            path,
            config,
            kind=TrainingKind.GRADE_MODEL,
            epochs=model_config.epochs,
            final_loss=final_loss,
            metrics={"perplexity": model.perplexity(sequences)},
        )
        self.success(f"Grade model written to {path} (final loss {final_loss})")
