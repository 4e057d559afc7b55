"""
Model tests for the run ledger: scenario sets, training runs and evaluation runs.
"""

import factory
import pytest
from django.db.models import ProtectedError

from core.models import file_digest
from harness.models import EvaluationRun, ScenarioSet, TrainingKind, TrainingRun


class ScenarioSetFactory(factory.django.DjangoModelFactory):
    class Meta:
        model = ScenarioSet

    path = factory.Sequence(lambda n: f"runs/scenarios/set{n}.json")
    digest = factory.Sequence(lambda n: f"{n:064x}")
    name = factory.Sequence(lambda n: f"set{n}")
    count = 100
    seed = 7


class TrainingRunFactory(factory.django.DjangoModelFactory):
    class Meta:
        model = TrainingRun

    path = "runs/p_coop.pklb"
    digest = "ab" * 32
    kind = TrainingKind.RL_BANK
    variant = "p_coop"
    epochs = 1000


class EvaluationRunFactory(factory.django.DjangoModelFactory):
    class Meta:
        model = EvaluationRun

    path = "runs/evaluation/report.json"
    agent = "p_coop"
    scenario_set = factory.SubFactory(ScenarioSetFactory)
    training_run = factory.SubFactory(TrainingRunFactory)
    episodes = 100
    deaths = 26


# ============================================================================
# Digest Tests
# ============================================================================


@pytest.mark.unit
class TestFileDigest:
    """Tests for artifact digests."""

    def test_sha256_of_file(self, tmp_path):
        path = tmp_path / "a.txt"
        path.write_bytes(b"abc")
        assert file_digest(path) == (
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        )

    def test_directory_digest_tracks_contents(self, tmp_path):
        (tmp_path / "one.csv").write_text("1\n")
        before = file_digest(tmp_path)
        (tmp_path / "two.csv").write_text("2\n")
        assert file_digest(tmp_path) != before


# ============================================================================
# Ledger Model Tests
# ============================================================================


@pytest.mark.django_db
class TestScenarioSet:
    """Tests for the ScenarioSet model."""

    def test_str(self):
        scenario_set = ScenarioSetFactory(name="historical", digest="f" * 64)
        assert str(scenario_set) == "historical (100 scenarios, ffffffffffff)"

    def test_record_stores_digest_seed_and_profile(self, tmp_path, run_config):
        path = tmp_path / "set.json"
        path.write_text("{}")
        record = ScenarioSet.record(path, run_config, name="toy", count=1)
        assert record.digest == file_digest(path)
        assert record.seed == 7
        assert record.profile == "desk"
        assert record.episode_strips == 20

    def test_protected_by_evaluations(self):
        evaluation = EvaluationRunFactory()
        with pytest.raises(ProtectedError):
            evaluation.scenario_set.delete()


@pytest.mark.django_db
class TestTrainingRun:
    """Tests for the TrainingRun model."""

    def test_str(self):
        run = TrainingRunFactory(seed=3)
        assert str(run) == "Q-network bank p_coop seed=3"

    def test_data_model_has_no_variant(self):
        run = TrainingRunFactory(kind=TrainingKind.CGAN, variant="")
        assert str(run).startswith("Conditional GAN")

    def test_metrics_default(self):
        assert TrainingRunFactory().metrics == {}


@pytest.mark.django_db
class TestEvaluationRun:
    """Tests for the EvaluationRun model."""

    def test_death_rate(self):
        assert EvaluationRunFactory().death_rate == pytest.approx(0.26)

    def test_death_rate_without_episodes(self):
        assert EvaluationRunFactory(episodes=0, deaths=0).death_rate == 0.0

    def test_training_run_deletion_keeps_evaluation(self):
        evaluation = EvaluationRunFactory()
        evaluation.training_run.delete()
        evaluation.refresh_from_db()
        assert evaluation.training_run is None

    def test_related_names(self):
        evaluation = EvaluationRunFactory()
        assert list(evaluation.scenario_set.evaluations.all()) == [evaluation]
        assert list(evaluation.training_run.evaluations.all()) == [evaluation]
