"""
Tests for the grade sequence model, the conditional GAN and the fidelity report.
"""

import logging
from itertools import groupby

import numpy as np
import pytest

from core.exceptions import CheckpointError, RejectedInputError, TrainingError
from strips.domain import (
    END_TOKEN,
    NUMERIC_COLUMNS,
    GradeVocabulary,
    StandardizationStats,
    strips_to_matrix,
    validate_strip,
)
from strips.history import generate_history
from synthesis.cgan import (
    CganConfig,
    CganModel,
    build_windows,
    cgan_from_bytes,
    cgan_to_bytes,
    discriminator_accuracy,
    discriminator_targets,
    generate_strips,
    generator_forward,
    train_cgan,
)
from synthesis.fidelity import evaluate_fidelity, grade_total_variation, ks_statistic
from synthesis.grades import (
    GradeModel,
    GradeModelConfig,
    TrainingSequences,
    build_token_stream,
    build_training_sequences,
    grade_model_from_bytes,
    grade_model_to_bytes,
    sample_grades,
    train_grade_model,
    windows_from_stream,
)

SMALL_GRADES = GradeModelConfig(
    hidden_units=8, dropout_rate=0.0, sequence_length=4, batch_size=32, epochs=30,
    learning_rate=0.05,
)
SMALL_CGAN = CganConfig(noise_length=4, window_length=3, epochs=2, batch_size=16)


def sequences_from(stream, vocabulary, sequence_length=4):
    windows, targets = windows_from_stream(stream, sequence_length, vocabulary.end_id)
    return TrainingSequences(windows, targets, vocabulary.size, list(stream))


@pytest.fixture
def vocabulary(history):
    return GradeVocabulary.from_sequence(strip.grade for strip in history)


@pytest.fixture
def stats(history):
    return StandardizationStats.fit(strips_to_matrix(history))


# ============================================================================
# Token Stream Tests
# ============================================================================


@pytest.mark.unit
class TestTokenStream:
    """Tests for batch-delimited grade streams."""

    def test_batches_end_with_end(self, make_strip):
        """A run of one batch then another grade."""
        strips = [make_strip("A"), make_strip("A"), make_strip("B")]
        vocabulary = GradeVocabulary(["A", "B"])
        tokens = [vocabulary.token_of(i) for i in build_token_stream(strips, vocabulary)]
        assert tokens == ["A", "A", END_TOKEN, "B", END_TOKEN]

    def test_width_change_splits_batch(self, make_strip):
        """Same grade with a different width starts a new batch."""
        strips = [make_strip("A", width=1250), make_strip("A", width=1100), make_strip("B")]
        vocabulary = GradeVocabulary(["A", "B"])
        tokens = [vocabulary.token_of(i) for i in build_token_stream(strips, vocabulary)]
        assert tokens == ["A", END_TOKEN, "A", END_TOKEN, "B", END_TOKEN]

    def test_single_strip(self, make_strip):
        """One strip gives its grade and END."""
        vocabulary = GradeVocabulary(["A"])
        assert build_token_stream([make_strip("A")], vocabulary) == [0, vocabulary.end_id]

    def test_sliding_windows_oracle(self, history, vocabulary):
        """Windows and targets follow the stream one token at a time."""
        sequences = build_training_sequences(history[:50], vocabulary, sequence_length=5)
        stream = sequences.stream
        assert len(sequences) == len(stream) - 5
        for i in range(len(sequences)):
            assert list(sequences.windows[i]) == stream[i : i + 5]
            assert sequences.targets[i] == stream[i + 5]

    def test_short_stream_is_padded(self):
        """Streams shorter than a window are padded with END."""
        windows, targets = windows_from_stream([0, 1], 4, end_id=2)
        assert windows.tolist() == [[2, 2, 2, 0]]
        assert targets.tolist() == [1]


# ============================================================================
# Grade Model Tests
# ============================================================================


@pytest.mark.unit
class TestGradeModel:
    """Tests for training and sampling the grade model."""

    def test_degenerate_corpus(self, rng):
        """A single repeated token is predicted with p > 0.99."""
        vocabulary = GradeVocabulary(["A"])
        sequences = sequences_from([0] * 120, vocabulary)
        model = train_grade_model(sequences, vocabulary, SMALL_GRADES, rng)
        assert model.loss_history[-1] < 0.05
        assert model.next_token_probabilities([[0, 0, 0, 0]])[0, 0] > 0.99

    @pytest.mark.slow
    def test_alternating_corpus(self, rng):
        """Two alternating tokens: the successor gets > 0.9."""
        vocabulary = GradeVocabulary(["A", "B"])
        sequences = sequences_from([0, 1] * 100, vocabulary)
        config = GradeModelConfig(
            hidden_units=8, dropout_rate=0.0, sequence_length=4, batch_size=32, epochs=60,
            learning_rate=0.05,
        )
        model = train_grade_model(sequences, vocabulary, config, rng)
        probabilities = model.next_token_probabilities([[0, 1, 0, 1], [1, 0, 1, 0]])
        assert probabilities[0, 0] > 0.9
        assert probabilities[1, 1] > 0.9

    @pytest.mark.slow
    def test_desk_corpus_perplexity(self, history, vocabulary, rng):
        """Held-out perplexity beats the uniform model."""
        sequences = build_training_sequences(history, vocabulary, sequence_length=8)
        split = int(0.8 * len(sequences))
        train = sequences.subset(np.arange(split))
        held_out = sequences.subset(np.arange(split, len(sequences)))
        config = GradeModelConfig(
            hidden_units=16, dropout_rate=0.0, sequence_length=8, batch_size=64, epochs=15,
            learning_rate=0.01,
        )
        model = train_grade_model(train, vocabulary, config, rng)
        assert model.perplexity(held_out) < vocabulary.size

    def test_no_windows(self, rng):
        """Training needs at least one window."""
        vocabulary = GradeVocabulary(["A"])
        empty = TrainingSequences(np.zeros((0, 4), int), np.zeros(0, int), 2)
        with pytest.raises(RejectedInputError):
            train_grade_model(empty, vocabulary, SMALL_GRADES, rng)

    def test_zero_epochs_is_untrained(self, rng):
        """An empty loss history never counts as beating the baseline."""
        vocabulary = GradeVocabulary(["A", "B"])
        sequences = sequences_from([0, 1] * 20, vocabulary)
        config = GradeModelConfig(
            hidden_units=4, dropout_rate=0.0, sequence_length=4, batch_size=8, epochs=0
        )
        with pytest.raises(TrainingError, match="uniform baseline") as excinfo:
            train_grade_model(sequences, vocabulary, config, rng)
        assert excinfo.value.diagnostics["final_loss"] is None
        assert excinfo.value.diagnostics["epochs"] == 0

    def test_stalled_training_is_rejected(self, rng):
        """One context followed evenly by every token: no model gets below ln(V)."""
        vocabulary = GradeVocabulary(["A", "B"])
        windows = np.zeros((9, 4), dtype=np.int64)
        targets = np.array([0, 1, 2] * 3)
        sequences = TrainingSequences(windows, targets, vocabulary.size, [0] * 4)
        config = GradeModelConfig(
            hidden_units=4, dropout_rate=0.0, sequence_length=4, batch_size=9, epochs=3,
            learning_rate=1e-9,
        )
        with pytest.raises(TrainingError) as excinfo:
            train_grade_model(sequences, vocabulary, config, rng)
        assert excinfo.value.diagnostics["final_loss"] >= excinfo.value.diagnostics["baseline"]
        assert excinfo.value.diagnostics["epochs"] == 3

    def test_sampling_is_seeded(self, vocabulary):
        """The same seed gives the same grades, all inside the vocabulary."""
        model = GradeModel(vocabulary, SMALL_GRADES, np.random.default_rng(1))
        a = sample_grades(model, 40, np.random.default_rng(9))
        b = sample_grades(model, 40, np.random.default_rng(9))
        assert a == b
        assert len(a) == 40
        assert all(grade in vocabulary for grade in a)

    def test_zero_temperature_is_greedy(self, vocabulary):
        """At temperature 0 the rng no longer matters."""
        model = GradeModel(vocabulary, SMALL_GRADES, np.random.default_rng(1))
        a = sample_grades(model, 20, np.random.default_rng(1), temperature=0.0)
        b = sample_grades(model, 20, np.random.default_rng(2), temperature=0.0)
        assert a == b

    def test_checkpoint_bytes(self, vocabulary, rng):
        """A loaded model re-serializes to the same bytes."""
        model = GradeModel(vocabulary, SMALL_GRADES, rng)
        model.loss_history = [1.5, 1.25]
        data = grade_model_to_bytes(model)
        loaded = grade_model_from_bytes(data)
        assert grade_model_to_bytes(loaded) == data
        assert loaded.vocabulary == vocabulary

    def test_checkpoint_kind(self, vocabulary, stats, rng):
        """A CGAN checkpoint is not a grade model."""
        model = CganModel.create(SMALL_CGAN, vocabulary, stats, rng)
        with pytest.raises(CheckpointError):
            grade_model_from_bytes(cgan_to_bytes(model))


# ============================================================================
# CGAN Tests
# ============================================================================


@pytest.mark.unit
class TestCgan:
    """Tests for the conditional GAN."""

    def test_windows_shape(self, history, vocabulary, stats):
        """Stride-one windows with their grade ids."""
        windows, ids = build_windows(history[:10], vocabulary, stats, 3)
        assert windows.shape == (8, 3, len(NUMERIC_COLUMNS))
        assert ids.shape == (8, 3)
        expected = stats.standardize(strips_to_matrix(history[1:2]))[0]
        np.testing.assert_allclose(windows[1, 0], expected)

    def test_too_few_strips(self, history, vocabulary, stats):
        """Fewer strips than one window are rejected."""
        with pytest.raises(RejectedInputError):
            build_windows(history[:2], vocabulary, stats, 3)

    def test_label_smoothing_targets(self):
        """Real examples get the smoothed label, fakes zero."""
        targets = discriminator_targets(2, 3, 0.9)
        np.testing.assert_array_equal(targets[:, 0], [0.9, 0.9, 0.0, 0.0, 0.0])

    def test_zero_embedding_gives_constant_window(self, vocabulary, stats, rng):
        """A zero grade embedding removes the noise from the output."""
        model = CganModel.create(SMALL_CGAN, vocabulary, stats, rng)
        model.generator.embedding.params["W"][0] = 0.0
        a = generator_forward(model, rng.standard_normal((1, 4)), [0])
        b = generator_forward(model, rng.standard_normal((1, 4)), [0])
        np.testing.assert_allclose(a, b)

    def test_generator_is_deterministic(self, vocabulary, stats, rng):
        """Fixed noise and grade give the same window."""
        model = CganModel.create(SMALL_CGAN, vocabulary, stats, rng)
        noise = rng.standard_normal((1, 4))
        np.testing.assert_array_equal(
            generator_forward(model, noise, [1]), generator_forward(model, noise, [1])
        )

    def test_training_is_seeded(self, history, vocabulary, stats):
        """The same seed gives the same checkpoint bytes."""
        windows, ids = build_windows(history[:40], vocabulary, stats, 3)
        blobs = [
            cgan_to_bytes(
                train_cgan(windows, ids, vocabulary, stats, SMALL_CGAN, np.random.default_rng(4))
            )
            for _ in range(2)
        ]
        assert blobs[0] == blobs[1]
        model = cgan_from_bytes(blobs[0])
        assert len(model.generator_losses) == SMALL_CGAN.epochs
        assert all(np.isfinite(model.discriminator_losses))

    def test_untrained_discriminator_is_a_coin_flip(self, history, vocabulary, stats):
        """Averaged over initializations, an untrained D scores close to 0.5."""
        windows, ids = build_windows(history, vocabulary, stats, 3)
        scores = []
        for seed in range(20):
            model = CganModel.create(SMALL_CGAN, vocabulary, stats, np.random.default_rng(seed))
            score = discriminator_accuracy(model, windows, ids, np.random.default_rng(100 + seed))
            assert 0.0 <= score <= 1.0
            scores.append(score)
        assert np.mean(scores) == pytest.approx(0.5, abs=0.15)

    def test_training_logs_discriminator_accuracy(
        self, history, vocabulary, stats, caplog, monkeypatch
    ):
        # app loggers do not propagate to the root handler caplog listens on
        monkeypatch.setattr(logging.getLogger("synthesis"), "propagate", True)
        caplog.set_level("INFO", logger="synthesis.cgan")
        windows, ids = build_windows(history[:40], vocabulary, stats, 3)
        train_cgan(windows, ids, vocabulary, stats, SMALL_CGAN, np.random.default_rng(4))
        messages = [record.getMessage() for record in caplog.records]
        assert any(m.startswith("Discriminator accuracy before training") for m in messages)
        assert any(m.startswith("Discriminator accuracy after 2 epochs") for m in messages)

    def test_one_strip(self, vocabulary, stats, rng):
        """One requested grade gives one valid strip of that grade."""
        model = CganModel.create(SMALL_CGAN, vocabulary, stats, rng)
        grade = vocabulary.grades[0]
        result = generate_strips(model, [grade], rng)
        assert [strip.grade for strip in result.strips] == [grade]

    def test_hundred_strips_are_valid(self, vocabulary, stats, rng):
        """Generated strips pass validation and repairs are counted per column."""
        model = CganModel.create(SMALL_CGAN, vocabulary, stats, rng)
        grades = [vocabulary.grades[i % len(vocabulary)] for i in range(100)]
        result = generate_strips(model, grades, rng, length_min=100.0, length_max=1500.0)
        assert len(result.strips) == 100
        for strip in result.strips:
            validate_strip(strip, vocabulary)
            assert 100.0 <= strip.length <= 1500.0
        assert set(NUMERIC_COLUMNS) <= set(result.repairs)
        assert result.repair_count >= 0

    def test_checkpoint_round_trip(self, vocabulary, stats, rng):
        """Loaded generators produce the same windows."""
        model = CganModel.create(SMALL_CGAN, vocabulary, stats, rng)
        loaded = cgan_from_bytes(cgan_to_bytes(model))
        noise = rng.standard_normal((1, 4))
        np.testing.assert_array_equal(
            generator_forward(loaded, noise, [2]), generator_forward(model, noise, [2])
        )


# ============================================================================
# Fidelity Tests
# ============================================================================


@pytest.mark.unit
class TestFidelity:
    """Tests for KS and grade-frequency comparisons."""

    def test_identical_sets(self, history):
        """A set compared with itself scores zero everywhere."""
        report = evaluate_fidelity(history, history)
        assert report.worst_column_ks == 0.0
        assert all(value == 0.0 for value in report.adjacent_ks.values())
        assert report.grade_total_variation == 0.0

    def test_disjoint_supports(self, rng):
        """A shift of ten sd gives KS close to one."""
        a = rng.normal(size=500)
        assert ks_statistic(a, a + 10.0) > 0.99

    def test_grade_total_variation(self, make_strip):
        """Disjoint grade sets are at distance one."""
        assert grade_total_variation([make_strip("A")], [make_strip("B")]) == 1.0

    def test_report_frame(self, history):
        """Every metric becomes one row."""
        frame = evaluate_fidelity(history, history[:200]).to_frame()
        assert len(frame) == len(NUMERIC_COLUMNS) + 2 + 1

    def test_empty_sets(self, history):
        """Both sets must be non-empty."""
        with pytest.raises(RejectedInputError):
            evaluate_fidelity(history, [])


# ============================================================================
# Acceptance Tests
# ============================================================================


def mean_run_length(grades):
    return float(np.mean([len(list(run)) for _, run in groupby(grades)]))


@pytest.mark.integration
@pytest.mark.slow
class TestSynthesisAcceptance:
    """Sample-level properties of trained synthesis models."""

    def test_sampled_run_lengths_follow_the_corpus(self):
        """10k grades from a two-grade model keep the corpus batch length within 50%."""
        vocabulary = GradeVocabulary(["A", "B"])
        rng = np.random.default_rng(17)
        stream = []
        grades = []
        for batch in range(300):
            length = int(rng.integers(2, 6))
            stream += [batch % 2] * length + [vocabulary.end_id]
            grades += [vocabulary.token_of(batch % 2)] * length
        config = GradeModelConfig(
            hidden_units=16, dropout_rate=0.0, sequence_length=8, batch_size=32, epochs=20,
            learning_rate=0.01,
        )
        model = train_grade_model(
            sequences_from(stream, vocabulary, sequence_length=8), vocabulary, config, rng
        )

        sampled = sample_grades(model, 10000, np.random.default_rng(18))
        assert len(sampled) == 10000
        assert set(sampled) <= {"A", "B"}
        corpus = mean_run_length(grades)
        assert 0.5 * corpus <= mean_run_length(sampled) <= 1.5 * corpus

    def test_cgan_fidelity_gate(self, run_config):
        """5k generated strips match 5k real ones column by column (KS < 0.15)."""
        real = generate_history(
            np.random.default_rng(5), strips=5000, grades=5, length_max=run_config["length_max"]
        )
        vocabulary = GradeVocabulary.from_sequence(strip.grade for strip in real)
        stats = StandardizationStats.fit(strips_to_matrix(real))
        config = CganConfig.from_run_config(run_config)
        windows, ids = build_windows(real, vocabulary, stats, config.window_length)
        model = train_cgan(windows, ids, vocabulary, stats, config, np.random.default_rng(6))

        result = generate_strips(
            model,
            [strip.grade for strip in real],
            np.random.default_rng(7),
            length_min=run_config["length_min"],
            length_max=run_config["length_max"],
        )
        report = evaluate_fidelity(real, result.strips)
        assert len(result.strips) == 5000
        assert report.worst_column_ks < 0.15, report.column_ks
