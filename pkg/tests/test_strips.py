"""
Tests for the strip domain: validation, length derivation, vocabulary,
standardization, ingestion, the speed table and dataset files.
"""

import numpy as np
import pytest
from django.core.exceptions import ValidationError

from core.exceptions import CheckpointError, ConfigurationError, RejectedInputError
from strips.dataset import Dataset, read_dataset, read_strips_csv, write_dataset, write_strips_csv
from strips.domain import (
    END_TOKEN,
    GradeVocabulary,
    StandardizationStats,
    derive_length,
    strips_to_matrix,
    validate_strip,
)
from strips.history import generate_history
from strips.ingest import StripSchema, ingest_history
from strips.speed_table import SpeedRow, SpeedTable, read_speed_table, validate_speed_table

HEADER = (
    "grade,original_width,resulting_width,thickness,weight,"
    "coiling_temperature,strips_in_resulting_coil\n"
)


# ============================================================================
# Strip Tests
# ============================================================================


@pytest.mark.unit
class TestStrip:
    """Tests for Strip validation and length derivation."""

    def test_valid_strip(self, make_strip):
        """A default strip passes validation."""
        validate_strip(make_strip())

    def test_widening_rejected(self, make_strip):
        """The resulting width may not exceed the original width."""
        with pytest.raises(ValidationError) as exc:
            validate_strip(make_strip(width=1000, resulting_width=1010))
        assert "resulting_width" in exc.value.message_dict

    def test_grade_outside_vocabulary(self, make_strip):
        """A vocabulary restricts the grade."""
        with pytest.raises(ValidationError):
            validate_strip(make_strip(grade="XX1"), vocabulary=GradeVocabulary(["08PS"]))

    def test_non_positive_length(self, make_strip):
        """Length must be positive."""
        with pytest.raises(ValidationError):
            validate_strip(make_strip(length=0.0))

    def test_length_by_mass_balance(self):
        """1 m wide, 2 mm thick, 7850 kg gives 500 m."""
        assert derive_length(7850, 1000, 200) == pytest.approx(500.0)

    def test_length_is_linear_in_weight(self):
        """Halving the weight halves the length."""
        assert derive_length(7850 / 2, 1000, 200) == pytest.approx(250.0)

    def test_length_clamped(self):
        """Optional bounds clamp the derived length."""
        assert derive_length(7850, 1000, 200, length_max=400.0) == 400.0
        assert derive_length(7850, 1000, 200, length_min=600.0) == 600.0

    def test_length_oracle(self, rng):
        """Random strips match weight / (density * width * thickness)."""
        for _ in range(10):
            weight = int(rng.integers(5000, 30000))
            width = int(rng.integers(800, 1800))
            thickness = int(rng.integers(150, 600))
            expected = weight / (7850.0 * (width / 1000.0) * (thickness / 100000.0))
            assert derive_length(weight, width, thickness) == pytest.approx(expected, abs=1e-9)


# ============================================================================
# Vocabulary Tests
# ============================================================================


@pytest.mark.unit
class TestGradeVocabulary:
    """Tests for grade ids and the END token."""

    def test_first_seen_order(self):
        """Ids follow the first appearance of each grade."""
        vocabulary = GradeVocabulary.from_sequence(["B", "A", "B", "C"])
        assert vocabulary.grades == ("B", "A", "C")
        assert vocabulary.id_of("A") == 1

    def test_end_token_is_last(self):
        """END takes id N and counts towards the size."""
        vocabulary = GradeVocabulary(["A", "B"])
        assert vocabulary.id_of(END_TOKEN) == 2
        assert vocabulary.token_of(2) == END_TOKEN
        assert vocabulary.size == 3

    def test_unknown_grade(self):
        """Unknown grades are rejected."""
        with pytest.raises(RejectedInputError):
            GradeVocabulary(["A"]).id_of("Z")

    def test_end_is_reserved(self):
        """END cannot be a grade."""
        with pytest.raises(RejectedInputError):
            GradeVocabulary(["A", END_TOKEN])


# ============================================================================
# Standardization Tests
# ============================================================================


@pytest.mark.unit
class TestStandardization:
    """Tests for per-column moments."""

    def fit_column(self, values):
        return StandardizationStats.fit(np.array(values, dtype=float)[:, None], columns=("x",))

    def test_moments(self):
        """Values {2, 4, 6} have mean 4 and population sd 1.632993."""
        stats = self.fit_column([2, 4, 6])
        assert stats.mean[0] == pytest.approx(4.0)
        assert stats.sd[0] == pytest.approx(1.632993, abs=1e-6)

    def test_standardized_column(self):
        """The column maps to (-1.2247, 0, 1.2247)."""
        stats = self.fit_column([2, 4, 6])
        z = stats.standardize(np.array([[2.0], [4.0], [6.0]]))[:, 0]
        np.testing.assert_allclose(z, [-1.2247449, 0.0, 1.2247449], atol=1e-6)

    def test_mean_maps_to_zero(self, history):
        """The mean row standardizes to zeros."""
        stats = StandardizationStats.fit(strips_to_matrix(history))
        np.testing.assert_allclose(stats.standardize(stats.mean[None, :]), 0.0, atol=1e-12)

    def test_round_trip(self, history):
        """destandardize inverts standardize."""
        matrix = strips_to_matrix(history[:100])
        stats = StandardizationStats.fit(matrix)
        back = stats.destandardize(stats.standardize(matrix))
        assert np.max(np.abs(back - matrix)) < 1e-9

    def test_zero_sd_rejected(self):
        """A constant column cannot be standardized."""
        with pytest.raises(ConfigurationError):
            self.fit_column([3, 3, 3])


# ============================================================================
# Ingestion Tests
# ============================================================================


@pytest.mark.unit
class TestIngest:
    """Tests for reading historical strip files."""

    def test_three_valid_rows(self, tmp_path):
        """Every valid row becomes a strip."""
        path = tmp_path / "history.csv"
        path.write_text(
            HEADER
            + "08PS,1250,1240,250,15000,620,1\n"
            + "08PS,1250,1245,250,16000,615,1\n"
            + "S355J2,1100,1100,300,14000,630,2\n"
        )
        strips, vocabulary, stats = ingest_history(path)
        assert len(strips) == 3
        assert vocabulary.grades == ("08PS", "S355J2")
        assert stats is not None
        assert strips[0].length == pytest.approx(derive_length(15000, 1250, 250))

    def test_bad_row_reported(self, tmp_path):
        """A widened strip is rejected with a row diagnostic, others are kept."""
        path = tmp_path / "history.csv"
        path.write_text(
            HEADER
            + "08PS,1250,1240,250,15000,620,1\n"
            + "08PS,1000,1100,250,15000,620,1\n"
            + "08PS,1250,1245,300,16000,610,1\n"
        )
        result = ingest_history(path)
        assert len(result.strips) == 2
        assert [(d.row, d.field) for d in result.diagnostics] == [(3, "resulting_width")]

    def test_non_numeric_field(self, tmp_path):
        """Non-numeric values are reported per field."""
        path = tmp_path / "history.csv"
        path.write_text(
            HEADER + "08PS,1250,1240,250,heavy,620,1\n" + "08PS,1250,1240,250,15000,620,1\n"
        )
        result = ingest_history(path)
        assert result.diagnostics[0].field == "weight"

    def test_no_valid_rows(self, tmp_path):
        """A file with nothing acceptable is rejected."""
        path = tmp_path / "history.csv"
        path.write_text(HEADER + "08PS,1000,1100,250,15000,620,1\n")
        with pytest.raises(RejectedInputError):
            ingest_history(path)

    def test_unreadable_file(self, tmp_path):
        """A missing file is rejected."""
        with pytest.raises(RejectedInputError):
            ingest_history(tmp_path / "missing.csv")

    def test_schema_from_ini(self, tmp_path):
        """Column names and delimiter come from an INI mapping."""
        schema_path = tmp_path / "schema.ini"
        schema_path.write_text("[settings]\nGRADE = steel\nDELIMITER = ;\n")
        schema = StripSchema.from_ini(schema_path)
        assert schema.columns["grade"] == "steel"
        assert schema.delimiter == ";"
        data = tmp_path / "history.csv"
        data.write_text(
            HEADER.replace("grade", "steel").replace(",", ";")
            + "08PS;1250;1240;250;15000;620;1\n08PS;1250;1240;300;15000;620;1\n"
        )
        assert len(ingest_history(data, schema=schema).strips) == 2


# ============================================================================
# Speed Table Tests
# ============================================================================


@pytest.mark.unit
class TestSpeedTable:
    """Tests for STU speed caps."""

    def test_single_row(self, flat_speed_table, make_strip):
        """One row covering everything returns its bounds."""
        assert flat_speed_table.speed_cap(make_strip()) == (30, 200)

    def test_tightest_row_wins(self, make_strip):
        """Overlapping rows give the largest v_min and the smallest v_max."""
        table = SpeedTable(
            [
                SpeedRow(0, 10000, 0, 100000, frozenset(), 30, 200),
                SpeedRow(1000, 2000, 0, 100000, frozenset(), 40, 150),
            ]
        )
        assert table.speed_cap(make_strip(width=1250)) == (40, 150)

    def test_no_matching_row(self, make_strip):
        """A strip outside every row is a configuration error."""
        table = SpeedTable([SpeedRow(0, 1000, 0, 100000, frozenset(), 30, 200)])
        with pytest.raises(ConfigurationError, match="grade=08PS"):
            table.speed_cap(make_strip(width=1250))

    def test_default_table_covers_history(self, speed_table, history):
        """The bundled table has a row for every synthetic strip."""
        validate_speed_table(speed_table, history)
        caps = [speed_table.speed_cap(strip) for strip in history]
        assert all(30 <= low <= high <= 220 for low, high in caps)

    def test_csv_round_trip(self, speed_table, tmp_path, make_strip):
        """A written table reads back to the same caps."""
        path = tmp_path / "speeds.csv"
        speed_table.write_csv(path)
        table = read_speed_table(path)
        for grade in ("08PS", "09G2S"):
            strip = make_strip(grade=grade, thickness=450)
            assert table.speed_cap(strip) == speed_table.speed_cap(strip)


# ============================================================================
# History and Dataset Tests
# ============================================================================


@pytest.mark.unit
class TestDataset:
    """Tests for the synthetic history and dataset directories."""

    def test_history_size_and_validity(self, history):
        """The generator returns valid strips over the requested grades."""
        assert len(history) == 500
        assert len({strip.grade for strip in history}) == 5
        for strip in history:
            validate_strip(strip)

    def test_history_has_batches(self, history):
        """Consecutive strips share their batch key more often than not."""
        same = sum(a.batch_key == b.batch_key for a, b in zip(history, history[1:]))
        assert same > len(history) / 2

    def test_history_is_seeded(self):
        """The same rng seed gives the same history."""
        a = generate_history(np.random.default_rng(3), strips=50)
        b = generate_history(np.random.default_rng(3), strips=50)
        assert a == b

    def test_strips_csv_round_trip(self, history, tmp_path):
        """Strips survive a CSV round trip."""
        path = write_strips_csv(history[:20], tmp_path / "strips.csv")
        assert read_strips_csv(path) == history[:20]

    def test_dataset_round_trip(self, history, tmp_path):
        """Strips, vocabulary and stats are read back."""
        vocabulary = GradeVocabulary.from_sequence(strip.grade for strip in history)
        stats = StandardizationStats.fit(strips_to_matrix(history))
        write_dataset(tmp_path / "ds", Dataset(history, vocabulary, stats))
        loaded = read_dataset(tmp_path / "ds")
        assert loaded.strips == history
        assert loaded.vocabulary == vocabulary
        np.testing.assert_allclose(loaded.stats.mean, stats.mean)

    def test_missing_manifest(self, tmp_path):
        """A directory without a manifest is not a dataset."""
        with pytest.raises(CheckpointError):
            read_dataset(tmp_path)
