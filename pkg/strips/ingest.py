"""
Historical strip ingestion.

Reads a delimited file with one strip per row (header required), maps its
columns through a StripSchema, rejects rows that break Strip invariants with
row-level diagnostics, and builds the grade vocabulary and standardization
stats over the accepted rows.
"""

import logging
import math
from dataclasses import dataclass, field

import pandas as pd
from decouple import Config, RepositoryIni
from django.core.exceptions import ValidationError

from core.exceptions import ConfigurationError, RejectedInputError

from .domain import (
    INTEGER_COLUMNS,
    NUMERIC_COLUMNS,
    STEEL_DENSITY,
    GradeVocabulary,
    StandardizationStats,
    Strip,
    derive_length,
    strips_to_matrix,
    validate_strip,
)

logger = logging.getLogger(__name__)

STRIP_FIELDS = ("grade",) + NUMERIC_COLUMNS + ("length",)


@dataclass(frozen=True)
class StripSchema:
    """
    Mapping from Strip field to source column name.

    ``length`` may be mapped to an empty string, in which case it is derived
    from weight and geometry.
    """

    columns: dict = field(default_factory=lambda: {name: name for name in STRIP_FIELDS})
    delimiter: str = ","

    @classmethod
    def from_ini(cls, path):
        """
        Read a schema from an INI file with a [settings] section, e.g.::

            [settings]
            GRADE = steel_grade
            ORIGINAL_WIDTH = width_in
            DELIMITER = ;
        """
        try:
            repository = RepositoryIni(str(path))
        except OSError as exc:
            raise ConfigurationError(f"Cannot read schema {path}: {exc}")
        reader = Config(repository)
        known = set(STRIP_FIELDS) | {"delimiter"}
        options = {option.lower() for option in repository.parser.options(RepositoryIni.SECTION)}
        unknown = options - known
        if unknown:
            raise ConfigurationError(f"Unknown schema keys in {path}: {sorted(unknown)}")
        columns = {
            name: reader(name.upper(), default=name) for name in STRIP_FIELDS
        }
        return cls(columns=columns, delimiter=reader("DELIMITER", default=","))


@dataclass(frozen=True)
class RowDiagnostic:
    row: int
    field: str
    message: str

    def __str__(self):
        return f"row {self.row}: {self.field}: {self.message}"


@dataclass
class IngestResult:
    strips: list
    vocabulary: GradeVocabulary
    stats: StandardizationStats
    diagnostics: list = field(default_factory=list)

    def __iter__(self):
        # unpacks as (strips, vocabulary, stats)
        return iter((self.strips, self.vocabulary, self.stats))


def _parse_number(raw, integer):
    value = float(raw)
    if not math.isfinite(value):
        raise ValueError("not finite")
    if integer:
        if value != int(value):
            raise ValueError("not an integer")
        return int(value)
    return value


def parse_row(record, schema, density=STEEL_DENSITY, length_min=None, length_max=None):
    """
    Turn one raw row (dict of strings) into a validated Strip.

    Raises:
        ValidationError: keyed by field name
    """
    errors = {}
    values = {"grade": str(record[schema.columns["grade"]]).strip()}
    for name in NUMERIC_COLUMNS:
        raw = str(record[schema.columns[name]]).strip()
        try:
            values[name] = _parse_number(raw, name in INTEGER_COLUMNS)
        except ValueError:
            errors[name] = [f"'{raw}' is not a valid number"]
    if errors:
        raise ValidationError(errors)

    length_column = schema.columns.get("length")
    raw_length = str(record.get(length_column, "")).strip() if length_column else ""
    if raw_length:
        try:
            values["length"] = _parse_number(raw_length, integer=False)
        except ValueError:
            raise ValidationError({"length": [f"'{raw_length}' is not a valid number"]})
    elif values["original_width"] > 0 and values["thickness"] > 0 and values["weight"] > 0:
        values["length"] = derive_length(
            values["weight"],
            values["original_width"],
            values["thickness"],
            density=density,
            length_min=length_min,
            length_max=length_max,
        )
    else:
        values["length"] = 0.0

    strip = Strip(**values)
    validate_strip(strip)
    return strip


def ingest_history(path, schema=None, density=STEEL_DENSITY, length_min=None, length_max=None):
    """
    Ingest a historical strip file.

    Returns:
        IngestResult (unpacks as strips, vocabulary, stats)

    Raises:
        RejectedInputError: unreadable file, missing columns or no accepted rows
    """
    schema = schema or StripSchema()
    try:
        frame = pd.read_csv(path, sep=schema.delimiter, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise RejectedInputError(f"Cannot read history file {path}: {exc}")

    required = [schema.columns[name] for name in ("grade",) + NUMERIC_COLUMNS]
    missing = [column for column in required if column not in frame.columns]
    if missing:
        raise RejectedInputError(f"History file {path} lacks columns {missing}")

    strips = []
    diagnostics = []
    # header is line 1, so data rows start at line 2
    for line_number, record in enumerate(frame.to_dict("records"), start=2):
        try:
            strips.append(
                parse_row(record, schema, density, length_min=length_min, length_max=length_max)
            )
        except ValidationError as exc:
            for field_name, messages in exc.message_dict.items():
                for message in messages:
                    diagnostic = RowDiagnostic(line_number, field_name, message)
                    diagnostics.append(diagnostic)
                    logger.warning("Rejected %s", diagnostic)

    if not strips:
        raise RejectedInputError(f"No valid strips in {path} ({len(diagnostics)} problems)")

    vocabulary = GradeVocabulary.from_sequence(strip.grade for strip in strips)
    try:
        stats = StandardizationStats.fit(strips_to_matrix(strips))
    except ConfigurationError as exc:
        # constant columns cannot be standardized; the CGAN refuses such datasets
        logger.warning("No standardization stats for %s: %s", path, exc)
        stats = None
    logger.info(
        "Ingested %d strips (%d grades) from %s, %d rows rejected",
        len(strips),
        len(vocabulary),
        path,
        len({d.row for d in diagnostics}),
    )
    return IngestResult(strips, vocabulary, stats, diagnostics)
