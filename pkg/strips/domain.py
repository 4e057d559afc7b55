"""
Strip data model.

A Strip is one steel strip record. Widths are integer millimetres, thickness
is integer hundredths of a millimetre, weight integer kilograms; length (m) is
derived from mass balance when the source does not carry it.
"""

from dataclasses import asdict, dataclass, replace

import numpy as np
from django.core.exceptions import ValidationError

from core.exceptions import ConfigurationError, RejectedInputError
from core.validators import validate_grade_code, validate_positive, validate_widths

END_TOKEN = "END"

NUMERIC_COLUMNS = (
    "original_width",
    "resulting_width",
    "thickness",
    "weight",
    "coiling_temperature",
    "strips_in_resulting_coil",
)
INTEGER_COLUMNS = ("original_width", "resulting_width", "thickness", "weight")

STEEL_DENSITY = 7850.0


@dataclass(frozen=True)
class Strip:
    grade: str
    original_width: int
    resulting_width: int
    thickness: int
    weight: int
    coiling_temperature: float
    strips_in_resulting_coil: float
    length: float

    @property
    def numeric(self):
        return np.array([getattr(self, column) for column in NUMERIC_COLUMNS], dtype=np.float64)

    @property
    def batch_key(self):
        """Strips sharing grade, width and thickness belong to one processing batch."""
        return (self.grade, self.original_width, self.thickness)

    def as_dict(self):
        return asdict(self)

    def with_length(self, length):
        return replace(self, length=float(length))


def derive_length(weight, width_mm, thickness_units, density=STEEL_DENSITY,
                  length_min=None, length_max=None):
    """
    Strip length in metres from weight and geometry.

    length = weight / (density * width[m] * thickness[m]), clamped to
    [length_min, length_max] when given.
    """
    width_m = width_mm / 1000.0
    thickness_m = thickness_units / 100000.0
    length = weight / (density * width_m * thickness_m)
    if length_min is not None:
        length = max(length, length_min)
    if length_max is not None:
        length = min(length, length_max)
    return float(length)


def validate_strip(strip, vocabulary=None):
    """
    Check every Strip invariant.

    Raises:
        ValidationError: keyed by field name
    """
    errors = {}
    try:
        validate_grade_code(strip.grade)
    except ValidationError as exc:
        errors["grade"] = exc.messages
    if vocabulary is not None and strip.grade not in vocabulary:
        errors.setdefault("grade", []).append(f"Grade {strip.grade} is not in the vocabulary")
    for name in ("original_width", "resulting_width", "thickness", "weight", "length"):
        try:
            validate_positive(getattr(strip, name))
        except ValidationError as exc:
            errors[name] = exc.messages
    if "original_width" not in errors and "resulting_width" not in errors:
        try:
            validate_widths(strip.original_width, strip.resulting_width)
        except ValidationError as exc:
            errors["resulting_width"] = exc.messages
    if errors:
        raise ValidationError(errors)


class GradeVocabulary:
    """
    Ordered grade list with a trailing END token.

    Ids are dense: grades take 0..N-1 in first-seen order, END takes N.
    """

    def __init__(self, grades):
        grades = tuple(grades)
        if not grades:
            raise RejectedInputError("A grade vocabulary needs at least one grade")
        if len(set(grades)) != len(grades):
            raise RejectedInputError("Grade vocabulary entries must be unique")
        if END_TOKEN in grades:
            raise RejectedInputError("END is reserved and cannot be a grade")
        self.grades = grades
        self._ids = {grade: i for i, grade in enumerate(grades)}

    @classmethod
    def from_sequence(cls, grades):
        seen = {}
        for grade in grades:
            seen.setdefault(grade, None)
        return cls(seen)

    @property
    def end_id(self):
        return len(self.grades)

    @property
    def size(self):
        """Number of tokens including END."""
        return len(self.grades) + 1

    def id_of(self, token):
        if token == END_TOKEN:
            return self.end_id
        try:
            return self._ids[token]
        except KeyError:
            raise RejectedInputError(f"Unknown grade '{token}'")

    def token_of(self, index):
        if index == self.end_id:
            return END_TOKEN
        if not 0 <= index < len(self.grades):
            raise RejectedInputError(f"Token id {index} outside vocabulary")
        return self.grades[index]

    def __contains__(self, grade):
        return grade in self._ids

    def __len__(self):
        return len(self.grades)

    def __eq__(self, other):
        return isinstance(other, GradeVocabulary) and self.grades == other.grades

    def __hash__(self):
        return hash(self.grades)

    def __repr__(self):
        return f"GradeVocabulary({len(self.grades)} grades)"


def strips_to_matrix(strips):
    """Stack the numeric columns of strips into an (N, 6) float matrix."""
    if not strips:
        return np.zeros((0, len(NUMERIC_COLUMNS)))
    return np.vstack([strip.numeric for strip in strips])


@dataclass(frozen=True, eq=False)
class StandardizationStats:
    """Per-column mean, population sd and observed range."""

    mean: np.ndarray
    sd: np.ndarray
    minimum: np.ndarray
    maximum: np.ndarray
    columns: tuple = NUMERIC_COLUMNS

    def __post_init__(self):
        if np.any(~np.isfinite(self.sd)) or np.any(self.sd <= 0):
            zero = [c for c, s in zip(self.columns, self.sd) if not s > 0]
            raise ConfigurationError(f"Standard deviation is zero for columns {zero}")

    @classmethod
    def fit(cls, matrix, columns=NUMERIC_COLUMNS):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] == 0:
            raise RejectedInputError("Cannot fit standardization stats on an empty matrix")
        return cls(
            mean=matrix.mean(axis=0),
            sd=matrix.std(axis=0),
            minimum=matrix.min(axis=0),
            maximum=matrix.max(axis=0),
            columns=tuple(columns),
        )

    def standardize(self, matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape[-1] != len(self.columns):
            raise RejectedInputError(
                f"Expected {len(self.columns)} columns, got {matrix.shape[-1]}"
            )
        return (matrix - self.mean) / self.sd

    def destandardize(self, matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape[-1] != len(self.columns):
            raise RejectedInputError(
                f"Expected {len(self.columns)} columns, got {matrix.shape[-1]}"
            )
        return matrix * self.sd + self.mean


def standardize(strips, stats):
    return stats.standardize(strips_to_matrix(strips))


def destandardize(matrix, stats):
    return stats.destandardize(matrix)
