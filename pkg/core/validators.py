"""
Field validators for the pickling line project.

Provides validation functions for strip attributes, grade codes, probabilities
and bounded quantities. All of them raise Django ``ValidationError`` with a
stable ``code`` so that ingestion can report row-level diagnostics.
"""

import math
import re

from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _


def validate_grade_code(value):
    """
    Validate a steel grade code.

    Grade codes are 1-32 characters of letters, digits, dots, dashes or
    underscores (e.g. 08PS, S355J2, 3SP-5). The literal END is reserved for
    the batch separator token.
    """
    if not isinstance(value, str) or not re.match(r"^[A-Za-z0-9._\-]{1,32}$", value):
        raise ValidationError(
            _("Enter a valid steel grade code (1-32 alphanumeric characters)"),
            code="invalid_grade",
        )
    if value == "END":
        raise ValidationError(
            _("END is reserved for the batch separator token"),
            code="reserved_grade",
        )


def validate_finite(value):
    """
    Validate that a numeric value is a finite number.
    """
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ValidationError(_("Value must be numeric"), code="not_numeric")
    if not math.isfinite(number):
        raise ValidationError(_("Value must be finite"), code="not_finite")


def validate_positive(value):
    """
    Validate that a numeric value is strictly positive.
    """
    validate_finite(value)
    if float(value) <= 0:
        raise ValidationError(
            _("Value must be greater than zero"),
            code="invalid_positive",
        )


def validate_non_negative(value):
    """
    Validate that a numeric value is zero or positive.
    """
    validate_finite(value)
    if float(value) < 0:
        raise ValidationError(
            _("Value must not be negative"),
            code="invalid_non_negative",
        )


def validate_probability(value):
    """
    Validate a rate in [0, 1), e.g. a dropout rate.
    """
    validate_finite(value)
    if not 0.0 <= float(value) < 1.0:
        raise ValidationError(
            _("Value must lie in [0, 1)"),
            code="invalid_probability",
        )


def validate_widths(original_width, resulting_width):
    """
    Validate that the resulting width does not exceed the original width.

    The pickling line may trim a strip but never widens it.
    """
    if resulting_width > original_width:
        raise ValidationError(
            _("Resulting width %(res)s mm exceeds original width %(orig)s mm"),
            code="width_order",
            params={"res": resulting_width, "orig": original_width},
        )


def validate_strictly_inside(value, lower, upper, name="value"):
    """
    Validate lower < value < upper, used for looper volumes in initial conditions.
    """
    validate_finite(value)
    if not lower < float(value) < upper:
        raise ValidationError(
            _("%(name)s %(value)s is outside (%(lower)s, %(upper)s)"),
            code="out_of_bounds",
            params={"name": name, "value": value, "lower": lower, "upper": upper},
        )
