"""
Synthetic strip history with batch structure.

Stands in for a plant history when none is available. Strips come in batches
of identical grade, width and thickness; grades differ in typical width,
gauge and coil weight.
"""

import logging

import numpy as np

from core.exceptions import RejectedInputError

from .domain import STEEL_DENSITY, Strip, derive_length

logger = logging.getLogger(__name__)

# grade -> (widths mm, thicknesses 0.01 mm, mean coil weight kg)
GRADE_PROFILES = {
    "08PS": ((1000, 1100, 1250), (200, 250, 300), 14000),
    "St3SP": ((1100, 1250, 1400), (250, 300, 400), 16000),
    "09G2S": ((1250, 1400, 1500), (300, 400, 500), 18000),
    "10HSND": ((1000, 1250, 1500), (400, 500), 17000),
    "S355J2": ((1100, 1400), (250, 300, 400), 15000),
}

MEAN_BATCH_LENGTH = 6


def _grade_profiles(grades):
    names = list(GRADE_PROFILES)
    profiles = {}
    for i in range(grades):
        if i < len(names):
            profiles[names[i]] = GRADE_PROFILES[names[i]]
        else:
            profiles[f"GR{i + 1:03d}"] = ((1000, 1250, 1500), (250, 300, 400), 15000)
    return profiles


def generate_history(rng, strips=500, grades=5, density=STEEL_DENSITY,
                     length_min=None, length_max=None):
    """
    Generate ``strips`` strips over ``grades`` grades in batches.

    Batch lengths are geometric with mean 6; consecutive batches switch to
    another grade.
    """
    if strips < 1 or grades < 1:
        raise RejectedInputError("History needs at least one strip and one grade")
    profiles = _grade_profiles(grades)
    names = list(profiles)
    history = []
    grade = names[int(rng.integers(len(names)))]
    while len(history) < strips:
        widths, thicknesses, mean_weight = profiles[grade]
        width = int(rng.choice(widths))
        thickness = int(rng.choice(thicknesses))
        batch = int(rng.geometric(1.0 / MEAN_BATCH_LENGTH))
        for _ in range(min(batch, strips - len(history))):
            weight = int(max(5000, round(rng.normal(mean_weight, 2500))))
            trim = int(5 * rng.integers(0, 5))
            history.append(
                Strip(
                    grade=grade,
                    original_width=width,
                    resulting_width=width - trim,
                    thickness=thickness,
                    weight=weight,
                    coiling_temperature=float(round(rng.normal(620.0, 20.0), 1)),
                    strips_in_resulting_coil=float(rng.choice((1.0, 1.0, 1.0, 2.0))),
                    length=derive_length(
                        weight, width, thickness, density, length_min, length_max
                    ),
                )
            )
        if len(names) > 1:
            others = [name for name in names if name != grade]
            grade = others[int(rng.integers(len(others)))]
    logger.debug("Generated %d synthetic strips over %d grades", len(history), len(names))
    return history
