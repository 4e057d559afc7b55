"""
Scenario precomputation.

Scenario i of a set draws everything from its own seed streams, so a set is
a pure function of (models or dataset, line config, master seed, count).
"""

import logging

from django.core.exceptions import ValidationError

from core.exceptions import ConfigurationError
from line.scenario import InitialConditions, Scenario
from strips.domain import validate_strip
from strips.speed_table import validate_speed_table
from synthesis.cgan import generate_strips
from synthesis.grades import sample_grades

from .seeding import derive_seed, make_rng

logger = logging.getLogger(__name__)

GENERATED = "generated"
HISTORICAL = "historical"
SOURCES = (GENERATED, HISTORICAL)


def random_initial_conditions(rng, line_config, queue, speed_table):
    """
    Plausible line state at reset: looper1 in the middle of its range,
    looper2 in its lower half, every unit at one STU speed inside the cap.
    """
    span1 = line_config.looper1_upper - line_config.looper1_lower
    span2 = line_config.looper2_upper - line_config.looper2_lower
    looper1 = line_config.looper1_lower + span1 * rng.uniform(0.3, 0.8)
    looper2 = line_config.looper2_lower + span2 * rng.uniform(0.15, 0.5)
    cap_min, cap_max = speed_table.speed_cap(queue[-1])
    speed = float(round(rng.uniform(cap_min, 0.5 * (cap_min + cap_max))))
    residual = queue[0].length * rng.uniform(0.2, 1.0)
    return InitialConditions(
        looper1=float(looper1),
        looper2=float(looper2),
        stu_speed=speed,
        ftu_speed=speed,
        ttu_speed=speed,
        ftu_residual=float(residual),
    )


def generated_queue(index, master_seed, length, grade_model, cgan, strip_config):
    rng = make_rng(master_seed, "scenario.generated", index)
    grades = sample_grades(grade_model, length, rng)
    result = generate_strips(cgan, grades, rng, **strip_config)
    return result.strips


def historical_queue(index, master_seed, length, strips):
    """A contiguous window of ``length`` strips from the historical record."""
    if len(strips) < length:
        raise ConfigurationError(
            f"Historical dataset has {len(strips)} strips, an episode needs {length}"
        )
    rng = make_rng(master_seed, "scenario.historical", index)
    start = int(rng.integers(0, len(strips) - length + 1))
    return list(strips[start : start + length])


def precompute_scenarios(count, source, line_config, speed_table, master_seed,
                         grade_model=None, cgan=None, strips=None, strip_config=None):
    """
    Build ``count`` scenarios from generated or historical strips.

    Raises:
        ConfigurationError: if the models (generated) or strips (historical)
            are missing, or a strip has no speed-table row
    """
    if source not in SOURCES:
        raise ConfigurationError(f"Unknown scenario source '{source}'")
    if count < 1:
        raise ConfigurationError("Scenario count must be >= 1")
    if source == GENERATED and (grade_model is None or cgan is None):
        raise ConfigurationError("Generated scenarios need a grade model and a CGAN")
    if source == HISTORICAL and not strips:
        raise ConfigurationError("Historical scenarios need an ingested dataset")
    strip_config = strip_config or {}
    length = line_config.episode_strips

    scenarios = []
    for index in range(count):
        if source == GENERATED:
            queue = generated_queue(index, master_seed, length, grade_model, cgan, strip_config)
        else:
            queue = historical_queue(index, master_seed, length, strips)
        try:
            for strip in queue:
                validate_strip(strip)
        except ValidationError as exc:
            raise ConfigurationError(f"Scenario {index} has an invalid strip: {exc.messages}")
        validate_speed_table(speed_table, queue)
        rng = make_rng(master_seed, f"scenario.{source}.initial", index)
        scenarios.append(
            Scenario(
                scenario_id=f"{source}-{index:04d}",
                queue=tuple(queue),
                initial=random_initial_conditions(rng, line_config, queue, speed_table),
                disturbance_seed=derive_seed(master_seed, f"scenario.{source}.disturbance", index),
                source=source,
            )
        )
    logger.info("Precomputed %d %s scenarios", count, source)
    return scenarios
