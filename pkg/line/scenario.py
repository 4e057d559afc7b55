"""
Episode scenarios: a strip queue, initial conditions and a disturbance seed.

Scenario sets are stored as one versioned JSON document with sorted keys,
so the same inputs always produce the same bytes.
"""

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

from django.core.exceptions import ValidationError

from core.exceptions import CheckpointError, ConfigurationError
from core.validators import validate_non_negative, validate_strictly_inside
from strips.domain import Strip

logger = logging.getLogger(__name__)

SCENARIO_FORMAT_VERSION = 1


@dataclass(frozen=True)
class InitialConditions:
    """
    Line state at reset. ``ftu_weld_remaining`` > 0 starts the FTU stopped,
    welding the head of the first queue strip; ``ftu_residual`` is then unused.
    """

    looper1: float
    looper2: float
    stu_speed: float
    ftu_speed: float
    ttu_speed: float
    ftu_residual: float
    ftu_weld_remaining: float = 0.0

    def as_dict(self):
        return asdict(self)


def validate_initial_conditions(initial, config, first_length):
    """
    Raises:
        ConfigurationError: if a volume is not strictly inside its bounds or a
            speed or length is out of range
    """
    try:
        validate_strictly_inside(
            initial.looper1, config.looper1_lower, config.looper1_upper, "looper1"
        )
        validate_strictly_inside(
            initial.looper2, config.looper2_lower, config.looper2_upper, "looper2"
        )
        for name in ("stu_speed", "ftu_speed", "ttu_speed", "ftu_weld_remaining"):
            validate_non_negative(getattr(initial, name))
    except ValidationError as exc:
        raise ConfigurationError(f"Initial conditions rejected: {'; '.join(exc.messages)}")
    if initial.ftu_weld_remaining == 0 and not 0 < initial.ftu_residual <= first_length:
        raise ConfigurationError(
            f"FTU residual {initial.ftu_residual} m must lie in (0, {first_length}] m"
        )


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    queue: tuple
    initial: InitialConditions
    disturbance_seed: int
    source: str = "generated"

    def as_dict(self):
        return {
            "id": self.scenario_id,
            "source": self.source,
            "disturbance_seed": int(self.disturbance_seed),
            "initial": self.initial.as_dict(),
            "queue": [strip.as_dict() for strip in self.queue],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                scenario_id=str(data["id"]),
                queue=tuple(Strip(**row) for row in data["queue"]),
                initial=InitialConditions(**data["initial"]),
                disturbance_seed=int(data["disturbance_seed"]),
                source=data.get("source", "generated"),
            )
        except (KeyError, TypeError) as exc:
            raise CheckpointError(f"Malformed scenario entry: {exc}")


def scenarios_to_json(scenarios):
    document = {
        "format_version": SCENARIO_FORMAT_VERSION,
        "scenarios": [scenario.as_dict() for scenario in scenarios],
    }
    return json.dumps(document, sort_keys=True, indent=1) + "\n"


def scenarios_from_json(text):
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"Scenario file is not JSON: {exc}")
    if document.get("format_version") != SCENARIO_FORMAT_VERSION:
        raise CheckpointError(
            f"Unsupported scenario format version {document.get('format_version')!r}"
        )
    return [Scenario.from_dict(entry) for entry in document.get("scenarios", [])]


def write_scenarios(path, scenarios):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(scenarios_to_json(scenarios), encoding="utf-8")
    logger.info("Wrote %d scenarios to %s", len(scenarios), path)
    return path


def read_scenarios(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"Cannot read scenario file {path}: {exc}")
    return scenarios_from_json(text)
