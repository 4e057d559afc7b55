"""
STU speed table: (width range, thickness range, grade set) -> (v_min, v_max) m/min.

When several rows match a strip the tightest v_max wins and v_min is the
largest matching lower bound.
"""

import logging
from dataclasses import dataclass

import pandas as pd

from core.exceptions import ConfigurationError, RejectedInputError

logger = logging.getLogger(__name__)

TABLE_COLUMNS = (
    "width_min",
    "width_max",
    "thickness_min",
    "thickness_max",
    "grades",
    "v_min",
    "v_max",
)

# grades the bundled table treats as alloyed (slower pickling)
ALLOYED_GRADES = frozenset({"09G2S", "10HSND", "17G1S"})


@dataclass(frozen=True)
class SpeedRow:
    """Inclusive width (mm) and thickness (0.01 mm) ranges; empty grade set matches all."""

    width_min: float
    width_max: float
    thickness_min: float
    thickness_max: float
    grades: frozenset
    v_min: float
    v_max: float

    def __post_init__(self):
        if self.v_min > self.v_max:
            raise ConfigurationError(f"Speed row has v_min {self.v_min} > v_max {self.v_max}")
        if self.v_max <= 0:
            raise ConfigurationError("Speed row v_max must be positive")

    def matches(self, strip):
        return (
            self.width_min <= strip.original_width <= self.width_max
            and self.thickness_min <= strip.thickness <= self.thickness_max
            and (not self.grades or strip.grade in self.grades)
        )


class SpeedTable:
    def __init__(self, rows):
        self.rows = tuple(rows)
        if not self.rows:
            raise ConfigurationError("Speed table has no rows")

    def speed_cap(self, strip):
        """Return (v_min, v_max) for a strip."""
        matching = [row for row in self.rows if row.matches(strip)]
        if not matching:
            raise ConfigurationError(
                f"No speed table row matches grade={strip.grade} "
                f"width={strip.original_width} mm thickness={strip.thickness / 100:.2f} mm"
            )
        v_max = min(row.v_max for row in matching)
        v_min = max(row.v_min for row in matching)
        return min(v_min, v_max), v_max

    def to_frame(self):
        return pd.DataFrame(
            [
                {
                    "width_min": row.width_min,
                    "width_max": row.width_max,
                    "thickness_min": row.thickness_min,
                    "thickness_max": row.thickness_max,
                    "grades": "|".join(sorted(row.grades)),
                    "v_min": row.v_min,
                    "v_max": row.v_max,
                }
                for row in self.rows
            ],
            columns=list(TABLE_COLUMNS),
        )

    def write_csv(self, path):
        self.to_frame().to_csv(path, index=False)


def read_speed_table(path):
    """Load a speed table CSV (grades column: '|'-separated codes, empty = any)."""
    try:
        frame = pd.read_csv(path, dtype={"grades": str}, keep_default_na=False)
    except (OSError, pd.errors.ParserError) as exc:
        raise ConfigurationError(f"Cannot read speed table {path}: {exc}")
    missing = set(TABLE_COLUMNS) - set(frame.columns)
    if missing:
        raise ConfigurationError(f"Speed table {path} lacks columns {sorted(missing)}")
    rows = []
    for record in frame.to_dict("records"):
        try:
            rows.append(
                SpeedRow(
                    width_min=float(record["width_min"]),
                    width_max=float(record["width_max"]),
                    thickness_min=float(record["thickness_min"]),
                    thickness_max=float(record["thickness_max"]),
                    grades=frozenset(g for g in str(record["grades"]).split("|") if g),
                    v_min=float(record["v_min"]),
                    v_max=float(record["v_max"]),
                )
            )
        except ValueError as exc:
            raise ConfigurationError(f"Bad speed table row {record}: {exc}")
    logger.info("Loaded %d speed table rows from %s", len(rows), path)
    return SpeedTable(rows)


def default_speed_table():
    """
    Bundled synthetic table over 30-220 m/min.

    Wider, thicker and alloyed strips get lower v_max.
    """
    anything = dict(width_min=0, width_max=10000, thickness_min=0, thickness_max=100000)
    return SpeedTable(
        [
            SpeedRow(grades=frozenset(), v_min=30, v_max=220, **anything),
            SpeedRow(0, 1000, 0, 250, frozenset(), 40, 220),
            SpeedRow(1250, 10000, 0, 100000, frozenset(), 30, 190),
            SpeedRow(0, 10000, 400, 100000, frozenset(), 30, 170),
            SpeedRow(1250, 10000, 400, 100000, frozenset(), 30, 150),
            SpeedRow(grades=ALLOYED_GRADES, v_min=30, v_max=160, **anything),
            SpeedRow(0, 10000, 400, 100000, ALLOYED_GRADES, 30, 130),
        ]
    )


def load_speed_table(path=""):
    """The table at ``path``, or the bundled default when path is empty."""
    if not path:
        return default_speed_table()
    return read_speed_table(path)


def validate_speed_table(table, strips):
    """Check that every strip matches a row; raises ConfigurationError otherwise."""
    if not strips:
        raise RejectedInputError("No strips to check the speed table against")
    for strip in strips:
        table.speed_cap(strip)
