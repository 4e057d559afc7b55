"""
Dataset directory: strips, vocabulary and stats as versioned text files.

Layout::

    <dir>/manifest.json     format version and file names
    <dir>/strips.csv        one strip per row, processing order
    <dir>/vocabulary.json   grades in id order (END implicit, last)
    <dir>/stats.csv         mean, sd, minimum, maximum per numeric column
"""

import json
import logging
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
import pandas as pd

from core.exceptions import CheckpointError

from .domain import NUMERIC_COLUMNS, GradeVocabulary, StandardizationStats, Strip

logger = logging.getLogger(__name__)

DATASET_VERSION = 1
STRIP_COLUMNS = [f.name for f in fields(Strip)]


@dataclass
class Dataset:
    strips: list
    vocabulary: GradeVocabulary
    stats: StandardizationStats = None


def strips_to_frame(strips):
    return pd.DataFrame([strip.as_dict() for strip in strips], columns=STRIP_COLUMNS)


def frame_to_strips(frame):
    strips = []
    for record in frame.to_dict("records"):
        strips.append(
            Strip(
                grade=str(record["grade"]),
                original_width=int(record["original_width"]),
                resulting_width=int(record["resulting_width"]),
                thickness=int(record["thickness"]),
                weight=int(record["weight"]),
                coiling_temperature=float(record["coiling_temperature"]),
                strips_in_resulting_coil=float(record["strips_in_resulting_coil"]),
                length=float(record["length"]),
            )
        )
    return strips


def write_strips_csv(strips, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    strips_to_frame(strips).to_csv(path, index=False, float_format="%.17g")
    return path


def read_strips_csv(path):
    return frame_to_strips(pd.read_csv(path, dtype={"grade": str}, keep_default_na=False))


def write_dataset(directory, dataset):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_strips_csv(dataset.strips, directory / "strips.csv")
    (directory / "vocabulary.json").write_text(
        json.dumps({"grades": list(dataset.vocabulary.grades)}, indent=2)
    )
    manifest = {
        "format_version": DATASET_VERSION,
        "strips": "strips.csv",
        "vocabulary": "vocabulary.json",
        "stats": None,
        "count": len(dataset.strips),
    }
    if dataset.stats is not None:
        stats_frame = pd.DataFrame(
            {
                "column": list(dataset.stats.columns),
                "mean": dataset.stats.mean,
                "sd": dataset.stats.sd,
                "minimum": dataset.stats.minimum,
                "maximum": dataset.stats.maximum,
            }
        )
        stats_frame.to_csv(directory / "stats.csv", index=False, float_format="%.17g")
        manifest["stats"] = "stats.csv"
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    logger.info("Wrote dataset of %d strips to %s", len(dataset.strips), directory)
    return directory


def read_dataset(directory):
    directory = Path(directory)
    try:
        manifest = json.loads((directory / "manifest.json").read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"Cannot read dataset manifest in {directory}: {exc}")
    if manifest.get("format_version") != DATASET_VERSION:
        raise CheckpointError(
            f"Unsupported dataset version {manifest.get('format_version')} in {directory}"
        )
    strips = read_strips_csv(directory / manifest["strips"])
    grades = json.loads((directory / manifest["vocabulary"]).read_text())["grades"]
    vocabulary = GradeVocabulary(grades)
    stats = None
    if manifest.get("stats"):
        frame = pd.read_csv(directory / manifest["stats"])
        if list(frame["column"]) != list(NUMERIC_COLUMNS):
            raise CheckpointError(f"Stats columns in {directory} do not match the strip schema")
        stats = StandardizationStats(
            mean=frame["mean"].to_numpy(np.float64),
            sd=frame["sd"].to_numpy(np.float64),
            minimum=frame["minimum"].to_numpy(np.float64),
            maximum=frame["maximum"].to_numpy(np.float64),
        )
    return Dataset(strips=strips, vocabulary=vocabulary, stats=stats)
