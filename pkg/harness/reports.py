"""
Report export.

Schema (version 1), one row per agent x combination x statistic:

    agent        agent name (c, c_per_stage, p_coop, f_coop)
    combination  two-digit stage combination code, or "all"
    statistic    episodes, deaths, death_rate, speed_min, speed_q1,
                 speed_median, speed_q3, speed_max, speed_mean,
                 surplus_vs_c_per_stage, surplus_vs_c,
                 objective_{sum,mean}_{mean,median}
    value        float

Delimited output is ``report.csv``; structured output is ``report.json``
holding the schema version, the column names and the rows.
"""

import json
import logging
from pathlib import Path

import pandas as pd

from core.exceptions import CheckpointError, ConfigurationError

from .evaluation import MetricsReport

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
REPORT_COLUMNS = ("agent", "combination", "statistic", "value")
FORMATS = ("delimited", "structured")
FILE_NAMES = {"delimited": "report.csv", "structured": "report.json"}


def report_frame(report):
    return pd.DataFrame(report.rows, columns=list(REPORT_COLUMNS))


def export_report(report, directory, formats=FORMATS):
    """
    Write the report in the requested formats.

    Raises:
        ConfigurationError: if the destination cannot be written
    """
    directory = Path(directory)
    written = []
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for name in formats:
            if name not in FORMATS:
                raise ConfigurationError(f"Unknown report format '{name}'")
            path = directory / FILE_NAMES[name]
            if name == "delimited":
                report_frame(report).to_csv(path, index=False, float_format="%.17g")
            else:
                document = {
                    "schema_version": REPORT_SCHEMA_VERSION,
                    "columns": list(REPORT_COLUMNS),
                    "rows": [list(row) for row in report.rows],
                }
                path.write_text(json.dumps(document, sort_keys=True, indent=1) + "\n")
            written.append(path)
    except OSError as exc:
        raise ConfigurationError(f"Cannot write report to {directory}: {exc}")
    logger.info("Wrote report files %s", ", ".join(str(path) for path in written))
    return written


def read_report(path):
    """Parse a report written by export_report (either format)."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Report file {path} does not exist")
    if path.suffix == ".json":
        document = json.loads(path.read_text())
        if document.get("schema_version") != REPORT_SCHEMA_VERSION:
            raise CheckpointError(f"Unsupported report schema {document.get('schema_version')!r}")
        if tuple(document.get("columns", ())) != REPORT_COLUMNS:
            raise CheckpointError(f"{path} does not have the report columns")
        rows = [(a, c, s, float(v)) for a, c, s, v in document["rows"]]
        return MetricsReport(rows)
    frame = pd.read_csv(path, dtype={"agent": str, "combination": str, "statistic": str})
    if tuple(frame.columns) != REPORT_COLUMNS:
        raise CheckpointError(f"{path} does not have the report columns")
    rows = [
        (agent, combination, statistic, float(value))
        for agent, combination, statistic, value in frame.itertuples(index=False)
    ]
    return MetricsReport(rows)


def death_table(report):
    """Deaths per agent (rows) and stage combination (columns), plus the totals."""
    counts = report.table("deaths")
    frame = pd.DataFrame(counts).T.fillna(0).astype(int)
    return frame.reindex(sorted(frame.columns), axis=1)


def surplus_frame(report):
    rows = []
    for statistic in ("surplus_vs_c_per_stage", "surplus_vs_c"):
        for agent, values in sorted(report.table(statistic).items()):
            rows.append({"agent": agent, "baseline": statistic[len("surplus_vs_"):], **values})
    return pd.DataFrame(rows)
