"""
Fidelity of generated strips against real ones.

Two-sample Kolmogorov-Smirnov statistics on every numeric column, on the
absolute differences between consecutive widths and thicknesses, and the
total-variation distance between grade frequencies.
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.stats import ks_2samp

from core.exceptions import RejectedInputError
from strips.domain import NUMERIC_COLUMNS, strips_to_matrix


@dataclass(frozen=True)
class FidelityReport:
    column_ks: dict
    adjacent_ks: dict
    grade_total_variation: float

    @property
    def worst_column_ks(self):
        return max(self.column_ks.values())

    def to_frame(self):
        rows = [{"metric": f"ks.{name}", "value": value} for name, value in self.column_ks.items()]
        rows += [
            {"metric": f"ks.adjacent.{name}", "value": value}
            for name, value in self.adjacent_ks.items()
        ]
        rows.append({"metric": "tv.grade_frequency", "value": self.grade_total_variation})
        return pd.DataFrame(rows, columns=["metric", "value"])

    def write_csv(self, path):
        self.to_frame().to_csv(path, index=False, float_format="%.17g")


def ks_statistic(a, b):
    result = ks_2samp(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64))
    return float(result.statistic)


def grade_total_variation(real, generated):
    """Half the L1 distance between the grade frequency vectors."""
    real_counts = pd.Series([s.grade for s in real]).value_counts(normalize=True)
    generated_counts = pd.Series([s.grade for s in generated]).value_counts(normalize=True)
    joined = pd.concat([real_counts, generated_counts], axis=1).fillna(0.0)
    return float(0.5 * np.abs(joined.iloc[:, 0] - joined.iloc[:, 1]).sum())


def evaluate_fidelity(real, generated):
    if not real or not generated:
        raise RejectedInputError("Fidelity needs non-empty real and generated strip sets")
    real_matrix = strips_to_matrix(real)
    generated_matrix = strips_to_matrix(generated)
    column_ks = {
        name: ks_statistic(real_matrix[:, j], generated_matrix[:, j])
        for j, name in enumerate(NUMERIC_COLUMNS)
    }
    adjacent_ks = {}
    for name in ("original_width", "thickness"):
        j = NUMERIC_COLUMNS.index(name)
        real_diff = np.abs(np.diff(real_matrix[:, j]))
        generated_diff = np.abs(np.diff(generated_matrix[:, j]))
        # a single strip has no neighbour
        if len(real_diff) and len(generated_diff):
            adjacent_ks[name] = ks_statistic(real_diff, generated_diff)
    return FidelityReport(
        column_ks=column_ks,
        adjacent_ks=adjacent_ks,
        grade_total_variation=grade_total_variation(real, generated),
    )
