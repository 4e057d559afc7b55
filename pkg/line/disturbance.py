"""
Weld and cut time disturbances.

Every welding and cutting stop of an episode is drawn up front from a
scenario seed, so all agents replaying a scenario face the same stops.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import truncnorm

from core.exceptions import ConfigurationError

from .state import UnitRole


@dataclass(frozen=True)
class DisturbanceConfig:
    weld_mean: float = 180.0
    weld_sd: float = 30.0
    weld_min: float = 120.0
    cut_mean: float = 60.0
    cut_sd: float = 15.0
    cut_min: float = 30.0
    prediction_sd: float = 10.0
    planning_sds: float = 3.0
    presampled_events: int = 128

    def __post_init__(self):
        for name in ("weld_sd", "cut_sd", "prediction_sd", "planning_sds", "weld_min", "cut_min"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")
        if self.weld_mean <= 0 or self.cut_mean <= 0:
            raise ConfigurationError("Mean weld and cut times must be positive")
        if self.presampled_events < 1:
            raise ConfigurationError("presampled_events must be >= 1")

    @classmethod
    def from_run_config(cls, config):
        return cls(
            weld_mean=config["weld_mean"],
            weld_sd=config["weld_sd"],
            weld_min=config["weld_min"],
            cut_mean=config["cut_mean"],
            cut_sd=config["cut_sd"],
            cut_min=config["cut_min"],
            prediction_sd=config["prediction_sd"],
            planning_sds=config["planning_sds"],
            presampled_events=config["presampled_events"],
        )

    def planned_duration(self, role):
        """Duration assumed for a stop that has not started yet."""
        if role == UnitRole.FTU:
            return max(self.weld_min, self.weld_mean + self.planning_sds * self.weld_sd)
        return max(self.cut_min, self.cut_mean + self.planning_sds * self.cut_sd)


def sample_stop_times(rng, mean, sd, minimum, count):
    """Normal(mean, sd) draws truncated from below at ``minimum``; no mass sits on the bound."""
    if sd == 0:
        return np.full(count, max(mean, minimum), dtype=np.float64)
    lower = (minimum - mean) / sd
    return truncnorm.rvs(lower, np.inf, loc=mean, scale=sd, size=count, random_state=rng)


def sample_predictions(rng, true_times, sd):
    """Forecast = true time + N(0, sd), never negative."""
    return np.maximum(0.0, true_times + rng.normal(0.0, sd, size=len(true_times)))


class EventSchedule:
    """
    Pre-sampled stop durations indexed by ribbon strip index.

    Draw order is fixed (weld, cut, weld forecast, cut forecast) so a seed
    always yields the same schedule.
    """

    def __init__(self, weld, cut, weld_pred, cut_pred):
        self.weld = np.asarray(weld, dtype=np.float64)
        self.cut = np.asarray(cut, dtype=np.float64)
        self.weld_pred = np.asarray(weld_pred, dtype=np.float64)
        self.cut_pred = np.asarray(cut_pred, dtype=np.float64)
        self.count = len(self.weld)

    @classmethod
    def sample(cls, config, seed, count=None):
        count = max(config.presampled_events, count or 0)
        rng = np.random.default_rng(seed)
        weld = sample_stop_times(rng, config.weld_mean, config.weld_sd, config.weld_min, count)
        cut = sample_stop_times(rng, config.cut_mean, config.cut_sd, config.cut_min, count)
        weld_pred = sample_predictions(rng, weld, config.prediction_sd)
        cut_pred = sample_predictions(rng, cut, config.prediction_sd)
        return cls(weld, cut, weld_pred, cut_pred)

    def stop(self, role, strip_index):
        """(true duration, forecast) of the stop that follows ``strip_index``."""
        i = strip_index % self.count
        if role == UnitRole.FTU:
            return float(self.weld[i]), float(self.weld_pred[i])
        return float(self.cut[i]), float(self.cut_pred[i])

    def forecast_error(self, role, strip_index):
        true, predicted = self.stop(role, strip_index)
        return predicted - true


class PlannedStops:
    """Stop durations as a planner sees them: every stop takes its planned duration."""

    def __init__(self, config, safety_factor=1.0):
        self.durations = {
            role: config.planned_duration(role) * safety_factor for role in UnitRole
        }

    def stop(self, role, strip_index):
        duration = self.durations[role]
        return duration, duration
