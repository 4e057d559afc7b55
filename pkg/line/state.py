"""
State types of the kinematic line twin.

Units are metres, metres per minute and seconds throughout. Looper volumes
are the primary state; unit coordinates along the welded ribbon follow from
them (see ``line.env``).
"""

from dataclasses import dataclass, field, replace
from enum import IntEnum

from core.exceptions import ConfigurationError, RejectedInputError


class Stage(IntEnum):
    BOOST = 0
    SYNC = 1
    SLOWDOWN = 2
    STOPPED = 3


class UnitRole(IntEnum):
    FTU = 0
    TTU = 1


ALL_COMBINATIONS = tuple(f"{f}{t}" for f in range(4) for t in range(4))


def combination_code(ftu_stage, ttu_stage):
    """'FTU stage digit' + 'TTU stage digit', e.g. '03'."""
    return f"{int(ftu_stage)}{int(ttu_stage)}"


def has_stop(code):
    return "3" in code


@dataclass(frozen=True)
class LineConfig:
    """Plant parameters of the line."""

    looper1_lower: float = 20.0
    looper1_upper: float = 400.0
    looper2_lower: float = 10.0
    looper2_upper: float = 200.0
    sync_threshold_fraction: float = 0.1
    sync_hysteresis: float = 1.0
    ftu_max_speed: float = 250.0
    ttu_max_speed: float = 250.0
    ramp_limit: float = 10.0
    slowdown_residual: float = 50.0
    slowdown_speed: float = 30.0
    stu_length: float = 300.0
    emergency_braking: bool = True
    braking_horizon: int = 30
    max_steps: int = 40000
    episode_strips: int = 20

    def __post_init__(self):
        if not self.looper1_lower < self.looper1_upper:
            raise ConfigurationError("looper1 lower bound must be below its upper bound")
        if not self.looper2_lower < self.looper2_upper:
            raise ConfigurationError("looper2 lower bound must be below its upper bound")
        if self.looper2_upper - self.looper2_lower >= self.looper1_upper - self.looper1_lower:
            raise ConfigurationError("The second looper must be smaller than the first one")
        if not 0.0 < self.sync_threshold_fraction < 0.5:
            raise ConfigurationError("sync_threshold_fraction must lie in (0, 0.5)")
        if self.sync_hysteresis < 0:
            raise ConfigurationError("sync_hysteresis must be >= 0")
        if self.ramp_limit <= 0 or self.slowdown_speed <= 0:
            raise ConfigurationError("ramp_limit and slowdown_speed must be positive")
        if self.ftu_max_speed <= 0 or self.ttu_max_speed <= 0:
            raise ConfigurationError("Unit maximum speeds must be positive")
        if self.stu_length <= 0 or self.slowdown_residual < 0:
            raise ConfigurationError("stu_length must be positive, slowdown_residual >= 0")
        if self.braking_horizon < 1 or self.max_steps < 1 or self.episode_strips < 1:
            raise ConfigurationError("braking_horizon, max_steps and episode_strips must be >= 1")

    @classmethod
    def from_run_config(cls, config):
        return cls(
            looper1_lower=config["looper1_lower"],
            looper1_upper=config["looper1_upper"],
            looper2_lower=config["looper2_lower"],
            looper2_upper=config["looper2_upper"],
            sync_threshold_fraction=config["sync_threshold_fraction"],
            sync_hysteresis=config["sync_hysteresis"],
            ftu_max_speed=config["ftu_max_speed"],
            ttu_max_speed=config["ttu_max_speed"],
            ramp_limit=config["ramp_limit"],
            slowdown_residual=config["slowdown_residual"],
            slowdown_speed=config["slowdown_speed"],
            stu_length=config["stu_length"],
            emergency_braking=config["emergency_braking"],
            braking_horizon=config["braking_horizon"],
            max_steps=config["max_steps"],
            episode_strips=config["episode_strips"],
        )

    @property
    def looper1_sync(self):
        """FTU is forced into sync at or above this volume."""
        span = self.looper1_upper - self.looper1_lower
        return self.looper1_upper - self.sync_threshold_fraction * span

    @property
    def looper2_sync(self):
        """TTU is forced into sync at or below this volume."""
        span = self.looper2_upper - self.looper2_lower
        return self.looper2_lower + self.sync_threshold_fraction * span

    @property
    def looper2_mid(self):
        return 0.5 * (self.looper2_lower + self.looper2_upper)


@dataclass(frozen=True)
class LooperState:
    volume: float
    lower: float
    upper: float
    sync_threshold: float

    @property
    def midpoint(self):
        return 0.5 * (self.lower + self.upper)


@dataclass(slots=True)
class UnitState:
    """
    One transport unit (FTU or TTU).

    ``residual`` is the length left to unroll (FTU) or left before the
    blades (TTU). While stopped, ``stop_total`` is the duration the unit
    will actually stay stopped and ``stop_predicted`` the forecast seen by
    the agents.
    """

    speed: float = 0.0
    stage: Stage = Stage.BOOST
    residual: float = 0.0
    strip_index: int = 0
    stop_elapsed: int = 0
    stop_total: float = 0.0
    stop_predicted: float = 0.0

    @property
    def process_timer(self):
        if self.stage != Stage.STOPPED:
            return 0.0
        return max(0.0, self.stop_total - self.stop_elapsed)

    @property
    def predicted_time_left(self):
        if self.stage != Stage.STOPPED:
            return 0.0
        return max(0.0, self.stop_predicted - self.stop_elapsed)

    def copy(self):
        return replace(self)


@dataclass
class LineState:
    """Full state of the line at one time step."""

    config: LineConfig
    time: int
    ftu: UnitState
    ttu: UnitState
    stu_speed: float
    v1: float
    v2: float
    stu_position: float
    strips_in_stu: tuple
    queue: tuple = field(repr=False)
    ribbon: object = field(default=None, repr=False)
    terminal: bool = False
    cause: str = ""

    @property
    def looper1(self):
        c = self.config
        return LooperState(self.v1, c.looper1_lower, c.looper1_upper, c.looper1_sync)

    @property
    def looper2(self):
        c = self.config
        return LooperState(self.v2, c.looper2_lower, c.looper2_upper, c.looper2_sync)

    @property
    def t_w_pred(self):
        return self.ftu.predicted_time_left

    @property
    def t_c_pred(self):
        return self.ttu.predicted_time_left

    @property
    def combination(self):
        return combination_code(self.ftu.stage, self.ttu.stage)

    def symbols(self):
        """Every state-vector symbol by name."""
        return {
            "V_f": self.v1,
            "V_s": self.v2,
            "v_f": self.ftu.speed,
            "v_s": self.stu_speed,
            "v_t": self.ttu.speed,
            "t_W_pred": self.t_w_pred,
            "L_f": self.ftu.residual,
            "L_t": self.ttu.residual,
        }

    def state_vector(self):
        """(V_f, V_s, v_f, v_s, v_t, t_W_pred, L_f, L_t)."""
        return tuple(self.symbols().values())

    def copy(self):
        return replace(self, ftu=self.ftu.copy(), ttu=self.ttu.copy())


def stage_combination(state):
    return state.combination


def predicted_time_left(state, role=UnitRole.FTU):
    """t_W_pred for the FTU, t_C_pred for the TTU."""
    unit = state.ftu if role == UnitRole.FTU else state.ttu
    return unit.predicted_time_left


def cycle_time(length, speed, process_time=0.0):
    """Seconds to run ``length`` metres at ``speed`` m/min plus a stop of ``process_time`` s."""
    if speed <= 0:
        raise RejectedInputError("cycle_time needs a positive speed")
    return 60.0 * length / speed + process_time


def cycle_times(state, weld_time=0.0, cut_time=0.0):
    """
    Per-strip cycle durations (t_f, t_t) in seconds.

    A stopped unit contributes its remaining stop time only.
    """

    def one(unit, process_time):
        if unit.stage == Stage.STOPPED:
            return unit.process_timer
        return cycle_time(unit.residual, unit.speed, process_time)

    return one(state.ftu, weld_time), one(state.ttu, cut_time)
