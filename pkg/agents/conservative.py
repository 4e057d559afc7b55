"""
The conservative agent (C-Agent).

Every second it picks the highest integer STU speed whose constant-speed
looper projection stays inside both margined looper bounds.
"""

import logging
import math
from dataclasses import dataclass

from core.exceptions import ConfigurationError, ProtocolError
from line.disturbance import PlannedStops
from line.kinematics import limit_stu_speed, project_loopers

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CAgentConfig:
    margin: float = 15.0
    horizon: int = 300
    safety_factor: float = 1.2
    ramp_limit: float = 10.0
    grid_step: float = 1.0

    def __post_init__(self):
        if self.margin < 0:
            raise ConfigurationError("C-Agent margin must be >= 0")
        if self.horizon < 1:
            raise ConfigurationError("C-Agent horizon must be >= 1 s")
        if self.safety_factor <= 0 or self.grid_step <= 0 or self.ramp_limit <= 0:
            raise ConfigurationError(
                "C-Agent safety_factor, grid_step and ramp_limit must be positive"
            )

    @classmethod
    def from_run_config(cls, config):
        return cls(
            margin=config["c_margin"],
            horizon=config["c_horizon"],
            safety_factor=config["c_safety_factor"],
            ramp_limit=config["ramp_limit"],
            grid_step=config["c_grid_step"],
        )


def margined_limits(state, config):
    line = state.config
    return line.looper1_lower + config.margin, line.looper2_upper - config.margin


def candidate_speeds(state, config):
    """Grid speeds reachable in one step, ascending, inside the speed-table cap."""
    cap_min, cap_max = state.ribbon.cap_between(state.strips_in_stu)
    previous = state.stu_speed
    lowest = limit_stu_speed(0.0, previous, cap_min, cap_max, config.ramp_limit)
    highest = limit_stu_speed(math.inf, previous, cap_min, cap_max, config.ramp_limit)
    step = config.grid_step
    first = math.ceil(lowest / step - 1e-9)
    last = math.floor(highest / step + 1e-9)
    speeds = [k * step for k in range(first, last + 1)]
    return speeds or [lowest]


class ConservativeAgent:
    """
    Stateless between calls: the recommendation depends on (state, config) only.
    """

    def __init__(self, config, disturbance):
        self.config = config
        self.stops = PlannedStops(disturbance, config.safety_factor)

    def project(self, state, candidate, limits=None):
        return project_loopers(
            state,
            candidate,
            self.config.horizon,
            self.stops,
            safety_factor=self.config.safety_factor,
            limits=limits,
        )

    def is_feasible(self, state, candidate):
        floor1, ceiling2 = margined_limits(state, self.config)
        low1, high2 = self.project(state, candidate, limits=(floor1, ceiling2))
        return low1 >= floor1 and high2 <= ceiling2

    def violation(self, state, candidate):
        """Total projected intrusion into the margined bounds (0 when feasible)."""
        floor1, ceiling2 = margined_limits(state, self.config)
        low1, high2 = self.project(state, candidate)
        return max(0.0, floor1 - low1) + max(0.0, high2 - ceiling2)

    def recommend(self, state):
        """
        Largest feasible grid speed, or the least infeasible one.

        Raises:
            ProtocolError: if the state is terminal
        """
        if state.terminal:
            raise ProtocolError("No recommendation for a terminal state")
        speeds = candidate_speeds(state, self.config)
        if self.is_feasible(state, speeds[-1]):
            return speeds[-1]
        if not self.is_feasible(state, speeds[0]):
            best, best_violation = speeds[0], math.inf
            for speed in speeds:
                amount = self.violation(state, speed)
                if amount < best_violation:
                    best, best_violation = speed, amount
            logger.debug(
                "t=%d no feasible STU speed, least violation %.3f m at %.1f",
                state.time,
                best_violation,
                best,
            )
            return best

        # speeds[lo] is feasible, speeds[hi] is not
        lo, hi = 0, len(speeds) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.is_feasible(state, speeds[mid]):
                lo = mid
            else:
                hi = mid
        return speeds[lo]

    __call__ = recommend


def recommend_speed(state, config, disturbance):
    return ConservativeAgent(config, disturbance).recommend(state)
