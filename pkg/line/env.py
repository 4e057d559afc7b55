"""
The kinematic line environment.

Coordinates along the ribbon: X_f (FTU uncoil point), E_s (STU exit) and
E_t (TTU blades) satisfy V1 = X_f - E_s - stu_length and V2 = E_s - E_t.
Volumes are integrated from unit speeds; E_s advances with the STU.
"""

import logging
import math

from core.exceptions import ProtocolError, RejectedInputError

from .disturbance import EventSchedule, PlannedStops
from .kinematics import (
    Ribbon,
    advance_unit,
    lead_count,
    limit_stu_speed,
    project_loopers,
)
from .scenario import validate_initial_conditions
from .state import LineState, Stage, UnitRole, UnitState

logger = logging.getLogger(__name__)

DEATH = "death"
COMPLETE = "complete"
TIMEOUT = "timeout"


def initial_stage(residual, in_sync, config):
    if residual <= config.slowdown_residual:
        return Stage.SLOWDOWN
    if in_sync:
        return Stage.SYNC
    return Stage.BOOST


class LineEnv:
    """
    One line instance. Not thread-safe; run one instance per worker.

    ``step`` mutates and returns the live state; use ``state.copy()`` to keep
    a snapshot.
    """

    def __init__(self, config, disturbance, speed_table):
        self.config = config
        self.disturbance = disturbance
        self.speed_table = speed_table
        self.ribbon = None
        self.schedule = None
        self.state = None
        self.last_speeds = (0.0, 0.0, 0.0)
        self._braking_stops = PlannedStops(disturbance, 1.0)

    def reset(self, queue, initial, disturbance_seed):
        """
        Load a strip queue and place the line in its initial conditions.

        Raises:
            ConfigurationError: if the initial conditions are out of bounds or a
                strip has no speed-table row
        """
        config = self.config
        queue = tuple(queue)
        if not queue:
            raise RejectedInputError("An episode needs at least one strip")
        if len(queue) != config.episode_strips:
            logger.debug("Queue of %d strips (configured %d)", len(queue), config.episode_strips)
        lengths = [strip.length for strip in queue]
        validate_initial_conditions(initial, config, lengths[0])
        caps = [self.speed_table.speed_cap(strip) for strip in queue]

        stopped = initial.ftu_weld_remaining > 0
        unrolled = 0.0 if stopped else lengths[0] - initial.ftu_residual
        downstream = config.stu_length + initial.looper1 + initial.looper2
        lead = lead_count(lengths, downstream - unrolled)
        ribbon = Ribbon(lengths, caps, lead)

        count = ribbon.last_queue_index + 2 * len(queue) + 1
        self.schedule = EventSchedule.sample(self.disturbance, disturbance_seed, count)
        self.ribbon = ribbon

        if stopped:
            true_total = initial.ftu_weld_remaining
            error = self.schedule.forecast_error(UnitRole.FTU, lead - 1)
            ftu = UnitState(
                speed=0.0,
                stage=Stage.STOPPED,
                residual=0.0,
                strip_index=lead - 1,
                stop_total=true_total,
                stop_predicted=max(0.0, true_total + error),
            )
        else:
            ftu = UnitState(
                speed=initial.ftu_speed,
                stage=initial_stage(
                    initial.ftu_residual, initial.looper1 >= config.looper1_sync, config
                ),
                residual=initial.ftu_residual,
                strip_index=lead,
            )

        x_f = ribbon.start(lead) + unrolled
        e_s = x_f - config.stu_length - initial.looper1
        e_t = e_s - initial.looper2
        ttu_index = ribbon.index_at(e_t)
        ttu_residual = ribbon.end(ttu_index) - e_t
        ttu = UnitState(
            speed=initial.ttu_speed,
            stage=initial_stage(ttu_residual, initial.looper2 <= config.looper2_sync, config),
            residual=ttu_residual,
            strip_index=ttu_index,
        )
        self.state = LineState(
            config=config,
            time=0,
            ftu=ftu,
            ttu=ttu,
            stu_speed=float(initial.stu_speed),
            v1=float(initial.looper1),
            v2=float(initial.looper2),
            stu_position=e_s,
            strips_in_stu=ribbon.strips_between(e_s, e_s + config.stu_length),
            queue=queue,
            ribbon=ribbon,
        )
        logger.debug(
            "Reset line: %d strips, %d lead strips, seed %s", len(queue), lead, disturbance_seed
        )
        return self.state

    def speed_cap(self, state=None):
        state = state or self.state
        return self.ribbon.cap_between(state.strips_in_stu)

    def project(self, state, candidate, horizon, stops=None, safety_factor=1.0, limits=None):
        """Looper extremes at a constant STU speed; see ``kinematics.project_loopers``."""
        return project_loopers(
            state,
            candidate,
            horizon,
            stops or self._braking_stops,
            safety_factor=safety_factor,
            limits=limits,
        )

    def step(self, command):
        """
        Advance the line by one second under an STU speed command (m/min).

        Returns:
            (state, events) where events is a list of event names

        Raises:
            ProtocolError: if the episode already ended
            RejectedInputError: if the command is negative or not finite
        """
        state = self.state
        if state is None:
            raise ProtocolError("step() called before reset()")
        if state.terminal:
            raise ProtocolError(f"step() called on a terminal state ({state.cause})")
        if not math.isfinite(command) or command < 0:
            raise RejectedInputError(f"STU speed command must be finite and >= 0, got {command}")
        config = self.config
        events = []

        cap_min, cap_max = self.ribbon.cap_between(state.strips_in_stu)
        previous = state.stu_speed
        speed = limit_stu_speed(command, previous, cap_min, cap_max, config.ramp_limit)
        if config.emergency_braking:
            low1, high2 = self.project(
                state,
                speed,
                config.braking_horizon,
                limits=(config.looper1_lower, config.looper2_upper),
            )
            if low1 <= config.looper1_lower or high2 >= config.looper2_upper:
                braked = max(cap_min, min(speed, previous - config.ramp_limit))
                if braked < speed:
                    events.append("emergency_braking")
                    logger.debug("t=%d emergency braking %.2f -> %.2f", state.time, speed, braked)
                    speed = braked

        ftu_was_stopped = state.ftu.stage == Stage.STOPPED
        ttu_was_stopped = state.ttu.stage == Stage.STOPPED
        d_f, ftu_done = advance_unit(
            state.ftu, UnitRole.FTU, speed, state.v1, config, self.ribbon, self.schedule
        )
        d_t, ttu_done = advance_unit(
            state.ttu, UnitRole.TTU, speed, state.v2, config, self.ribbon, self.schedule
        )
        ftu_speed = d_f * 60.0
        ttu_speed = d_t * 60.0
        state.v1 += (ftu_speed - speed) / 60.0
        state.v2 += (speed - ttu_speed) / 60.0
        state.stu_speed = speed
        state.stu_position += speed / 60.0
        state.strips_in_stu = self.ribbon.strips_between(
            state.stu_position, state.stu_position + config.stu_length
        )
        state.time += 1
        self.last_speeds = (ftu_speed, speed, ttu_speed)

        if ftu_was_stopped and state.ftu.stage != Stage.STOPPED:
            events.append("weld_end")
        if ftu_done >= 0:
            events.append("weld_start")
        if ttu_was_stopped and state.ttu.stage != Stage.STOPPED:
            events.append("cut_end")
        if ttu_done >= 0:
            events.append("cut_start")

        if state.v1 <= config.looper1_lower or state.v2 >= config.looper2_upper:
            state.terminal, state.cause = True, DEATH
        elif ttu_done >= self.ribbon.last_queue_index:
            state.terminal, state.cause = True, COMPLETE
        elif state.time >= config.max_steps:
            state.terminal, state.cause = True, TIMEOUT
        if state.terminal:
            events.append(state.cause)
            logger.debug("Episode ended at t=%d: %s", state.time, state.cause)
        return state, events
