"""
Kinematics shared by the line environment and the looper projection.

Both the environment step and ``project_loopers`` advance units through
``advance_unit``; given the same stop durations they produce the same
trajectory to the last bit.
"""

from bisect import bisect_right
from math import inf

from .state import Stage, UnitRole

BOOST = Stage.BOOST
SYNC = Stage.SYNC
SLOWDOWN = Stage.SLOWDOWN
STOPPED = Stage.STOPPED
FTU = UnitRole.FTU


class Ribbon:
    """
    The welded ribbon of strips as coordinates along the line.

    Ribbon index ``lead`` is the first strip of the episode queue. Indices
    below it are copies of the queue's last strips (steel already downstream
    at reset), indices past the queue repeat it cyclically.
    """

    def __init__(self, lengths, caps, lead):
        if not lengths or len(lengths) != len(caps):
            raise ValueError("Ribbon needs one cap per strip length")
        self.lengths = tuple(float(x) for x in lengths)
        self.caps = tuple(caps)
        self.lead = lead
        self.n = len(self.lengths)
        self._starts = [0.0]

    @property
    def last_queue_index(self):
        return self.lead + self.n - 1

    def queue_index(self, index):
        return (index - self.lead) % self.n

    def length(self, index):
        return self.lengths[(index - self.lead) % self.n]

    def cap(self, index):
        return self.caps[(index - self.lead) % self.n]

    def _extend_to(self, count):
        starts = self._starts
        while len(starts) <= count:
            starts.append(starts[-1] + self.length(len(starts) - 1))

    def start(self, index):
        self._extend_to(index + 1)
        return self._starts[index]

    def end(self, index):
        return self.start(index + 1)

    def index_at(self, position):
        """Index of the strip covering ``position`` (start inclusive)."""
        while self._starts[-1] <= position:
            self._extend_to(len(self._starts))
        return max(0, bisect_right(self._starts, position) - 1)

    def strips_between(self, lower, upper):
        index = self.index_at(lower)
        found = [index]
        index += 1
        while self.start(index) < upper:
            found.append(index)
            index += 1
        return tuple(found)

    def cap_between(self, indices):
        """(cap_min, cap_max) over several strips; the tightest v_max wins."""
        cap_min = max(self.cap(i)[0] for i in indices)
        cap_max = min(self.cap(i)[1] for i in indices)
        return min(cap_min, cap_max), cap_max


def lead_count(lengths, needed):
    """Smallest number (at least one) of trailing queue strips covering ``needed`` metres."""
    total = 0.0
    count = 0
    n = len(lengths)
    while count < 1 or total < needed:
        count += 1
        total += lengths[(n - count) % n]
    return count


def ramp_toward(speed, target, ramp):
    if speed < target:
        return min(speed + ramp, target)
    return max(speed - ramp, target)


def limit_stu_speed(command, previous, cap_min, cap_max, ramp):
    """Clamp a command by the ramp limit, then by the speed-table cap."""
    speed = min(max(command, previous - ramp), previous + ramp)
    return min(max(speed, cap_min), cap_max)


def ttu_drain_target(unit, stu_speed, volume, config):
    """TTU speed that brings looper2 back to its midpoint by the next cut."""
    minutes = max(unit.residual / max(stu_speed, 1.0), 1.0 / 60.0)
    target = stu_speed + (volume - config.looper2_mid) / minutes
    return min(max(target, config.slowdown_speed), config.ttu_max_speed)


def advance_unit(unit, role, stu_speed, volume, config, ribbon, stops):
    """
    Advance one unit by one second, mutating ``unit``.

    ``volume`` is the adjacent looper volume at the start of the step and
    ``stops`` gives (true, forecast) durations of the stop after a strip.

    Returns:
        (metres moved, index of the strip finished this step or -1)
    """
    if unit.stage == STOPPED:
        unit.stop_elapsed += 1
        if unit.stop_elapsed < unit.stop_total:
            return 0.0, -1
        unit.strip_index += 1
        unit.residual = ribbon.length(unit.strip_index)
        unit.stage = BOOST
        unit.speed = 0.0
        unit.stop_elapsed = 0
        unit.stop_total = 0.0
        unit.stop_predicted = 0.0

    if role == FTU:
        threshold = config.looper1_sync
        if unit.stage == SYNC:
            threshold -= config.sync_hysteresis
        in_sync = volume >= threshold
        max_speed = config.ftu_max_speed
    else:
        threshold = config.looper2_sync
        if unit.stage == SYNC:
            threshold += config.sync_hysteresis
        in_sync = volume <= threshold
        max_speed = config.ttu_max_speed

    if unit.residual <= config.slowdown_residual:
        stage = SLOWDOWN
        speed = ramp_toward(unit.speed, config.slowdown_speed, config.ramp_limit)
        if in_sync and speed > stu_speed:
            speed = stu_speed
    elif in_sync:
        stage = SYNC
        speed = min(stu_speed, max_speed)
    else:
        stage = BOOST
        if role == FTU:
            target = max_speed
        else:
            target = ttu_drain_target(unit, stu_speed, volume, config)
        speed = ramp_toward(unit.speed, target, config.ramp_limit)

    distance = speed / 60.0
    if distance >= unit.residual:
        distance = unit.residual
        finished = unit.strip_index
        total, predicted = stops.stop(role, finished)
        unit.residual = 0.0
        unit.stage = STOPPED
        unit.speed = 0.0
        unit.stop_elapsed = 0
        unit.stop_total = total
        unit.stop_predicted = predicted
        return distance, finished

    unit.residual -= distance
    unit.stage = stage
    unit.speed = speed
    return distance, -1


def planned_unit(unit, safety_factor):
    """Copy of a unit whose ongoing stop lasts its forecast times the safety factor."""
    copy = unit.copy()
    if copy.stage == STOPPED:
        copy.stop_total = safety_factor * copy.stop_predicted
    return copy


def project_loopers(state, candidate, horizon, stops, safety_factor=1.0, limits=None):
    """
    Looper extremes over the next ``horizon`` seconds at a constant STU speed.

    Ongoing stops last their forecast scaled by ``safety_factor``; future
    stops take the durations ``stops`` plans for them. With ``limits`` =
    (V1 floor, V2 ceiling) the projection returns as soon as one is crossed.

    Returns:
        (min V1, max V2) over steps 1..horizon
    """
    config = state.config
    ribbon = state.ribbon
    ftu = planned_unit(state.ftu, safety_factor)
    ttu = planned_unit(state.ttu, safety_factor)
    v1 = state.v1
    v2 = state.v2
    low1 = inf
    high2 = -inf
    floor1, ceiling2 = limits if limits is not None else (-inf, inf)
    for _ in range(horizon):
        d_f, _ = advance_unit(ftu, UnitRole.FTU, candidate, v1, config, ribbon, stops)
        d_t, _ = advance_unit(ttu, UnitRole.TTU, candidate, v2, config, ribbon, stops)
        v1 += (d_f * 60.0 - candidate) / 60.0
        v2 += (candidate - d_t * 60.0) / 60.0
        if v1 < low1:
            low1 = v1
        if v2 > high2:
            high2 = v2
        if low1 < floor1 or high2 > ceiling2:
            break
    return low1, high2
