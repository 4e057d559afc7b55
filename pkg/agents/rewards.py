"""
Reward assembly for the RL agents.
"""

from dataclasses import dataclass

from core.exceptions import ConfigurationError, RejectedInputError

# |death penalty| must dwarf the best per-step reward
MIN_PENALTY_RATIO = 100.0


@dataclass(frozen=True)
class RewardSpec:
    action_weight: float = 1.0
    death_penalty: float = -1000.0
    proximity_weight: float = 0.0
    proximity_margin: float = 50.0

    def __post_init__(self):
        if self.death_penalty >= 0:
            raise ConfigurationError("death_penalty must be negative")
        if self.proximity_weight < 0 or self.proximity_margin <= 0:
            raise ConfigurationError("proximity weight must be >= 0 and margin > 0")

    @classmethod
    def for_variant(cls, variant, config):
        """Reward spec of a variant; proximity counts only where the variant uses it."""
        spec = cls(
            action_weight=config["rl_action_weight"],
            death_penalty=config["rl_death_penalty"],
            proximity_weight=config["rl_proximity_weight"] if variant.uses_proximity else 0.0,
            proximity_margin=config["rl_proximity_margin"],
        )
        spec.check_penalty_ratio(max(abs(a) for a in variant.actions))
        return spec

    def check_penalty_ratio(self, largest_delta):
        best = self.action_weight * largest_delta
        if best > 0 and abs(self.death_penalty) / best < MIN_PENALTY_RATIO:
            raise ConfigurationError(
                f"Death penalty {self.death_penalty} is less than {MIN_PENALTY_RATIO:.0f}x "
                f"the best per-step reward {best}"
            )


def proximity_penalty(v1, v2, line_config, spec):
    """Grows linearly from 0 at ``proximity_margin`` metres to 1 at each looper bound."""
    d1 = v1 - line_config.looper1_lower
    d2 = line_config.looper2_upper - v2
    return max(0.0, 1.0 - d1 / spec.proximity_margin) + max(0.0, 1.0 - d2 / spec.proximity_margin)


def step_reward(applied_speed, base_speed, v1, v2, line_config, spec):
    """
    Reward of one second: the speed the RL delta actually added on top of the
    C-Agent, minus the boundary proximity term.
    """
    reward = spec.action_weight * (applied_speed - base_speed)
    if spec.proximity_weight:
        reward -= spec.proximity_weight * proximity_penalty(v1, v2, line_config, spec)
    return reward


def accumulate_reward(step_rewards, aggregation, died=False, spec=None):
    """
    Aggregate per-step rewards of one window; death adds the penalty once.

    Raises:
        RejectedInputError: on an empty window or unknown aggregation
    """
    if len(step_rewards) < 1:
        raise RejectedInputError("A reward window needs at least one step")
    total = float(sum(step_rewards))
    if aggregation == "sum":
        value = total
    elif aggregation == "mean":
        value = total / len(step_rewards)
    else:
        raise RejectedInputError(f"Unknown reward aggregation '{aggregation}'")
    if died:
        value += (spec or RewardSpec()).death_penalty
    return value
