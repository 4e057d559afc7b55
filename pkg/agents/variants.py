"""
RL agent variants and state normalization.

Two variants differ in network shape, observed state fields, action set,
reward contributors and the instants at which they act:

=========  ============  =================================  ========  ==========
variant    hidden        state fields                       actions   reward
=========  ============  =================================  ========  ==========
p_coop     8, 8          V_f V_s v_f v_t t_W_pred L_f L_t   0..9      sum
f_coop     32, 64, 16    V_f V_s t_W_pred L_f L_t           -5..5     mean
=========  ============  =================================  ========  ==========
"""

from dataclasses import dataclass, replace

import numpy as np

from core.exceptions import ConfigurationError
from line.state import has_stop

EVERY_SWITCH_EXCEPT_STOPS = "every_switch_except_stops"
EVERY_SWITCH_AND_PERIOD = "every_switch_and_period"

CONTRIBUTORS = ("action", "death_penalty", "boundary_proximity")


@dataclass(frozen=True)
class AgentVariantConfig:
    name: str
    hidden: tuple
    state_fields: tuple
    actions: tuple
    contributors: frozenset
    aggregation: str
    acting_policy: str
    intra_period: int = 0

    def __post_init__(self):
        if 0 not in self.actions:
            raise ConfigurationError(f"Variant {self.name} has no no-op action")
        if list(self.actions) != sorted(self.actions):
            raise ConfigurationError("Actions must be listed in ascending order")
        if self.aggregation not in ("sum", "mean"):
            raise ConfigurationError(f"Unknown reward aggregation '{self.aggregation}'")
        if not set(self.contributors) <= set(CONTRIBUTORS):
            raise ConfigurationError(f"Unknown reward contributors {set(self.contributors)}")
        if self.acting_policy == EVERY_SWITCH_AND_PERIOD and self.intra_period < 1:
            raise ConfigurationError("Periodic acting needs intra_period >= 1")

    @property
    def input_dim(self):
        return len(self.state_fields)

    @property
    def action_count(self):
        return len(self.actions)

    @property
    def uses_proximity(self):
        return "boundary_proximity" in self.contributors

    def acts_in(self, combination):
        """Whether the RL part may choose a delta in this stage combination."""
        if self.acting_policy == EVERY_SWITCH_EXCEPT_STOPS:
            return not has_stop(combination)
        return True

    def is_acting_instant(self, combination, switched, since_last_act):
        """Instants at which the C-Agent is sampled and a new command composed."""
        if switched:
            return True
        return (
            self.acting_policy == EVERY_SWITCH_AND_PERIOD
            and since_last_act >= self.intra_period
        )

    def to_dict(self):
        return {
            "name": self.name,
            "hidden": list(self.hidden),
            "state_fields": list(self.state_fields),
            "actions": list(self.actions),
            "contributors": sorted(self.contributors),
            "aggregation": self.aggregation,
            "acting_policy": self.acting_policy,
            "intra_period": self.intra_period,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            name=data["name"],
            hidden=tuple(data["hidden"]),
            state_fields=tuple(data["state_fields"]),
            actions=tuple(data["actions"]),
            contributors=frozenset(data["contributors"]),
            aggregation=data["aggregation"],
            acting_policy=data["acting_policy"],
            intra_period=data["intra_period"],
        )


P_COOP = AgentVariantConfig(
    name="p_coop",
    hidden=(8, 8),
    state_fields=("V_f", "V_s", "v_f", "v_t", "t_W_pred", "L_f", "L_t"),
    actions=tuple(range(0, 10)),
    contributors=frozenset({"action", "death_penalty"}),
    aggregation="sum",
    acting_policy=EVERY_SWITCH_EXCEPT_STOPS,
)

F_COOP = AgentVariantConfig(
    name="f_coop",
    hidden=(32, 64, 16),
    state_fields=("V_f", "V_s", "t_W_pred", "L_f", "L_t"),
    actions=tuple(range(-5, 6)),
    contributors=frozenset({"action", "death_penalty", "boundary_proximity"}),
    aggregation="mean",
    acting_policy=EVERY_SWITCH_AND_PERIOD,
    intra_period=30,
)

VARIANTS = {"p_coop": P_COOP, "f_coop": F_COOP}


def get_variant(name, intra_period=None):
    """Look up a variant; dashes are accepted (``f-coop``)."""
    key = name.replace("-", "_").lower()
    try:
        variant = VARIANTS[key]
    except KeyError:
        raise ConfigurationError(f"Unknown RL variant '{name}' (choose p_coop or f_coop)")
    if intra_period is not None and variant.acting_policy == EVERY_SWITCH_AND_PERIOD:
        variant = replace(variant, intra_period=intra_period)
    return variant


def state_ranges(line_config, disturbance, length_max):
    """Physical range of every state symbol, used to map it onto [0, 1]."""
    top_speed = max(line_config.ftu_max_speed, line_config.ttu_max_speed)
    return {
        "V_f": (line_config.looper1_lower, line_config.looper1_upper),
        "V_s": (line_config.looper2_lower, line_config.looper2_upper),
        "v_f": (0.0, line_config.ftu_max_speed),
        "v_s": (0.0, top_speed),
        "v_t": (0.0, line_config.ttu_max_speed),
        "t_W_pred": (0.0, disturbance.weld_mean + 4.0 * disturbance.weld_sd),
        "L_f": (0.0, float(length_max)),
        "L_t": (0.0, float(length_max)),
    }


class StateNormalizer:
    """Affine map of selected state symbols onto [0, 1]; out-of-range values are clamped."""

    def __init__(self, variant, ranges):
        missing = set(variant.state_fields) - set(ranges)
        if missing:
            raise ConfigurationError(f"No range for state fields {sorted(missing)}")
        self.variant = variant
        bounds = np.array([ranges[name] for name in variant.state_fields], dtype=np.float64)
        self.lower = bounds[:, 0]
        self.span = bounds[:, 1] - bounds[:, 0]
        if np.any(self.span <= 0):
            raise ConfigurationError("Every state range needs upper > lower")
        self.clamped = 0

    def __call__(self, state):
        symbols = state.symbols()
        values = np.array([symbols[name] for name in self.variant.state_fields])
        return self.normalize_values(values)

    def normalize_values(self, values):
        row = (np.asarray(values, dtype=np.float64) - self.lower) / self.span
        outside = int(np.count_nonzero((row < 0.0) | (row > 1.0)))
        if outside:
            self.clamped += outside
            row = np.clip(row, 0.0, 1.0)
        return row


def normalize_state(state, variant, ranges):
    return StateNormalizer(variant, ranges)(state)
