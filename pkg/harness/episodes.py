"""
Episode runner and the per-second episode log.

Agents:
    c            C-Agent recommendation every second
    c_per_stage  C-Agent recommendation sampled at the RL acting instants and held
    p_coop       C-Agent per stage + P-Coop delta
    f_coop       C-Agent per stage + F-Coop delta
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from agents.conservative import CAgentConfig, ConservativeAgent
from agents.qlearning import TransitionLinker, compose_action, select_action_index
from agents.rewards import RewardSpec, step_reward
from agents.variants import P_COOP, StateNormalizer, state_ranges
from core.exceptions import ConfigurationError, RejectedInputError
from line.disturbance import DisturbanceConfig
from line.env import DEATH, LineEnv
from line.state import LineConfig

logger = logging.getLogger(__name__)

AGENTS = ("c", "c_per_stage", "p_coop", "f_coop")
RL_AGENTS = ("p_coop", "f_coop")

EPISODE_COLUMNS = (
    "time",
    "combination",
    "ftu_speed",
    "stu_speed",
    "ttu_speed",
    "looper1",
    "looper2",
    "c_speed",
    "rl_delta",
    "reward",
)


def agent_name(name):
    """Normalize CLI spellings such as ``c-per-stage`` or ``F-Coop``."""
    key = name.replace("-", "_").lower()
    if key not in AGENTS:
        raise ConfigurationError(f"Unknown agent '{name}' (choose from {', '.join(AGENTS)})")
    return key


@dataclass
class EpisodeLog:
    scenario_id: str
    agent: str
    seed: int = 0
    rows: list = field(default_factory=list, repr=False)
    cause: str = ""
    losses: list = field(default_factory=list, repr=False)

    @property
    def steps(self):
        return len(self.rows)

    @property
    def speed_sum(self):
        return sum(row[3] for row in self.rows)

    @property
    def speed_mean(self):
        if not self.rows:
            return 0.0
        return self.speed_sum / len(self.rows)

    @property
    def died(self):
        return self.cause == DEATH

    @property
    def death_combination(self):
        return self.rows[-1][1] if self.died and self.rows else None

    def to_frame(self):
        return pd.DataFrame(self.rows, columns=list(EPISODE_COLUMNS))

    def write_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    def summary(self):
        return {
            "scenario_id": self.scenario_id,
            "agent": self.agent,
            "seed": self.seed,
            "cause": self.cause,
            "steps": self.steps,
            "speed_sum": self.speed_sum,
            "speed_mean": self.speed_mean,
        }


def read_episode_csv(path, scenario_id="", agent="", cause=""):
    frame = pd.read_csv(path, dtype={"combination": str})
    if tuple(frame.columns) != EPISODE_COLUMNS:
        raise RejectedInputError(f"{path} does not have the episode log columns")
    rows = [tuple(record) for record in frame.itertuples(index=False)]
    return EpisodeLog(scenario_id=scenario_id, agent=agent, rows=rows, cause=cause)


@dataclass(frozen=True)
class EpisodeSetup:
    """Everything an episode needs besides the scenario and the agent."""

    line: LineConfig
    disturbance: DisturbanceConfig
    speed_table: object
    c_agent: CAgentConfig
    ranges: dict
    gamma: float = 0.95
    reward_values: dict = field(default_factory=dict)

    @classmethod
    def from_run_config(cls, config, speed_table):
        line = LineConfig.from_run_config(config)
        disturbance = DisturbanceConfig.from_run_config(config)
        reward_values = {
            key: config[key]
            for key in (
                "rl_action_weight",
                "rl_death_penalty",
                "rl_proximity_weight",
                "rl_proximity_margin",
            )
        }
        return cls(
            line=line,
            disturbance=disturbance,
            speed_table=speed_table,
            c_agent=CAgentConfig.from_run_config(config),
            ranges=state_ranges(line, disturbance, config["length_max"]),
            gamma=config["rl_gamma"],
            reward_values=reward_values,
        )

    def reward_spec(self, variant):
        if not self.reward_values:
            return RewardSpec()
        return RewardSpec.for_variant(variant, self.reward_values)


def run_episode(setup, scenario, agent, bank=None, variant=None, epsilon=0.0, rng=None,
                learn=False):
    """
    Run one scenario to its terminal state.

    ``variant`` fixes the acting instants of ``c_per_stage`` (P-Coop's by
    default); RL agents take it from their bank.

    Raises:
        ConfigurationError: if an RL agent has no bank
    """
    agent = agent_name(agent)
    is_rl = agent in RL_AGENTS
    if is_rl:
        if bank is None:
            raise ConfigurationError(f"Agent {agent} needs a Q-network bank")
        variant = bank.variant
        if variant.name != agent:
            raise ConfigurationError(f"Bank holds a {variant.name} agent, not {agent}")
    elif agent == "c_per_stage":
        variant = variant or P_COOP
    if is_rl and epsilon > 0 and rng is None:
        raise RejectedInputError("Exploration needs an rng")

    env = LineEnv(setup.line, setup.disturbance, setup.speed_table)
    state = env.reset(scenario.queue, scenario.initial, scenario.disturbance_seed)
    c_agent = ConservativeAgent(setup.c_agent, setup.disturbance)
    log = EpisodeLog(scenario_id=scenario.scenario_id, agent=agent, seed=scenario.disturbance_seed)

    linker = normalizer = reward_spec = None
    if is_rl:
        reward_spec = setup.reward_spec(variant)
        normalizer = StateNormalizer(variant, setup.ranges)
        linker = TransitionLinker(bank, setup.gamma, reward_spec, learn=learn)

    previous_combination = None
    since_act = 0
    base = command = 0.0
    delta = 0
    while not state.terminal:
        combination = state.combination
        time = state.time
        if agent == "c":
            base = command = c_agent.recommend(state)
        elif variant.is_acting_instant(
            combination, combination != previous_combination, since_act
        ):
            base = c_agent.recommend(state)
            since_act = 0
            delta = 0
            if is_rl:
                if variant.acts_in(combination):
                    row = normalizer(state)
                    index = select_action_index(bank, row, combination, epsilon, rng)
                    delta = variant.actions[index]
                    linker.activate(combination, row, index)
                else:
                    linker.close()
            command = compose_action(delta, base)
        if is_rl:
            bank.entry(combination).active_time += 1

        state, _ = env.step(command)
        since_act += 1
        ftu_speed, stu_speed, ttu_speed = env.last_speeds
        reward = 0.0
        if is_rl:
            reward = step_reward(stu_speed, base, state.v1, state.v2, setup.line, reward_spec)
            linker.record(reward, died=state.cause == DEATH)
        log.rows.append(
            (
                time,
                combination,
                ftu_speed,
                stu_speed,
                ttu_speed,
                state.v1,
                state.v2,
                base,
                delta if agent != "c" else 0,
                reward,
            )
        )
        previous_combination = combination

    log.cause = state.cause
    if is_rl:
        log.losses = linker.finish()
        if normalizer.clamped:
            logger.debug(
                "Scenario %s: %d state fields clamped", scenario.scenario_id, normalizer.clamped
            )
    logger.debug(
        "Episode %s agent=%s cause=%s steps=%d mean speed=%.3f",
        scenario.scenario_id,
        agent,
        log.cause,
        log.steps,
        log.speed_mean,
    )
    return log
