"""
Two-phase RL training.

Phase 1 explores on generated scenarios with a linearly decaying epsilon;
phase 2 continues greedily (epsilon = 0) on historical scenarios. Updates
are online, so episodes run strictly in order.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from agents.qlearning import epsilon_for_episode
from core.exceptions import ConfigurationError, TrainingError

from .episodes import run_episode
from .seeding import make_rng

logger = logging.getLogger(__name__)

CURVE_COLUMNS = (
    "episode",
    "phase",
    "scenario_id",
    "epsilon",
    "cause",
    "steps",
    "speed_sum",
    "speed_mean",
    "mean_loss",
    "updates",
)


@dataclass(frozen=True)
class TrainingSchedule:
    phase1_episodes: int = 800
    phase2_episodes: int = 200
    report_window: int = 100
    epsilon_start: float = 0.9
    epsilon_end: float = 0.05

    def __post_init__(self):
        if self.phase1_episodes < 0 or self.phase2_episodes < 0:
            raise ConfigurationError("Episode counts must be >= 0")
        if self.report_window < 0:
            raise ConfigurationError("report_window must be >= 0")
        if self.phase2_episodes and self.report_window > self.phase2_episodes:
            raise ConfigurationError("The report window must fit inside phase 2")
        for value in (self.epsilon_start, self.epsilon_end):
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError("epsilon bounds must lie in [0, 1]")

    @classmethod
    def from_run_config(cls, config):
        return cls(
            phase1_episodes=config["phase1_episodes"],
            phase2_episodes=config["phase2_episodes"],
            report_window=config["report_window"],
            epsilon_start=config["rl_epsilon_start"],
            epsilon_end=config["rl_epsilon_end"],
        )

    @property
    def total_episodes(self):
        return self.phase1_episodes + self.phase2_episodes

    def epsilon(self, episode):
        return epsilon_for_episode(
            episode, self.phase1_episodes, self.epsilon_start, self.epsilon_end
        )


@dataclass
class TrainingCurves:
    rows: list = field(default_factory=list)

    def append(self, **row):
        self.rows.append(row)

    def to_frame(self):
        return pd.DataFrame(self.rows, columns=list(CURVE_COLUMNS))

    def write_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    def report_window(self, window):
        """The last ``window`` phase-2 episodes."""
        phase2 = [row for row in self.rows if row["phase"] == 2]
        return phase2[-window:] if window else []


def train(setup, bank, schedule, generated, historical, seed, checkpoint_path=None):
    """
    Run the training schedule on ``bank`` in place.

    Returns:
        (bank, TrainingCurves)

    Raises:
        ConfigurationError: if a phase has episodes but no scenarios
        TrainingError: if a loss turns non-finite; the last good bank is
            written to ``checkpoint_path`` first when one is given
    """
    if schedule.phase1_episodes and not generated:
        raise ConfigurationError("Phase 1 needs generated scenarios")
    if schedule.phase2_episodes and not historical:
        raise ConfigurationError("Phase 2 needs historical scenarios")
    agent = bank.variant.name
    rng = make_rng(seed, f"rl.{agent}.epsilon")
    curves = TrainingCurves()
    last_good = bank.to_bytes()

    for episode in range(schedule.total_episodes):
        if episode < schedule.phase1_episodes:
            phase, scenario = 1, generated[episode % len(generated)]
        else:
            phase = 2
            scenario = historical[(episode - schedule.phase1_episodes) % len(historical)]
        epsilon = schedule.epsilon(episode)
        try:
            log = run_episode(
                setup, scenario, agent, bank=bank, epsilon=epsilon, rng=rng, learn=True
            )
        except TrainingError as exc:
            exc.diagnostics.update({"episode": episode, "scenario_id": scenario.scenario_id})
            if checkpoint_path:
                Path(checkpoint_path).write_bytes(last_good)
                exc.diagnostics["checkpoint"] = str(checkpoint_path)
                logger.error(
                    "Training diverged at episode %d; last good bank saved to %s",
                    episode,
                    checkpoint_path,
                )
            raise
        last_good = bank.to_bytes()
        curves.append(
            episode=episode,
            phase=phase,
            scenario_id=scenario.scenario_id,
            epsilon=epsilon,
            cause=log.cause,
            steps=log.steps,
            speed_sum=log.speed_sum,
            speed_mean=log.speed_mean,
            mean_loss=float(np.mean(log.losses)) if log.losses else float("nan"),
            updates=len(log.losses),
        )
        logger.debug(
            "%s episode %d phase %d eps=%.3f cause=%s mean speed=%.2f",
            agent,
            episode,
            phase,
            epsilon,
            log.cause,
            log.speed_mean,
        )
        if (episode + 1) % 50 == 0:
            logger.info("%s: %d/%d episodes", agent, episode + 1, schedule.total_episodes)
    return bank, curves
