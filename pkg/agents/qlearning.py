"""
Online Q-learning over the stage-combination bank.

A transition of combination k spans from one activation of k to the next
one; its reward is the aggregated reward of the window that followed the
first activation. Updates therefore fire only when a combination becomes
active again, and whatever is still pending at episode end is flushed as
terminal.
"""

import logging

import numpy as np

from core.exceptions import ProtocolError, RejectedInputError

from .bank import PendingTransition, Transition
from .rewards import accumulate_reward

logger = logging.getLogger(__name__)


def greedy_index(values):
    """Index of the largest value; ties go to the lowest index (smallest delta)."""
    return int(np.argmax(values))


def select_action_index(bank, row, combination, epsilon, rng):
    if not 0.0 <= epsilon <= 1.0:
        raise RejectedInputError(f"epsilon must lie in [0, 1], got {epsilon}")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(bank.variant.action_count))
    return greedy_index(bank.values(combination, row))


def select_action(bank, row, combination, epsilon, rng):
    """epsilon-greedy delta (m/min) for one combination."""
    return bank.variant.actions[select_action_index(bank, row, combination, epsilon, rng)]


def compose_action(delta, c_speed):
    """STU command = C-Agent recommendation + RL delta (clamped later by the line)."""
    return c_speed + delta


def q_update(bank, transition, gamma, combination=None):
    """
    One Bellman update of the transition's combination network.

    Returns:
        squared error before the update

    Raises:
        ProtocolError: if ``combination`` is given and differs from the transition's
    """
    if combination is not None and combination != transition.combination:
        raise ProtocolError(
            f"Transition of combination {transition.combination} applied at {combination}"
        )
    entry = bank.entry(transition.combination)
    target = transition.reward
    if not transition.terminal:
        target += gamma * float(np.max(entry.q.values(transition.next_state)))
    return entry.q.update(transition.state, transition.action_index, target)


def epsilon_for_episode(episode, phase1_episodes, start=0.9, end=0.05):
    """Linear decay over phase 1, zero afterwards."""
    if episode >= phase1_episodes:
        return 0.0
    if phase1_episodes == 1:
        return start
    return start + (end - start) * episode / (phase1_episodes - 1)


class TransitionLinker:
    """
    Bookkeeping of pending transitions during one episode.

    ``activate`` opens a reward window for a combination (closing the open
    one), ``record`` adds one step reward to the open window, and ``finish``
    flushes every pending transition as terminal.
    """

    def __init__(self, bank, gamma, reward_spec, learn=True):
        self.bank = bank
        self.gamma = gamma
        self.reward_spec = reward_spec
        self.learn = learn
        self.open = None
        self.last = None
        self.losses = []
        bank.clear_pending()

    def _reward(self, pending):
        return accumulate_reward(
            pending.rewards, self.bank.variant.aggregation, pending.died, self.reward_spec
        )

    def _update(self, transition):
        if self.learn:
            loss = q_update(self.bank, transition, self.gamma, transition.combination)
            self.losses.append(loss)
            logger.debug(
                "q_update %s a=%d r=%.3f loss=%.4f",
                transition.combination,
                transition.action_index,
                transition.reward,
                loss,
            )

    def activate(self, combination, row, action_index):
        """Close the open window, link the combination's previous activation, open a new one."""
        self.close()
        entry = self.bank.entry(combination)
        pending = entry.pending
        if pending is not None and pending.rewards:
            self._update(
                Transition(
                    combination=combination,
                    state=pending.state,
                    action_index=pending.action_index,
                    reward=self._reward(pending),
                    next_state=row,
                )
            )
        entry.pending = PendingTransition(combination, np.asarray(row), action_index)
        self.open = self.last = entry.pending

    def close(self):
        self.open = None

    def record(self, reward, died=False):
        """Add a step reward; a death outside any window is charged to the last activation."""
        if self.open is not None:
            self.open.rewards.append(reward)
            self.open.died = self.open.died or died
        elif died and self.last is not None and self.last.rewards:
            self.last.died = True

    def finish(self):
        self.close()
        for code, entry in self.bank.entries.items():
            pending = entry.pending
            entry.pending = None
            if pending is None or not pending.rewards:
                continue
            self._update(
                Transition(
                    combination=code,
                    state=pending.state,
                    action_index=pending.action_index,
                    reward=self._reward(pending),
                    terminal=True,
                )
            )
        return self.losses
