"""
Evaluation of agents on a shared scenario set.

Produces death counts per stage combination, per-combination STU speed
distributions, speed surplus of the RL agents over both conservative
baselines and per-episode objective summaries, all as long-format rows
(agent, combination, statistic, value).
"""

import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import django
import numpy as np

from core.exceptions import ConfigurationError

from .episodes import RL_AGENTS, run_episode

logger = logging.getLogger(__name__)

SURPLUS_COMBINATIONS = ("02", "12", "20", "21", "22")
ALL = "all"
BOX_STATISTICS = ("speed_min", "speed_q1", "speed_median", "speed_q3", "speed_max")


@dataclass
class MetricsReport:
    """Long-format evaluation results."""

    rows: list = field(default_factory=list)

    def add(self, agent, combination, statistic, value):
        self.rows.append((agent, combination, statistic, float(value)))

    def value(self, agent, combination, statistic):
        for row in self.rows:
            if row[:3] == (agent, combination, statistic):
                return row[3]
        raise KeyError((agent, combination, statistic))

    def agents(self):
        return sorted({row[0] for row in self.rows})

    def table(self, statistic):
        """{agent: {combination: value}} for one statistic."""
        result = defaultdict(dict)
        for agent, combination, name, value in self.rows:
            if name == statistic:
                result[agent][combination] = value
        return dict(result)


def combination_means(log, column=3):
    """Per-combination mean of one log column (STU speed by default) for one episode."""
    sums = defaultdict(float)
    counts = defaultdict(int)
    for row in log.rows:
        sums[row[1]] += row[column]
        counts[row[1]] += 1
    return {code: sums[code] / counts[code] for code in sums}


def combination_distributions(logs, column=3):
    """{combination: [per-episode mean, ...]} over a list of logs."""
    distributions = defaultdict(list)
    for log in logs:
        for code, mean in combination_means(log, column).items():
            distributions[code].append(mean)
    return dict(distributions)


def box_statistics(values):
    q = np.percentile(np.asarray(values, dtype=np.float64), [0, 25, 50, 75, 100])
    return dict(zip(BOX_STATISTICS, (float(v) for v in q)))


def surplus_percent(agent_mean, baseline_mean):
    return 100.0 * (agent_mean - baseline_mean) / baseline_mean


def surplus_table(agent_logs, baseline_logs, combinations=SURPLUS_COMBINATIONS,
                  baseline_column=3):
    """
    Speed surplus in percent per combination: mean over episodes of the agent's
    per-combination mean STU speed against the same for the baseline.
    Combinations either side never visited are left out.
    """
    agent = combination_distributions(agent_logs)
    baseline = combination_distributions(baseline_logs, baseline_column)
    table = {}
    for code in combinations:
        if agent.get(code) and baseline.get(code):
            base = float(np.mean(baseline[code]))
            if base > 0:
                table[code] = surplus_percent(float(np.mean(agent[code])), base)
    return table


def death_counts(logs):
    counts = defaultdict(int)
    for log in logs:
        if log.died:
            counts[log.death_combination] += 1
    return dict(counts)


def build_report(logs_by_agent):
    """
    Assemble a MetricsReport from finished episode logs keyed by agent name.
    """
    report = MetricsReport()
    for agent in sorted(logs_by_agent):
        logs = logs_by_agent[agent]
        episodes = len(logs)
        deaths = death_counts(logs)
        total_deaths = sum(deaths.values())
        report.add(agent, ALL, "episodes", episodes)
        report.add(agent, ALL, "deaths", total_deaths)
        report.add(agent, ALL, "death_rate", total_deaths / episodes if episodes else 0.0)
        for code in sorted(deaths):
            report.add(agent, code, "deaths", deaths[code])

        for code, values in sorted(combination_distributions(logs).items()):
            for name, value in box_statistics(values).items():
                report.add(agent, code, name, value)
            report.add(agent, code, "speed_mean", float(np.mean(values)))

        if logs:
            sums = [log.speed_sum for log in logs]
            means = [log.speed_mean for log in logs]
            report.add(agent, ALL, "objective_sum_mean", float(np.mean(sums)))
            report.add(agent, ALL, "objective_sum_median", float(np.median(sums)))
            report.add(agent, ALL, "objective_mean_mean", float(np.mean(means)))
            report.add(agent, ALL, "objective_mean_median", float(np.median(means)))

        if agent in RL_AGENTS:
            # contributor column: the C-Agent recommendation the agent was composed with
            for code, value in sorted(surplus_table(logs, logs, baseline_column=7).items()):
                report.add(agent, code, "surplus_vs_c_per_stage", value)
            if "c" in logs_by_agent:
                for code, value in sorted(surplus_table(logs, logs_by_agent["c"]).items()):
                    report.add(agent, code, "surplus_vs_c", value)
    return report


def _init_worker():
    django.setup()


def _run_one(job):
    setup, scenario, agent, bank, variant = job
    return run_episode(setup, scenario, agent, bank=bank, variant=variant)


def evaluate_agent(setup, scenarios, agent, bank=None, variant=None, workers=1):
    """
    Greedy episodes of one agent over every scenario, in scenario order.

    Banks are only read, so episodes may run in worker processes.
    """
    jobs = [(setup, scenario, agent, bank, variant) for scenario in scenarios]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker) as pool:
            logs = list(pool.map(_run_one, jobs))
    else:
        logs = [_run_one(job) for job in jobs]
    order = {scenario.scenario_id: i for i, scenario in enumerate(scenarios)}
    logs.sort(key=lambda log: order[log.scenario_id])
    deaths = sum(log.died for log in logs)
    logger.info("Evaluated %s on %d scenarios: %d deaths", agent, len(logs), deaths)
    return logs


def evaluate(setup, scenarios, agents, banks=None, workers=1, variant=None):
    """
    Evaluate several agents on the same scenarios.

    Returns:
        (MetricsReport, {agent: [EpisodeLog, ...]})

    Raises:
        ConfigurationError: if an RL agent has no bank
    """
    banks = banks or {}
    logs_by_agent = {}
    for agent in agents:
        bank = banks.get(agent)
        if agent in RL_AGENTS and bank is None:
            raise ConfigurationError(f"No bank given for agent {agent}")
        logs_by_agent[agent] = evaluate_agent(
            setup, scenarios, agent, bank=bank, variant=variant, workers=workers
        )
    return build_report(logs_by_agent), logs_by_agent
