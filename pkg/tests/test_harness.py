"""
Tests for seeding, scenario precomputation, episodes, training and reports.
"""

from dataclasses import replace

import numpy as np
import pytest

from agents.bank import QNetworkBank
from agents.variants import F_COOP, P_COOP, state_ranges
from core.config import load_run_config
from core.exceptions import ConfigurationError, RejectedInputError
from harness.episodes import (
    EPISODE_COLUMNS,
    EpisodeLog,
    EpisodeSetup,
    agent_name,
    read_episode_csv,
    run_episode,
)
from harness.evaluation import ALL, SURPLUS_COMBINATIONS, MetricsReport, build_report, evaluate
from harness.reports import death_table, export_report, read_report, surplus_frame
from harness.scenarios import precompute_scenarios, random_initial_conditions
from harness.seeding import derive_seed, make_rng
from harness.training import TrainingSchedule, train
from line.disturbance import DisturbanceConfig
from line.env import COMPLETE, DEATH, TIMEOUT, LineEnv
from line.scenario import Scenario, validate_initial_conditions
from line.state import LineConfig
from strips.domain import GradeVocabulary, StandardizationStats, strips_to_matrix
from strips.history import generate_history
from synthesis.cgan import CganConfig, CganModel
from synthesis.grades import GradeModel, GradeModelConfig


def fresh_bank(variant=P_COOP, seed=0):
    return QNetworkBank.create(variant, np.random.default_rng(seed))


def fake_log(agent, scenario_id, rows, cause=COMPLETE):
    return EpisodeLog(scenario_id=scenario_id, agent=agent, rows=rows, cause=cause)


def row(time, combination, stu_speed, base=0.0):
    return (time, combination, 0.0, stu_speed, 0.0, 200.0, 100.0, base, 0, 0.0)


# ============================================================================
# Seeding Tests
# ============================================================================


@pytest.mark.unit
class TestSeeding:
    """Tests for per-stream seed derivation."""

    def test_stable(self):
        assert derive_seed(7, "scenario.generated", 3) == derive_seed(7, "scenario.generated", 3)

    def test_streams_differ(self):
        seeds = {
            derive_seed(7, "scenario.generated", 0),
            derive_seed(7, "scenario.generated", 1),
            derive_seed(7, "scenario.historical", 0),
            derive_seed(8, "scenario.generated", 0),
        }
        assert len(seeds) == 4

    def test_rng_reproducible(self):
        a = make_rng(1, "rl.p_coop.epsilon").random(5)
        b = make_rng(1, "rl.p_coop.epsilon").random(5)
        np.testing.assert_array_equal(a, b)


# ============================================================================
# Scenario Tests
# ============================================================================


@pytest.mark.unit
class TestScenarios:
    """Tests for scenario precomputation."""

    def test_historical_windows(self, history, speed_table):
        line = LineConfig(episode_strips=5)
        scenarios = precompute_scenarios(3, "historical", line, speed_table, 7, strips=history)
        assert [s.scenario_id for s in scenarios] == [
            "historical-0000",
            "historical-0001",
            "historical-0002",
        ]
        for scenario in scenarios:
            queue = list(scenario.queue)
            assert any(history[i : i + 5] == queue for i in range(len(history) - 4))
            validate_initial_conditions(scenario.initial, line, queue[0].length)

    def test_deterministic(self, history, speed_table):
        line = LineConfig(episode_strips=5)
        a = precompute_scenarios(4, "historical", line, speed_table, 7, strips=history)
        b = precompute_scenarios(4, "historical", line, speed_table, 7, strips=history)
        assert a == b
        c = precompute_scenarios(4, "historical", line, speed_table, 8, strips=history)
        assert a != c

    def test_generated(self, history, flat_speed_table):
        vocabulary = GradeVocabulary.from_sequence(strip.grade for strip in history)
        stats = StandardizationStats.fit(strips_to_matrix(history))
        rng = np.random.default_rng(0)
        grade_model = GradeModel(
            vocabulary, GradeModelConfig(hidden_units=8, sequence_length=4), rng
        )
        cgan = CganModel.create(CganConfig(noise_length=4, window_length=3), vocabulary, stats, rng)
        scenarios = precompute_scenarios(
            2,
            "generated",
            LineConfig(episode_strips=6),
            flat_speed_table,
            7,
            grade_model=grade_model,
            cgan=cgan,
            strip_config={"length_min": 100.0, "length_max": 1500.0},
        )
        assert [len(s.queue) for s in scenarios] == [6, 6]
        assert all(s.source == "generated" for s in scenarios)
        assert all(strip.grade in vocabulary for s in scenarios for strip in s.queue)

    def test_generated_needs_models(self, speed_table):
        with pytest.raises(ConfigurationError):
            precompute_scenarios(1, "generated", LineConfig(), speed_table, 7)

    def test_history_too_short(self, history, speed_table):
        with pytest.raises(ConfigurationError):
            precompute_scenarios(
                1, "historical", LineConfig(episode_strips=20), speed_table, 7, strips=history[:5]
            )

    def test_unknown_source(self, speed_table):
        with pytest.raises(ConfigurationError):
            precompute_scenarios(1, "imagined", LineConfig(), speed_table, 7)


# ============================================================================
# Episode Tests
# ============================================================================


@pytest.mark.unit
class TestEpisodes:
    """Tests for running single episodes."""

    def test_agent_names(self):
        assert agent_name("c-per-stage") == "c_per_stage"
        assert agent_name("F-Coop") == "f_coop"
        with pytest.raises(ConfigurationError):
            agent_name("greedy")

    def test_rl_agent_needs_bank(self, episode_setup, scenario):
        with pytest.raises(ConfigurationError):
            run_episode(episode_setup, scenario, "p_coop")

    def test_bank_must_match_agent(self, episode_setup, scenario):
        with pytest.raises(ConfigurationError):
            run_episode(episode_setup, scenario, "p_coop", bank=fresh_bank(F_COOP))

    def test_exploration_needs_rng(self, episode_setup, scenario):
        with pytest.raises(RejectedInputError):
            run_episode(episode_setup, scenario, "p_coop", bank=fresh_bank(), epsilon=0.5)

    def test_log_is_consistent(self, episode_setup, scenario):
        log = run_episode(episode_setup, scenario, "c_per_stage")
        frame = log.to_frame()
        assert tuple(frame.columns) == EPISODE_COLUMNS
        assert list(frame["time"]) == list(range(log.steps))
        assert log.speed_mean == pytest.approx(frame["stu_speed"].mean())
        assert log.cause in (COMPLETE, DEATH)
        assert log.summary()["steps"] == log.steps

    def test_rl_episode_is_deterministic(self, episode_setup, scenario):
        a = run_episode(episode_setup, scenario, "p_coop", bank=fresh_bank())
        b = run_episode(episode_setup, scenario, "p_coop", bank=fresh_bank())
        assert a.rows == b.rows
        assert a.cause == b.cause

    def test_active_time_covers_episode(self, episode_setup, scenario):
        """Every second is charged to exactly one combination network."""
        bank = fresh_bank()
        log = run_episode(episode_setup, scenario, "p_coop", bank=bank)
        assert sum(bank.active_times().values()) == log.steps

    def test_p_coop_adds_nothing_while_stopped(self, episode_setup, scenario):
        log = run_episode(episode_setup, scenario, "p_coop", bank=fresh_bank())
        assert all(r[8] == 0 for r in log.rows if "3" in r[1])

    def test_csv_round_trip(self, episode_setup, scenario, tmp_path):
        log = run_episode(episode_setup, scenario, "c_per_stage")
        path = log.write_csv(tmp_path / "episode.csv")
        loaded = read_episode_csv(path)
        assert loaded.steps == log.steps
        assert loaded.speed_sum == pytest.approx(log.speed_sum)

    @pytest.mark.slow
    def test_c_agent_survives_noiseless_stops(self, episode_setup, scenario):
        """With exact forecasts the C-Agent finishes the queue."""
        log = run_episode(episode_setup, scenario, "c")
        assert log.cause == COMPLETE
        assert all(r[8] == 0 for r in log.rows)


# ============================================================================
# Training Tests
# ============================================================================


@pytest.mark.unit
class TestTraining:
    """Tests for the two-phase training schedule."""

    def test_zero_episodes(self, episode_setup):
        bank = fresh_bank()
        before = bank.to_bytes()
        schedule = TrainingSchedule(phase1_episodes=0, phase2_episodes=0, report_window=0)
        _, curves = train(episode_setup, bank, schedule, [], [], seed=1)
        assert curves.rows == []
        assert bank.to_bytes() == before

    def test_phase_needs_scenarios(self, episode_setup, scenario):
        schedule = TrainingSchedule(phase1_episodes=1, phase2_episodes=1, report_window=1)
        with pytest.raises(ConfigurationError):
            train(episode_setup, fresh_bank(), schedule, [], [scenario], seed=1)

    def test_report_window_must_fit(self):
        with pytest.raises(ConfigurationError):
            TrainingSchedule(phase1_episodes=1, phase2_episodes=1, report_window=5)

    def test_two_phases(self, episode_setup, scenario, tmp_path):
        schedule = TrainingSchedule(phase1_episodes=2, phase2_episodes=1, report_window=1)
        bank = fresh_bank()
        _, curves = train(
            episode_setup, bank, schedule, [scenario], [scenario], seed=1,
            checkpoint_path=tmp_path / "bank.bin",
        )
        frame = curves.to_frame()
        assert list(frame["phase"]) == [1, 1, 2]
        assert list(frame["epsilon"]) == pytest.approx([0.9, 0.05, 0.0])
        assert len(curves.report_window(1)) == 1
        assert sum(frame["updates"]) > 0

    def test_training_is_seeded(self, episode_setup, scenario):
        schedule = TrainingSchedule(phase1_episodes=2, phase2_episodes=0, report_window=0)
        banks = []
        for _ in range(2):
            bank, _ = train(episode_setup, fresh_bank(), schedule, [scenario], [], seed=5)
            banks.append(bank.to_bytes())
        assert banks[0] == banks[1]


# ============================================================================
# Evaluation and Report Tests
# ============================================================================


@pytest.mark.unit
class TestReports:
    """Tests for metrics, surplus and report files."""

    def test_death_rate(self):
        logs = [
            fake_log("c", f"s{i}", [row(0, "03", 80.0)], cause=DEATH if i < 26 else COMPLETE)
            for i in range(100)
        ]
        report = build_report({"c": logs})
        assert report.value("c", ALL, "death_rate") == pytest.approx(0.26)
        assert report.value("c", "03", "deaths") == 26

    def test_surplus(self):
        rl_logs = [fake_log("p_coop", "s0", [row(0, "12", 110.0, base=100.0)])]
        c_logs = [fake_log("c", "s0", [row(0, "12", 100.0, base=100.0)])]
        report = build_report({"p_coop": rl_logs, "c": c_logs})
        assert report.value("p_coop", "12", "surplus_vs_c_per_stage") == pytest.approx(10.0)
        assert report.value("p_coop", "12", "surplus_vs_c") == pytest.approx(10.0)
        frame = surplus_frame(report)
        assert set(frame["baseline"]) == {"c_per_stage", "c"}

    def test_box_statistics(self):
        logs = [
            fake_log("c", f"s{i}", [row(0, "22", float(v))]) for i, v in enumerate([1, 2, 3, 4, 5])
        ]
        report = build_report({"c": logs})
        assert report.value("c", "22", "speed_median") == 3.0
        assert report.value("c", "22", "speed_q1") == 2.0
        assert report.value("c", ALL, "objective_sum_mean") == 3.0

    def test_death_table(self):
        logs = [fake_log("c", "s0", [row(0, "30", 50.0)], cause=DEATH)]
        table = death_table(build_report({"c": logs}))
        assert table.loc["c", "30"] == 1

    def test_empty_report_exports_header(self, tmp_path):
        written = export_report(MetricsReport(), tmp_path)
        assert [p.name for p in written] == ["report.csv", "report.json"]
        assert (tmp_path / "report.csv").read_text().strip() == "agent,combination,statistic,value"
        assert read_report(tmp_path / "report.csv").rows == []

    def test_export_round_trip(self, tmp_path):
        logs = [fake_log("c", "s0", [row(0, "02", 80.0), row(1, "12", 90.0)])]
        report = build_report({"c": logs})
        export_report(report, tmp_path)
        assert read_report(tmp_path / "report.csv").rows == report.rows
        assert read_report(tmp_path / "report.json").rows == report.rows

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ConfigurationError):
            export_report(MetricsReport(), tmp_path, formats=["xml"])

    def test_evaluate_shares_scenarios(self, episode_setup, scenario):
        report, logs = evaluate(episode_setup, [scenario], ["c_per_stage", "p_coop"],
                                banks={"p_coop": fresh_bank()})
        assert set(logs) == {"c_per_stage", "p_coop"}
        assert report.value("p_coop", ALL, "episodes") == 1
        assert logs["p_coop"][0].scenario_id == scenario.scenario_id

    def test_evaluate_needs_banks(self, episode_setup, scenario):
        with pytest.raises(ConfigurationError):
            evaluate(episode_setup, [scenario], ["f_coop"])


# ============================================================================
# Acceptance Tests
# ============================================================================


def sweep_scenarios(make_strip, table, line, seed, count, strips=3):
    """Short queues of plain strips with seeded initial states and stops."""
    rng = make_rng(seed, "sweep")
    scenarios = []
    for i in range(count):
        queue = tuple(make_strip(length=float(rng.uniform(300.0, 600.0))) for _ in range(strips))
        scenarios.append(
            Scenario(
                scenario_id=f"sweep-{i:04d}",
                queue=queue,
                initial=random_initial_conditions(rng, line, queue, table),
                disturbance_seed=derive_seed(seed, "sweep.disturbance", i),
                source="historical",
            )
        )
    return scenarios


@pytest.fixture
def cap_violations(monkeypatch):
    """Every step whose STU speed leaves the speed-table cap it was taken under."""
    violations = []
    step = LineEnv.step

    def checked_step(env, command):
        cap_min, cap_max = env.speed_cap()
        state, events = step(env, command)
        speed = env.last_speeds[1]
        if speed > cap_max + 1e-9 or (not state.terminal and speed < cap_min - 1e-9):
            violations.append((state.time, speed, cap_min, cap_max))
        return state, events

    monkeypatch.setattr(LineEnv, "step", checked_step)
    return violations


@pytest.mark.integration
@pytest.mark.slow
class TestAcceptance:
    """Whole-system properties over many shared-scenario episodes."""

    def test_c_agent_safety_sweep(self, episode_setup, line_config, flat_speed_table,
                                  make_strip, cap_violations):
        """Exact forecasts and safety factor 1.2: 100 episodes without a death."""
        disturbance = DisturbanceConfig(prediction_sd=0.0)
        setup = replace(
            episode_setup,
            disturbance=disturbance,
            ranges=state_ranges(line_config, disturbance, 600.0),
        )
        assert setup.c_agent.safety_factor == 1.2
        scenarios = sweep_scenarios(make_strip, flat_speed_table, line_config, 21, 100)
        report, logs = evaluate(setup, scenarios, ["c"])
        assert report.value("c", ALL, "episodes") == 100
        assert report.value("c", ALL, "deaths") == 0
        assert not any(log.died for log in logs["c"])
        assert cap_violations == []

    def test_cap_clamp_for_every_agent(self, episode_setup, history, speed_table,
                                       cap_violations):
        """Speed-table caps that change strip by strip hold for all four agents."""
        line = LineConfig(episode_strips=2)
        scenarios = precompute_scenarios(12, "historical", line, speed_table, 5, strips=history)
        setup = replace(
            episode_setup,
            line=line,
            speed_table=speed_table,
            ranges=state_ranges(line, episode_setup.disturbance, 1500.0),
        )
        banks = {"p_coop": fresh_bank(P_COOP), "f_coop": fresh_bank(F_COOP)}
        _, logs = evaluate(setup, scenarios, ["c", "c_per_stage", "p_coop", "f_coop"],
                           banks=banks)
        assert sum(log.steps for agent_logs in logs.values() for log in agent_logs) > 0
        assert cap_violations == []

    def test_objective_equivalence(self, episode_setup, flat_speed_table, make_strip):
        """On fixed-length episodes ranking by speed sum and by mean speed agree."""
        line = LineConfig(max_steps=300)
        setup = replace(episode_setup, line=line)
        scenarios = sweep_scenarios(make_strip, flat_speed_table, line, 31, 5, strips=4)
        agents = ["c", "c_per_stage", "p_coop", "f_coop"]
        banks = {"p_coop": fresh_bank(P_COOP), "f_coop": fresh_bank(F_COOP)}
        report, logs = evaluate(setup, scenarios, agents, banks=banks)

        compared = 0
        for i in range(len(scenarios)):
            fixed = {agent: logs[agent][i] for agent in agents if logs[agent][i].cause == TIMEOUT}
            assert all(log.steps == 300 for log in fixed.values())
            if len(fixed) < 2:
                continue
            by_sum = sorted(fixed, key=lambda agent: fixed[agent].speed_sum)
            by_mean = sorted(fixed, key=lambda agent: fixed[agent].speed_mean)
            assert by_sum == by_mean
            compared += 1
        assert compared > 0

        for agent in agents:
            means = [log.speed_sum / log.steps for log in logs[agent]]
            assert report.value(agent, ALL, "objective_mean_mean") == pytest.approx(
                np.mean(means)
            )

    def test_evaluate_output_is_reproducible(self, episode_setup, flat_speed_table, line_config,
                                             make_strip, tmp_path):
        """Two evaluations with the same seeds write identical bytes."""
        scenarios = sweep_scenarios(make_strip, flat_speed_table, line_config, 41, 3)
        for run in ("a", "b"):
            report, logs = evaluate(
                episode_setup,
                scenarios,
                ["c_per_stage", "p_coop"],
                banks={"p_coop": fresh_bank(P_COOP, seed=3)},
            )
            export_report(report, tmp_path / run)
            for agent, agent_logs in logs.items():
                for log in agent_logs:
                    log.write_csv(tmp_path / run / "logs" / agent / f"{log.scenario_id}.csv")

        first = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.*"))
        second = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*.*"))
        assert first == second
        assert len(first) == 2 + 2 * len(scenarios)
        for relative in first:
            assert (tmp_path / "a" / relative).read_bytes() == (
                tmp_path / "b" / relative
            ).read_bytes()

    def test_p_coop_dies_no_more_than_f_coop(self, episode_setup, disturbance, line_config,
                                             flat_speed_table, make_strip):
        """Trained on the same scenarios, P-Coop's death rate does not exceed F-Coop's."""
        setup = replace(
            episode_setup,
            disturbance=disturbance,
            ranges=state_ranges(line_config, disturbance, 600.0),
        )
        schedule = TrainingSchedule(phase1_episodes=6, phase2_episodes=2, report_window=2)
        holds = 0
        for seed in (1, 2, 3):
            scenarios = sweep_scenarios(make_strip, flat_speed_table, line_config, seed, 28)
            rates = {}
            for variant in (P_COOP, F_COOP):
                bank = QNetworkBank.create(variant, make_rng(seed, f"rl.{variant.name}.init"))
                train(setup, bank, schedule, scenarios[:6], scenarios[6:8], seed=seed)
                report, _ = evaluate(setup, scenarios[8:], [variant.name],
                                     banks={variant.name: bank})
                rates[variant.name] = report.value(variant.name, ALL, "death_rate")
            holds += rates["p_coop"] <= rates["f_coop"]
        assert holds >= 2

    def test_p_coop_beats_c_agent_per_stage(self, settings, speed_table):
        """
        After the desk schedule P-Coop runs faster than its C-Agent baseline in
        at least four of the five combinations where a unit is in boost.

        Historical windows stand in for the generated first-phase scenarios.
        """
        config = load_run_config(profile="desk", seed=7, episode_strips=5)
        setup = EpisodeSetup.from_run_config(config, speed_table)
        line = setup.line
        strips = generate_history(
            make_rng(config.seed, "history"), strips=500, grades=5, length_max=config["length_max"]
        )
        first = precompute_scenarios(40, "historical", line, speed_table, 8, strips=strips)
        second = precompute_scenarios(40, "historical", line, speed_table, 9, strips=strips)
        held_out = precompute_scenarios(100, "historical", line, speed_table, 10, strips=strips)

        bank = QNetworkBank.from_run_config(
            P_COOP, config, make_rng(config.seed, "rl.p_coop.init")
        )
        train(setup, bank, TrainingSchedule.from_run_config(config), first, second,
              seed=config.seed)
        report, _ = evaluate(setup, held_out, ["p_coop"], banks={"p_coop": bank})

        surplus = report.table("surplus_vs_c_per_stage").get("p_coop", {})
        positive = [code for code in SURPLUS_COMBINATIONS if surplus.get(code, 0.0) > 0.0]
        assert len(positive) >= 4, surplus
