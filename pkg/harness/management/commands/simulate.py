"""
Management command running one agent on scenarios and writing episode logs.

Usage:
    python manage.py simulate --agent c --scenario runs/scenarios/historical.json \
        --index 0 --out runs/logs/c_0000.csv
"""

from pathlib import Path

from agents.bank import QNetworkBank
from agents.variants import get_variant
from core.exceptions import ConfigurationError
from core.management.base import PicklingCommand
from harness.episodes import RL_AGENTS, EpisodeSetup, agent_name, run_episode
from line.scenario import read_scenarios
from strips.speed_table import load_speed_table


class Command(PicklingCommand):
    """Greedy run of c, c_per_stage, p_coop or f_coop."""

    help = "Simulate an agent on a scenario file"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--agent", required=True, help="c, c-per-stage, p-coop or f-coop")
        parser.add_argument("--scenario", required=True, help="Scenario set JSON file")
        parser.add_argument(
            "--index", type=int, default=None, help="Scenario index (default: all)"
        )
        parser.add_argument("--bank", default=None, help="Bank checkpoint (RL agents)")
        parser.add_argument(
            "--variant",
            default="p_coop",
            help="Acting instants used by c-per-stage (default p_coop)",
        )
        parser.add_argument("--out", required=True, help="Log CSV file, or directory for all")

    def handle(self, *args, **options):
        config = self.load_config(options)
        agent = agent_name(options["agent"])
        bank = None
        if agent in RL_AGENTS:
            if not options["bank"]:
                raise ConfigurationError(f"--bank is required for agent {agent}")
            bank = QNetworkBank.load(options["bank"])
        variant = get_variant(options["variant"], intra_period=config["rl_intra_period"])
        setup = EpisodeSetup.from_run_config(config, load_speed_table(config["speed_table_path"]))
        scenarios = read_scenarios(options["scenario"])
        if options["index"] is not None:
            if not 0 <= options["index"] < len(scenarios):
                raise ConfigurationError(f"Scenario index {options['index']} out of range")
            scenarios = [scenarios[options["index"]]]

        out = Path(options["out"])
        for scenario in scenarios:
            log = run_episode(setup, scenario, agent, bank=bank, variant=variant)
            path = out if len(scenarios) == 1 else out / f"{agent}_{scenario.scenario_id}.csv"
            log.write_csv(path)
            self.stdout.write(
                f"{scenario.scenario_id}: {log.cause} after {log.steps} s, "
                f"mean STU speed {log.speed_mean:.2f} m/min"
            )
        self.success(f"Simulated {len(scenarios)} episode(s) with agent {agent}")
