"""
Management command evaluating agents on one scenario set.

Usage:
    python manage.py evaluate --scenarios runs/scenarios/historical.json \
        --agents c c-per-stage p-coop f-coop --bank p_coop=runs/p_coop.pklb \
        --bank f_coop=runs/f_coop.pklb --out runs/evaluation
"""

import json
from pathlib import Path

from agents.bank import QNetworkBank
from agents.variants import get_variant
from core.exceptions import ConfigurationError
from core.management.base import PicklingCommand
from core.models import file_digest
from harness.episodes import EpisodeSetup, agent_name
from harness.evaluation import evaluate
from harness.models import EvaluationRun, ScenarioSet
from harness.reports import export_report
from line.scenario import read_scenarios
from strips.speed_table import load_speed_table


class Command(PicklingCommand):
    """Every agent replays the same scenario file; logs and a metrics report are written."""

    help = "Evaluate agents and write the metrics report"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--scenarios", required=True, help="Scenario set JSON file")
        parser.add_argument("--agents", nargs="+", default=["c", "c_per_stage"])
        parser.add_argument(
            "--bank", action="append", default=[], help="agent=checkpoint, repeatable"
        )
        parser.add_argument("--episodes", type=int, default=None, help="Use the first N scenarios")
        parser.add_argument("--variant", default="p_coop", help="Acting instants of c-per-stage")
        parser.add_argument("--workers", type=int, default=None)
        parser.add_argument("--out", required=True, help="Output directory")

    def parse_banks(self, items):
        banks = {}
        for item in items:
            name, sep, path = item.partition("=")
            if not sep:
                raise ConfigurationError(f"--bank expects agent=path, got '{item}'")
            banks[agent_name(name)] = QNetworkBank.load(path)
        return banks

    def handle(self, *args, **options):
        config = self.load_config(options)
        agents = [agent_name(name) for name in options["agents"]]
        banks = self.parse_banks(options["bank"])
        setup = EpisodeSetup.from_run_config(config, load_speed_table(config["speed_table_path"]))
        scenario_path = Path(options["scenarios"])
        scenarios = read_scenarios(scenario_path)
        count = options["episodes"] or config["eval_episodes"]
        scenarios = scenarios[:count]
        digest = file_digest(scenario_path)
        self.stdout.write(f"Scenario digest {digest} ({len(scenarios)} episodes)")

        report, logs_by_agent = evaluate(
            setup,
            scenarios,
            agents,
            banks=banks,
            workers=options["workers"] or config["eval_workers"],
            variant=get_variant(options["variant"], intra_period=config["rl_intra_period"]),
        )
        out = Path(options["out"])
        for agent, logs in logs_by_agent.items():
            (out / "logs" / agent).mkdir(parents=True, exist_ok=True)
            for log in logs:
                log.write_csv(out / "logs" / agent / f"{log.scenario_id}.csv")
            summaries = [log.summary() for log in logs]
            (out / "logs" / agent / "episodes.json").write_text(
                json.dumps({"scenario_digest": digest, "episodes": summaries}, indent=1)
            )
        export_report(report, out)

        scenario_set = ScenarioSet.objects.filter(digest=digest).first()
        report_path = out / "report.json"
        for agent, logs in logs_by_agent.items():
            EvaluationRun.record(
                report_path,
                config,
                agent=agent,
                scenario_set=scenario_set,
                episodes=len(logs),
                deaths=sum(log.died for log in logs),
                mean_stu_speed=(
                    sum(log.speed_mean for log in logs) / len(logs) if logs else None
                ),
                metrics={"scenario_digest": digest},
            )
            self.stdout.write(
                f"{agent}: {sum(log.died for log in logs)} deaths / {len(logs)} episodes"
            )
        self.success(f"Report written to {out}")
