"""
Management command printing death and surplus summaries of a metrics report.

Usage: python manage.py report --input runs/evaluation/report.json [--out runs/export]
"""

from core.management.base import PicklingCommand
from harness.reports import FORMATS, death_table, export_report, read_report, surplus_frame


class Command(PicklingCommand):
    """Death counts per stage combination and speed surplus of the RL agents."""

    help = "Summarize a metrics report (and optionally re-export it)"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--input", required=True, help="report.json or report.csv")
        parser.add_argument("--out", default=None, help="Directory to re-export into")
        parser.add_argument("--format", choices=FORMATS, action="append", default=None)

    def handle(self, *args, **options):
        report = read_report(options["input"])
        if not report.rows:
            self.stdout.write("Report is empty")
        else:
            self.stdout.write("Deaths per stage combination:")
            self.stdout.write(death_table(report).to_string())
            rates = report.table("death_rate")
            for agent in sorted(rates):
                self.stdout.write(f"  {agent}: death rate {100 * rates[agent]['all']:.1f}%")
            surplus = surplus_frame(report)
            if not surplus.empty:
                self.stdout.write("Speed surplus over the conservative agents, %:")
                self.stdout.write(surplus.round(2).to_string(index=False))
        if options["out"]:
            export_report(report, options["out"], options["format"] or FORMATS)
        self.success(f"Read {len(report.rows)} report rows from {options['input']}")
