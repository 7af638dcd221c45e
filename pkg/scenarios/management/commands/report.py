from django.core.management.base import BaseCommand, CommandError

from engine.trace import read_trace
from scenarios.metrics import compute_metrics, metrics_csv, summary, write_metrics_csv


class Command(BaseCommand):
    help = "Compute run metrics from a trace file."

    def add_arguments(self, parser):
        parser.add_argument("--trace", required=True, help="path to a JSON Lines trace")
        parser.add_argument("--csv", help="metrics CSV output path (default: stdout)")

    def handle(self, *args, **options):
        try:
            report = compute_metrics(read_trace(options["trace"]))
        except FileNotFoundError:
            raise CommandError(f"trace file {options['trace']} does not exist", returncode=1)
        except (ValueError, KeyError, TypeError) as exc:
            raise CommandError(str(exc), returncode=1)

        if options["csv"]:
            write_metrics_csv(report, options["csv"])
            out = self.stdout
        else:
            self.stdout.write(metrics_csv(report), ending="")
            out = self.stderr
        for line in summary(report):
            out.write(line)
