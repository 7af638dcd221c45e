import logging

from django.core.management.base import BaseCommand, CommandError

from engine.exceptions import InvariantViolation
from scenarios.builder import build_simulation
from scenarios.exceptions import ScenarioError
from scenarios.loader import load_scenario

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Run a scenario and write its JSON Lines trace."

    def add_arguments(self, parser):
        parser.add_argument("--scenario", required=True, help="path to a scenario TOML file")
        parser.add_argument("--seed", type=int, help="override run.seed")
        parser.add_argument("--until", type=int, dest="until", help="override run.t_end_ms")
        parser.add_argument("--trace", help="trace output path (default: stdout)")
        parser.add_argument(
            "--check-invariants",
            action="store_true",
            help="assert every invariant after each dispatched event",
        )

    def handle(self, *args, **options):
        try:
            scenario = load_scenario(options["scenario"]).with_overrides(
                seed=options["seed"], t_end_ms=options["until"]
            )
        except ScenarioError as exc:
            raise CommandError(str(exc), returncode=1)

        simulation = None
        try:
            simulation = build_simulation(scenario, check_invariants=options["check_invariants"])
            simulation.run()
        except InvariantViolation as exc:
            self.write_trace(simulation, options["trace"])
            raise CommandError(
                f"invariant {exc.name} violated at t={exc.t_ms}ms: {exc.detail}", returncode=3
            )
        except Exception as exc:
            logger.exception("simulation failed")
            raise CommandError(f"internal error: {exc}", returncode=2)

        self.write_trace(simulation, options["trace"])

    def write_trace(self, simulation, path) -> None:
        if simulation is None:
            return
        if path:
            simulation.trace.write(path)
        else:
            self.stdout.write(simulation.trace.to_jsonl(), ending="")
