from django.core.management.base import BaseCommand, CommandError

from scenarios.exceptions import ScenarioError
from scenarios.loader import load_scenario


class Command(BaseCommand):
    help = "Parse and validate a scenario file."

    def add_arguments(self, parser):
        parser.add_argument("--scenario", required=True, help="path to a scenario TOML file")

    def handle(self, *args, **options):
        try:
            scenario = load_scenario(options["scenario"])
        except ScenarioError as exc:
            raise CommandError(str(exc), returncode=1)

        self.stdout.write(
            self.style.SUCCESS(
                f"{options['scenario']}: ok "
                f"({scenario.world['width']}x{scenario.world['height']} grid, "
                f"{len(scenario.actors['drones'])} drones, seed {scenario.seed})"
            )
        )
