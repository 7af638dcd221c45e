import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import tomli

from scenarios.exceptions import ScenarioError
from scenarios.models import SECTIONS, Scenario
from scenarios.serializer import ScenarioSerializer

logger = logging.getLogger(__name__)


def flatten_errors(errors: Any, prefix: str = "") -> List[str]:
    """Serializer errors as ``section.field[index]: message`` lines."""
    if isinstance(errors, dict):
        lines = []
        for key, value in errors.items():
            name = key if key != "non_field_errors" else ""
            path = ".".join(p for p in (prefix, name) if p)
            lines += flatten_errors(value, path)
        return lines
    if isinstance(errors, list):
        if all(not isinstance(e, (dict, list)) for e in errors):
            return [f"{prefix}: {e}" if prefix else str(e) for e in errors]
        lines = []
        for index, value in enumerate(errors):
            if value:
                lines += flatten_errors(value, f"{prefix}[{index}]")
        return lines
    return [f"{prefix}: {errors}" if prefix else str(errors)]


def validate_scenario(data: Dict[str, Any]) -> Scenario:
    unknown = sorted(set(data) - set(SECTIONS))
    if unknown:
        raise ScenarioError(f"unknown section {unknown[0]!r}", unknown[0])

    data = {section: data.get(section) or {} for section in SECTIONS}
    serializer = ScenarioSerializer(data=data)
    if not serializer.is_valid():
        lines = flatten_errors(serializer.errors)
        first = lines[0] if lines else "invalid scenario"
        field, _, message = first.partition(": ")
        raise ScenarioError(message or first, field if message else "")
    return Scenario.from_dict(serializer.validated_data)


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        with open(path, "rb") as handle:
            data = tomli.load(handle)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file {path} does not exist")
    except tomli.TOMLDecodeError as exc:
        raise ScenarioError(f"{path}: {exc}")

    scenario = validate_scenario(data)
    logger.info("loaded scenario %s (seed %d)", path, scenario.seed)
    return scenario
