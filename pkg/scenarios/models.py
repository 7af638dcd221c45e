from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

SECTIONS = ("world", "actors", "quake", "faults", "run")


def plain(value: Any) -> Any:
    """Serializer output to JSON-ready builtins (dicts, lists, scalars)."""
    if isinstance(value, Mapping):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    return value


@dataclass
class Scenario:
    """A fully resolved scenario: every default filled in."""

    world: Dict[str, Any] = field(default_factory=dict)
    actors: Dict[str, Any] = field(default_factory=dict)
    quake: Dict[str, Any] = field(default_factory=dict)
    faults: Dict[str, Any] = field(default_factory=dict)
    run: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {section: plain(getattr(self, section)) for section in SECTIONS}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Scenario":
        return cls(**{section: plain(data.get(section, {})) for section in SECTIONS})

    @property
    def seed(self) -> int:
        return self.run["seed"]

    @property
    def t_end_ms(self) -> int:
        return self.run["t_end_ms"]

    def with_overrides(self, seed=None, t_end_ms=None) -> "Scenario":
        data = self.to_dict()
        if seed is not None:
            data["run"]["seed"] = int(seed)
        if t_end_ms is not None:
            data["run"]["t_end_ms"] = int(t_end_ms)
        return Scenario.from_dict(data)


@dataclass
class MetricsReport:
    """Run metrics derived from a trace alone."""

    first_full_coverage_ms: Optional[int] = None
    failover_latency_ms: List[Tuple[str, int]] = field(default_factory=list)
    detection_latency_ms: Dict[str, Optional[float]] = field(
        default_factory=lambda: {"min": None, "median": None, "max": None}
    )
    rescued_fraction: Optional[float] = None
    satellite_fallback_count: int = 0
    dropped_message_count: int = 0
    red_alarm_ms: Optional[int] = None

    def rows(self) -> List[Tuple[str, str, Any]]:
        rows = [("first_full_coverage_ms", "", self.first_full_coverage_ms)]
        rows += [("failover_latency_ms", drone, latency) for drone, latency in self.failover_latency_ms]
        rows += [("detection_latency_ms", stat, self.detection_latency_ms[stat]) for stat in ("min", "median", "max")]
        rows += [
            ("rescued_fraction", "", self.rescued_fraction),
            ("satellite_fallback_count", "", self.satellite_fallback_count),
            ("dropped_message_count", "", self.dropped_message_count),
            ("red_alarm_ms", "", self.red_alarm_ms),
        ]
        return rows
