from dataclasses import dataclass, field
from typing import Dict, List, Set, Tuple


@dataclass(frozen=True)
class ScanReport:
    drone: str
    t_ms: int
    detected: Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class CongestionReport:
    drone: str
    t_ms: int
    edges: Tuple[int, ...]


@dataclass(frozen=True)
class RouteAdvisory:
    origin: int
    destination: int
    path: Tuple[int, ...]
    length_m: float
    issued_ms: int

    def as_body(self) -> dict:
        return {
            "origin": self.origin,
            "destination": self.destination,
            "path": list(self.path),
            "length_m": self.length_m,
        }


# (current cell, remaining edge ids)
Group = Tuple[int, Tuple[int, ...]]


@dataclass
class FleeingPopulation:
    """Agents on the move, grouped by position and planned route."""

    initial: int = 0
    sheltered: int = 0
    started: bool = False
    groups: Dict[Group, int] = field(default_factory=dict)
    loads: Dict[int, int] = field(default_factory=dict)
    advisories: Dict[int, RouteAdvisory] = field(default_factory=dict)
    secure: Set[int] = field(default_factory=set)

    @property
    def fleeing(self) -> int:
        return sum(self.groups.values())

    def congested(self, capacity_of) -> List[int]:
        return sorted(e for e, load in self.loads.items() if load > capacity_of(e))
