import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import networkx as nx
from django.db import models


class RiskLevel(models.TextChoices):
    HIGH = "High", "High risk"
    MEDIUM = "Medium", "Medium risk"
    LOW = "Low", "Low risk"

    @property
    def rank(self) -> int:
        return {"High": 3, "Medium": 2, "Low": 1}[self.value]


@dataclass(frozen=True)
class Cell:
    cell_id: int
    x: int
    y: int
    fault_strength: float
    population: int
    open_space: bool
    risk: RiskLevel
    predefined_secure: bool = False


@dataclass(frozen=True)
class Zone:
    zone_id: int
    cell_ids: Tuple[int, ...]
    risk: RiskLevel


@dataclass
class ZoneMap:
    width: int
    height: int
    cell_size_m: float
    cells: List[Cell]
    zones: List[Zone]
    stations: Dict[int, int] = field(default_factory=dict)

    def cell(self, cell_id: int) -> Cell:
        return self.cells[cell_id]

    def cell_at(self, x: int, y: int) -> Cell:
        return self.cells[y * self.width + x]

    def zone(self, zone_id: int) -> Zone:
        return next(zone for zone in self.zones if zone.zone_id == zone_id)

    def centroid(self, zone_id: int) -> Tuple[float, float]:
        """Mean cell coordinates of a zone."""
        members = [self.cells[c] for c in self.zone(zone_id).cell_ids]
        return (
            sum(c.x for c in members) / len(members),
            sum(c.y for c in members) / len(members),
        )

    def distance_m(self, a: Tuple[float, float], b: Tuple[float, float]) -> float:
        return math.hypot(a[0] - b[0], a[1] - b[1]) * self.cell_size_m

    def station_xy(self, station_id: int) -> Tuple[float, float]:
        cell = self.cells[self.stations[station_id]]
        return (float(cell.x), float(cell.y))


@dataclass(frozen=True)
class EarthquakeEvent:
    epicenter: Tuple[float, float]
    magnitude: float
    t_ms: int


IntensityField = Dict[int, float]


@dataclass
class SurvivorSite:
    cell_id: int
    total: int
    detected: int = 0
    rescued: int = 0
    first_detected_ms: Optional[int] = None

    @property
    def undetected(self) -> int:
        return self.total - self.detected

    @property
    def awaiting_rescue(self) -> int:
        return self.detected - self.rescued

    def as_dict(self) -> dict:
        return {
            "cell": self.cell_id,
            "total": self.total,
            "detected": self.detected,
            "rescued": self.rescued,
            "first_detected_ms": self.first_detected_ms,
        }


class RoadGraph:
    """Undirected road network over cell ids.

    Edges are stored on a networkx graph; each carries ``edge_id``,
    ``length_m``, ``capacity`` and ``blocked``.
    """

    def __init__(self, graph: Optional[nx.Graph] = None):
        self.graph = graph if graph is not None else nx.Graph()
        self._by_id: Dict[int, Tuple[int, int]] = {}
        for u, v, data in self.graph.edges(data=True):
            self._by_id[data["edge_id"]] = (min(u, v), max(u, v))

    def add_edge(self, edge_id: int, u: int, v: int, length_m: float, capacity: int):
        if length_m <= 0 or capacity < 0:
            raise ValueError(f"road {edge_id}: bad length or capacity")
        self.graph.add_edge(
            u, v, edge_id=edge_id, length_m=length_m, capacity=capacity, blocked=False
        )
        self._by_id[edge_id] = (min(u, v), max(u, v))

    def endpoints(self, edge_id: int) -> Tuple[int, int]:
        return self._by_id[edge_id]

    def edge(self, edge_id: int) -> dict:
        u, v = self._by_id[edge_id]
        return self.graph.edges[u, v]

    def edge_ids(self) -> List[int]:
        return sorted(self._by_id)

    def is_blocked(self, edge_id: int) -> bool:
        return self.edge(edge_id)["blocked"]

    def blocked_ids(self) -> List[int]:
        return [e for e in self.edge_ids() if self.is_blocked(e)]

    def copy(self) -> "RoadGraph":
        return RoadGraph(self.graph.copy())
