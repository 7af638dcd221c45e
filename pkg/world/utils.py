import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from rest_framework import serializers

from rescue_network.defaults import DEFAULTS
from world.models import (
    Cell,
    EarthquakeEvent,
    IntensityField,
    RiskLevel,
    RoadGraph,
    SurvivorSite,
    Zone,
    ZoneMap,
)

logger = logging.getLogger(__name__)

WORLD = DEFAULTS["world"]


def classify_risk(
    fault_strength: float,
    high: float = WORLD["risk_high"],
    medium: float = WORLD["risk_medium"],
) -> RiskLevel:
    if not 0.0 <= fault_strength <= 1.0:
        raise serializers.ValidationError(
            f"fault_strength must be within [0, 1], got {fault_strength}"
        )

    if fault_strength >= high:
        return RiskLevel.HIGH
    if fault_strength >= medium:
        return RiskLevel.MEDIUM
    return RiskLevel.LOW


def intensity_at(
    quake: EarthquakeEvent,
    cell: Cell,
    attenuation_m: float = WORLD["attenuation_m"],
    cell_size_m: float = WORLD["cell_size_m"],
) -> float:
    """Exponential attenuation ``M * exp(-d / attenuation_m)``."""
    if attenuation_m <= 0:
        raise serializers.ValidationError("attenuation_m must be positive")

    distance = math.hypot(cell.x - quake.epicenter[0], cell.y - quake.epicenter[1])
    return quake.magnitude * math.exp(-distance * cell_size_m / attenuation_m)


def intensity_field(
    zone_map: ZoneMap,
    quake: EarthquakeEvent,
    attenuation_m: float = WORLD["attenuation_m"],
    previous: Optional[IntensityField] = None,
) -> IntensityField:
    """Intensity for every cell; merged cell-wise with ``previous`` by maximum."""
    field = {
        cell.cell_id: intensity_at(quake, cell, attenuation_m, zone_map.cell_size_m)
        for cell in zone_map.cells
    }
    if previous:
        field = {c: max(v, previous.get(c, 0.0)) for c, v in field.items()}
    return field


def collapse_probability(
    intensity: float,
    midpoint: float = WORLD["collapse_midpoint"],
    slope: float = WORLD["collapse_slope"],
) -> float:
    return 1.0 / (1.0 + math.exp(-(intensity - midpoint) / slope))


def seed_survivors(
    zone_map: ZoneMap,
    field: IntensityField,
    trap_rate: float,
    rng: np.random.Generator,
    midpoint: float = WORLD["collapse_midpoint"],
    slope: float = WORLD["collapse_slope"],
) -> List[SurvivorSite]:
    if not 0.0 <= trap_rate <= 1.0:
        raise serializers.ValidationError("trap_rate must be within [0, 1]")

    sites = []
    for cell in zone_map.cells:
        if cell.population == 0:
            continue
        p = collapse_probability(field[cell.cell_id], midpoint, slope) * trap_rate
        total = int(rng.binomial(cell.population, p))
        if total > 0:
            sites.append(SurvivorSite(cell_id=cell.cell_id, total=total))

    logger.debug("seeded %d survivor sites", len(sites))
    return sites


def block_roads(
    roads: RoadGraph,
    field: IntensityField,
    block_factor: float,
    rng: np.random.Generator,
    midpoint: float = WORLD["collapse_midpoint"],
    slope: float = WORLD["collapse_slope"],
) -> RoadGraph:
    """Return a copy of ``roads`` with quake damage applied.

    One draw per edge in edge id order, blocked or not, so the stream
    advances identically across calls.
    """
    if not 0.0 <= block_factor <= 1.0:
        raise serializers.ValidationError("block_factor must be within [0, 1]")

    damaged = roads.copy()
    for edge_id in damaged.edge_ids():
        u, v = damaged.endpoints(edge_id)
        p = collapse_probability(max(field[u], field[v]), midpoint, slope)
        draw = rng.random()
        if draw < p * block_factor:
            damaged.edge(edge_id)["blocked"] = True
    return damaged


class WorldBuilder:
    @staticmethod
    def build_cells(
        width: int,
        height: int,
        fault_strength: Sequence[Sequence[float]],
        population: Sequence[Sequence[int]],
        open_space: Iterable[int],
        secure_cells: Iterable[int],
        risk_high: float = WORLD["risk_high"],
        risk_medium: float = WORLD["risk_medium"],
    ) -> List[Cell]:
        open_space = set(open_space)
        secure_cells = set(secure_cells)
        cells = []
        for y in range(height):
            for x in range(width):
                cell_id = y * width + x
                strength = float(fault_strength[y][x])
                cells.append(
                    Cell(
                        cell_id=cell_id,
                        x=x,
                        y=y,
                        fault_strength=strength,
                        population=int(population[y][x]),
                        open_space=cell_id in open_space,
                        risk=classify_risk(strength, risk_high, risk_medium),
                        predefined_secure=cell_id in secure_cells,
                    )
                )
        return cells

    @staticmethod
    def generated_fault_strength(
        width: int, height: int, fault: Sequence[float], decay_cells: float
    ) -> List[List[float]]:
        """Strength decaying exponentially with distance from a fault point."""
        return [
            [
                round(math.exp(-math.hypot(x - fault[0], y - fault[1]) / decay_cells), 4)
                for x in range(width)
            ]
            for y in range(height)
        ]

    @staticmethod
    def zones_by_risk(cells: List[Cell], zones_per_risk: int) -> List[Zone]:
        """Split each risk class into contiguous chunks of cell ids."""
        zones = []
        for risk in (RiskLevel.HIGH, RiskLevel.MEDIUM, RiskLevel.LOW):
            members = [c.cell_id for c in cells if c.risk == risk]
            if not members:
                continue
            chunks = np.array_split(np.array(members), min(zones_per_risk, len(members)))
            for chunk in chunks:
                zones.append(
                    Zone(
                        zone_id=len(zones),
                        cell_ids=tuple(int(c) for c in chunk),
                        risk=risk,
                    )
                )
        return zones

    @staticmethod
    def explicit_zones(cells: List[Cell], members: Sequence[Sequence[int]]) -> List[Zone]:
        zones = []
        for zone_id, cell_ids in enumerate(members):
            risk = max((cells[c].risk for c in cell_ids), key=lambda r: r.rank)
            zones.append(Zone(zone_id=zone_id, cell_ids=tuple(cell_ids), risk=risk))
        return zones

    @staticmethod
    def grid_roads(zone_map: ZoneMap, capacity: int) -> RoadGraph:
        """4-connected grid; edge ids follow (cell id, right before down) order."""
        roads = RoadGraph()
        roads.graph.add_nodes_from(c.cell_id for c in zone_map.cells)
        edge_id = 0
        for cell in zone_map.cells:
            if cell.x + 1 < zone_map.width:
                roads.add_edge(
                    edge_id, cell.cell_id, cell.cell_id + 1, zone_map.cell_size_m, capacity
                )
                edge_id += 1
            if cell.y + 1 < zone_map.height:
                roads.add_edge(
                    edge_id,
                    cell.cell_id,
                    cell.cell_id + zone_map.width,
                    zone_map.cell_size_m,
                    capacity,
                )
                edge_id += 1
        return roads


def zone_intensity(zone_map: ZoneMap, field: IntensityField, zone_id: int) -> float:
    return max(field[c] for c in zone_map.zone(zone_id).cell_ids)


def survivor_totals(sites: Iterable[SurvivorSite]) -> Dict[str, int]:
    sites = list(sites)
    return {
        "total": sum(s.total for s in sites),
        "detected": sum(s.detected for s in sites),
        "rescued": sum(s.rescued for s in sites),
    }
