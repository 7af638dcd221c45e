from typing import Any, Dict, List

from world.models import ZoneMap
from world.utils import WorldBuilder


def fault_grid(world: Dict[str, Any]) -> List[List[float]]:
    if world.get("fault_strength") is not None:
        return world["fault_strength"]
    fault = world["fault"]
    return WorldBuilder.generated_fault_strength(
        world["width"], world["height"], (fault["x"], fault["y"]), fault["decay_cells"]
    )


def population_grid(world: Dict[str, Any]) -> List[List[int]]:
    if world.get("population") is not None:
        return world["population"]
    return [[world["population_per_cell"]] * world["width"] for _ in range(world["height"])]


def build_zone_map(world: Dict[str, Any]) -> ZoneMap:
    cells = WorldBuilder.build_cells(
        world["width"],
        world["height"],
        fault_grid(world),
        population_grid(world),
        world["open_space"],
        world["secure_cells"],
        world["risk_high"],
        world["risk_medium"],
    )
    if world.get("zones"):
        zones = WorldBuilder.explicit_zones(cells, world["zones"])
    else:
        zones = WorldBuilder.zones_by_risk(cells, world["zones_per_risk"])
    return ZoneMap(
        width=world["width"],
        height=world["height"],
        cell_size_m=world["cell_size_m"],
        cells=cells,
        zones=zones,
        stations=dict(enumerate(world["stations"])),
    )
