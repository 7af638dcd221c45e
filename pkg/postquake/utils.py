import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from rescue_network.defaults import DEFAULTS
from world.graphs import lexicographic_shortest_path
from world.models import IntensityField, RoadGraph, SurvivorSite, ZoneMap
from world.utils import collapse_probability
from postquake.models import (
    CongestionReport,
    FleeingPopulation,
    RouteAdvisory,
    ScanReport,
)

logger = logging.getLogger(__name__)

WORLD = DEFAULTS["world"]


def within_radius(zone_map: ZoneMap, position: Tuple[float, float], cell_id: int, radius: float) -> bool:
    cell = zone_map.cell(cell_id)
    return math.hypot(cell.x - position[0], cell.y - position[1]) <= radius


def scan_for_survivors(
    drone: str,
    position: Tuple[float, float],
    sites: Sequence[SurvivorSite],
    zone_map: ZoneMap,
    radius: float,
    detect_prob: float,
    rng,
    now_ms: int,
) -> ScanReport:
    """Each undetected survivor in range is found with ``detect_prob``.

    Updates the sites in place; one binomial draw per in-range site in cell
    id order.
    """
    detected = []
    for site in sorted(sites, key=lambda s: s.cell_id):
        if not within_radius(zone_map, position, site.cell_id, radius):
            continue
        found = rng.binomial(site.undetected, detect_prob) if site.undetected else 0
        if found:
            site.detected += found
            if site.first_detected_ms is None:
                site.first_detected_ms = now_ms
            detected.append((site.cell_id, found))
    return ScanReport(drone=drone, t_ms=now_ms, detected=tuple(detected))


def detect_congestion(
    drone: str,
    position: Tuple[float, float],
    roads: RoadGraph,
    loads: Dict[int, int],
    zone_map: ZoneMap,
    radius: float,
    now_ms: int,
) -> Optional[CongestionReport]:
    congested = []
    for edge_id, load in sorted(loads.items()):
        edge = roads.edge(edge_id)
        if load <= edge["capacity"]:
            continue
        u, v = roads.endpoints(edge_id)
        if within_radius(zone_map, position, u, radius) or within_radius(zone_map, position, v, radius):
            congested.append(edge_id)
    if not congested:
        return None
    return CongestionReport(drone=drone, t_ms=now_ms, edges=tuple(congested))


def congested_cells(roads: RoadGraph, edge_ids: Iterable[int]) -> Set[int]:
    cells = set()
    for edge_id in edge_ids:
        cells.update(roads.endpoints(edge_id))
    return cells


def designate_secure_areas(
    zone_map: ZoneMap,
    field: IntensityField,
    congested: Iterable[int],
    safe_intensity: float = WORLD["safe_intensity"],
) -> Set[int]:
    congested = set(congested)
    secure = {c.cell_id for c in zone_map.cells if c.predefined_secure}
    secure.update(
        c.cell_id
        for c in zone_map.cells
        if c.open_space and field[c.cell_id] < safe_intensity and c.cell_id not in congested
    )
    return secure


def compute_safe_route(
    roads: RoadGraph,
    src: int,
    secure: Iterable[int],
    congested_edges: Iterable[int] = (),
    now_ms: int = 0,
) -> Optional[RouteAdvisory]:
    """Shortest open path to the nearest secure cell, or None (no route)."""
    secure = set(secure)
    if not secure:
        raise ValueError("compute_safe_route needs at least one secure cell")
    avoid = set(congested_edges)

    def usable(node, neighbour, data):
        return not data["blocked"] and data["edge_id"] not in avoid

    path = lexicographic_shortest_path(
        roads.graph, src, secure, weight="length_m", edge_key="edge_id", usable=usable
    )
    if path is None:
        return None
    return RouteAdvisory(
        origin=src,
        destination=path.target,
        path=path.edge_ids,
        length_m=path.cost,
        issued_ms=now_ms,
    )


def priority_score(site, field: IntensityField) -> float:
    return (site.detected - site.rescued) * collapse_probability(field[site.cell_id])


def rank_sites(sites: Iterable, field: IntensityField) -> List:
    """Eligible sites by descending score, earlier detection, lower cell id."""
    eligible = [s for s in sites if s.detected > 0 and s.detected > s.rescued]
    return sorted(
        eligible,
        key=lambda s: (
            -priority_score(s, field),
            s.first_detected_ms if s.first_detected_ms is not None else math.inf,
            s.cell_id,
        ),
    )


def start_flight(zone_map: ZoneMap, secure: Set[int], flee_fraction: float) -> FleeingPopulation:
    population = FleeingPopulation(started=True, secure=set(secure))
    for cell in zone_map.cells:
        if cell.cell_id in secure:
            continue
        agents = int(cell.population * flee_fraction)
        if agents:
            population.groups[(cell.cell_id, ())] = agents
    population.initial = population.fleeing
    return population


def _next_cell(roads: RoadGraph, cell: int, edge_id: int) -> int:
    u, v = roads.endpoints(edge_id)
    return v if u == cell else u


def population_flow_step(population: FleeingPopulation, roads: RoadGraph) -> int:
    """Advance every group one edge; returns the number newly sheltered.

    Groups standing on a cell that became secure shelter in place. Groups
    without a plan take the advisory for their cell, else the
    greedy nearest-secure route over unblocked edges. A group whose next
    edge is blocked re-plans greedily; a group with no route stays put.
    """
    population.loads = {}
    if not population.started:
        return 0

    sheltered = 0
    moved: Dict[Tuple[int, Tuple[int, ...]], int] = {}
    for (cell, plan), agents in sorted(population.groups.items()):
        if cell in population.secure:
            sheltered += agents
            continue
        if plan and roads.is_blocked(plan[0]):
            plan = ()
        if not plan:
            advisory = population.advisories.get(cell)
            if advisory and advisory.path and not any(roads.is_blocked(e) for e in advisory.path):
                plan = advisory.path
            elif population.secure:
                greedy = compute_safe_route(roads, cell, population.secure)
                plan = greedy.path if greedy else ()
        if not plan:
            moved[(cell, ())] = moved.get((cell, ()), 0) + agents
            continue

        edge_id, rest = plan[0], plan[1:]
        population.loads[edge_id] = population.loads.get(edge_id, 0) + agents
        arrived = _next_cell(roads, cell, edge_id)
        if arrived in population.secure:
            sheltered += agents
            continue
        moved[(arrived, rest)] = moved.get((arrived, rest), 0) + agents

    population.groups = moved
    population.sheltered += sheltered
    return sheltered


def adopt_advisory(population: FleeingPopulation, advisory: RouteAdvisory) -> None:
    """Groups at the advisory's origin switch to the advised path."""
    population.advisories[advisory.origin] = advisory
    regrouped: Dict[Tuple[int, Tuple[int, ...]], int] = {}
    for (cell, plan), agents in population.groups.items():
        key = (cell, advisory.path) if cell == advisory.origin else (cell, plan)
        regrouped[key] = regrouped.get(key, 0) + agents
    population.groups = regrouped
