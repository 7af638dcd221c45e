import logging
from typing import Callable, Collection, Hashable, List

from rescue_network.defaults import DEFAULTS
from world.graphs import lexicographic_shortest_path
from world.models import IntensityField
from netsim.models import NO_PATH, LinkKind, LinkTable, RouteChoice, RouteKind

logger = logging.getLogger(__name__)

ACTORS = DEFAULTS["actors"]


def down_probability(
    intensity: float,
    beta: float = ACTORS["disruption_beta"],
    multiplier: float = 1.0,
) -> float:
    return min(1.0, beta * intensity / 10.0) * multiplier


def apply_disruption(
    links: LinkTable,
    field: IntensityField,
    rng,
    cell_of: Callable[[Hashable], int],
    beta: float = ACTORS["disruption_beta"],
    hardened_multiplier: float = ACTORS["hardened_multiplier"],
) -> List[str]:
    """Sample quake damage; returns the ids of links that went down.

    One draw per terrestrial link in id order. Intensity is read at the
    cell of the lower endpoint; satellite links are never touched.
    """
    went_down = []
    for link in links:
        if link.kind == LinkKind.SATELLITE:
            continue
        multiplier = link.reliability
        if link.hardened:
            multiplier *= hardened_multiplier
        p = down_probability(field[cell_of(min(link.endpoints))], beta, multiplier)
        draw = rng.random()
        if link.up and draw < p:
            link.up = False
            went_down.append(link.link_id)
    return went_down


def route(
    src: Hashable,
    dst: Hashable,
    links: LinkTable,
    satellite_capable: Collection[Hashable] = (),
    dead: Collection[Hashable] = (),
    allow_satellite: bool = True,
) -> RouteChoice:
    """Preference: direct point-to-point, wireless mesh, satellite, none."""
    if src == dst:
        raise ValueError("route needs distinct endpoints")

    for link in links.between(src, dst, LinkKind.POINT_TO_POINT):
        if link.up:
            return RouteChoice(RouteKind.DIRECT, (link.link_id,), link.base_latency_ms)

    def usable(node, neighbour, data):
        return data["link"].up and (neighbour == dst or neighbour not in dead)

    path = lexicographic_shortest_path(
        links.wireless, src, {dst}, weight="latency", edge_key="link_id", usable=usable
    )
    if path is not None:
        return RouteChoice(RouteKind.MULTIHOP, path.edge_ids, int(path.cost))

    if allow_satellite and src in satellite_capable and dst in satellite_capable:
        return force_satellite(src, dst, links)

    return NO_PATH


def force_satellite(src: Hashable, dst: Hashable, links: LinkTable) -> RouteChoice:
    relay = links.between(src, dst, LinkKind.SATELLITE)
    if not relay:
        return NO_PATH
    return RouteChoice(RouteKind.SATELLITE_RELAY, (relay[0].link_id,), relay[0].base_latency_ms)
