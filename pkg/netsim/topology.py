"""Link layout of the rescue network.

Sensors reach their edge server over wireless; High-risk sensors also have
a hardened point-to-point line to their paired drone. Edge servers talk to
helicopter α and the ground stations. Drones form a wireless mesh with each
other and with both helicopters, and gateway drones bridge the mesh to the
crisis center, ground stations, police and rescue teams. Fixed ground
infrastructure (crisis center, ground stations, police, seismic center) is
wired point-to-point. Every pair of satellite-capable actors shares a
satellite relay link.
"""
from itertools import combinations
from typing import Any, Dict, Iterable, List, Optional

from actors.models import ALPHA, BETA, CRISIS, POLICE, SEISMIC, ActorId
from netsim.models import Link, LinkKind, LinkTable
from world.models import RiskLevel

PREFIX = {
    LinkKind.POINT_TO_POINT: "p2p",
    LinkKind.WIRELESS: "wl",
    LinkKind.SATELLITE: "sat",
}


def link_id(kind: LinkKind, a: ActorId, b: ActorId) -> str:
    first, second = sorted((a, b))
    return f"{PREFIX[kind]}:{first}~{second}"


class TopologyBuilder:
    def __init__(self, params: Dict[str, Any]):
        self.params = params
        self.table = LinkTable()
        self.latency = {
            LinkKind.POINT_TO_POINT: params["latency_p2p_ms"],
            LinkKind.WIRELESS: params["latency_wireless_ms"],
            LinkKind.SATELLITE: params["latency_satellite_ms"],
        }

    def connect(
        self,
        kind: LinkKind,
        a: ActorId,
        b: ActorId,
        hardened: bool = False,
        reliability: float = 1.0,
    ) -> Optional[Link]:
        identifier = link_id(kind, a, b)
        if identifier in self.table.links:
            return None
        return self.table.add(
            Link(
                link_id=identifier,
                endpoints=tuple(sorted((a, b))),
                kind=kind,
                base_latency_ms=self.latency[kind],
                hardened=hardened,
                reliability=reliability,
            )
        )

    def sensors(self, sensors: Dict[ActorId, Any]) -> None:
        for sensor, state in sorted(sensors.items()):
            reliability = (
                self.params["medium_zone_multiplier"] if state.risk == RiskLevel.MEDIUM else 1.0
            )
            self.connect(LinkKind.WIRELESS, sensor, state.edge, reliability=reliability)
            if state.paired_drone is not None:
                self.connect(LinkKind.POINT_TO_POINT, sensor, state.paired_drone, hardened=True)

    def edge_layer(self, edge_servers: Iterable[ActorId], ground_stations: List[ActorId]) -> None:
        for edge in edge_servers:
            self.connect(LinkKind.WIRELESS, edge, ALPHA)
            for station in ground_stations:
                self.connect(LinkKind.WIRELESS, edge, station)

    def drone_mesh(self, drones: List[ActorId]) -> None:
        self.connect(LinkKind.WIRELESS, ALPHA, BETA)
        for drone in drones:
            self.connect(LinkKind.WIRELESS, drone, ALPHA)
            self.connect(LinkKind.WIRELESS, drone, BETA)
            self.connect(LinkKind.POINT_TO_POINT, drone, SEISMIC)
        for a, b in combinations(drones, 2):
            self.connect(LinkKind.WIRELESS, a, b)

    def gateways(
        self,
        gateways: List[ActorId],
        ground_stations: List[ActorId],
        rescue_teams: List[ActorId],
    ) -> None:
        for gateway in gateways:
            for peer in [CRISIS, POLICE, *ground_stations, *rescue_teams]:
                self.connect(LinkKind.WIRELESS, gateway, peer)

    def ground(self, ground_stations: List[ActorId]) -> None:
        self.connect(LinkKind.POINT_TO_POINT, CRISIS, SEISMIC)
        self.connect(LinkKind.POINT_TO_POINT, CRISIS, POLICE)
        for station in ground_stations:
            self.connect(LinkKind.POINT_TO_POINT, CRISIS, station)

    def satellites(self, capable: Iterable[ActorId]) -> None:
        for a, b in combinations(sorted(set(capable)), 2):
            self.connect(LinkKind.SATELLITE, a, b)


def build_link_table(
    params: Dict[str, Any],
    sensors: Dict[ActorId, Any],
    edge_servers: List[ActorId],
    drones: List[ActorId],
    gateways: List[ActorId],
    ground_stations: List[ActorId],
    rescue_teams: List[ActorId],
) -> LinkTable:
    builder = TopologyBuilder(params)
    builder.sensors(sensors)
    builder.edge_layer(edge_servers, ground_stations)
    builder.drone_mesh(drones)
    builder.gateways(gateways, ground_stations, rescue_teams)
    builder.ground(ground_stations)
    builder.satellites(satellite_capable(drones, ground_stations))
    return builder.table


def satellite_capable(drones: Iterable[ActorId], ground_stations: Iterable[ActorId]) -> List[ActorId]:
    return sorted({ALPHA, BETA, CRISIS, SEISMIC, *drones, *ground_stations})
