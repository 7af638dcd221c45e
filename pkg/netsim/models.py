from dataclasses import dataclass, field
from typing import Any, Dict, Hashable, List, Tuple, Union

import networkx as nx
from django.db import models


class LinkKind(models.TextChoices):
    POINT_TO_POINT = "PointToPoint", "Point to point"
    WIRELESS = "Wireless", "Wireless"
    SATELLITE = "Satellite", "Satellite"


@dataclass
class Link:
    link_id: str
    endpoints: Tuple[Hashable, Hashable]
    kind: LinkKind
    base_latency_ms: int
    up: bool = True
    hardened: bool = False
    # disruption probability multiplier (M-zone sensors, hardened pairs)
    reliability: float = 1.0

    def __post_init__(self):
        if self.base_latency_ms <= 0:
            raise ValueError(f"{self.link_id}: latency must be positive")
        if self.hardened and self.kind != LinkKind.POINT_TO_POINT:
            raise ValueError(f"{self.link_id}: only point-to-point links are hardened")

    def other(self, actor: Hashable) -> Hashable:
        a, b = self.endpoints
        return b if actor == a else a


@dataclass
class Envelope:
    msg_id: int
    src: Hashable
    dst: Hashable
    kind: str
    body: Dict[str, Any]
    sent_ms: int
    path: List[str] = field(default_factory=list)
    latency_ms: int = 0
    channel: str = "auto"


class RouteKind(models.TextChoices):
    DIRECT = "Direct"
    MULTIHOP = "Multihop"
    SATELLITE_RELAY = "SatelliteRelay"
    NO_PATH = "NoPath"


@dataclass(frozen=True)
class RouteChoice:
    kind: RouteKind
    path: Tuple[str, ...] = ()
    latency_ms: int = 0

    @property
    def reachable(self) -> bool:
        return self.kind != RouteKind.NO_PATH


NO_PATH = RouteChoice(RouteKind.NO_PATH)


@dataclass(frozen=True)
class Delivered:
    at_ms: int
    route: RouteChoice


@dataclass(frozen=True)
class Dropped:
    reason: str = "no_path"


SendResult = Union[Delivered, Dropped]


class LinkTable:
    """Links keyed by id, with a pair index and a wireless mesh graph."""

    def __init__(self, links=()):
        self.links: Dict[str, Link] = {}
        self._pairs: Dict[frozenset, List[str]] = {}
        self.wireless = nx.Graph()
        for link in links:
            self.add(link)

    def __iter__(self):
        return iter(self.links[link_id] for link_id in sorted(self.links))

    def __len__(self) -> int:
        return len(self.links)

    def __getitem__(self, link_id: str) -> Link:
        return self.links[link_id]

    def add(self, link: Link) -> Link:
        if link.link_id in self.links:
            raise ValueError(f"duplicate link {link.link_id}")
        self.links[link.link_id] = link
        self._pairs.setdefault(frozenset(link.endpoints), []).append(link.link_id)
        if link.kind == LinkKind.WIRELESS:
            a, b = link.endpoints
            if self.wireless.has_edge(a, b):
                raise ValueError(f"second wireless link between {a} and {b}")
            self.wireless.add_edge(
                a, b, link_id=link.link_id, latency=link.base_latency_ms, link=link
            )
        return link

    def between(self, a: Hashable, b: Hashable, kind: LinkKind) -> List[Link]:
        return [
            self.links[i]
            for i in sorted(self._pairs.get(frozenset((a, b)), ()))
            if self.links[i].kind == kind
        ]
