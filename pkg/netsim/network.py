import logging
from dataclasses import replace
from typing import Any, Dict, Hashable, Iterable, Set

from engine.core import Engine
from world.models import IntensityField
from netsim.models import (
    Delivered,
    Dropped,
    Envelope,
    LinkKind,
    LinkTable,
    RouteChoice,
    SendResult,
)
from netsim.utils import apply_disruption, force_satellite, route

logger = logging.getLogger(__name__)

NETWORK_ACTOR = "Network:0"


class Network:
    """The communication fabric of one simulation instance."""

    def __init__(
        self,
        engine: Engine,
        links: LinkTable,
        satellite_capable: Iterable[Hashable],
        cells: Dict[Hashable, int],
    ):
        self.engine = engine
        self.links = links
        self.satellite_capable: Set[Hashable] = set(satellite_capable)
        self.cells = cells
        self.dead: Set[Hashable] = set()
        self._next_msg_id = 0

    def new_envelope(self, src: Hashable, dst: Hashable, kind: str, body: Dict[str, Any]) -> Envelope:
        envelope = Envelope(
            msg_id=self._next_msg_id,
            src=src,
            dst=dst,
            kind=kind,
            body=body,
            sent_ms=self.engine.clock,
        )
        self._next_msg_id += 1
        return envelope

    def resolve(self, envelope: Envelope) -> RouteChoice:
        if envelope.channel == "satellite":
            return force_satellite(envelope.src, envelope.dst, self.links)
        return route(
            envelope.src,
            envelope.dst,
            self.links,
            self.satellite_capable,
            self.dead,
            allow_satellite=envelope.channel != "terrestrial",
        )

    def send(self, envelope: Envelope) -> SendResult:
        """Freeze the route now and schedule delivery, or trace a drop."""
        if envelope.sent_ms != self.engine.clock:
            raise ValueError(f"message {envelope.msg_id} stamped {envelope.sent_ms}, clock {self.engine.clock}")

        choice = self.resolve(envelope)
        record = {
            "msg_id": envelope.msg_id,
            "src": str(envelope.src),
            "dst": str(envelope.dst),
            "msg_kind": envelope.kind,
            "channel": envelope.channel,
        }

        if not choice.reachable:
            self.engine.emit(str(envelope.src), "msg_drop", record)
            logger.debug("dropped %s from %s to %s", envelope.kind, envelope.src, envelope.dst)
            return Dropped()

        in_flight = replace(envelope, path=list(choice.path), latency_ms=choice.latency_ms)
        at_ms = envelope.sent_ms + choice.latency_ms
        self.engine.emit(
            str(envelope.src),
            "msg_send",
            {
                **record,
                "route": choice.kind.value,
                "path": list(choice.path),
                "latency_ms": choice.latency_ms,
            },
        )
        self.engine.schedule(at_ms, envelope.dst, "deliver", envelope.kind, envelope=in_flight)
        return Delivered(at_ms=at_ms, route=choice)

    def disrupt(self, field: IntensityField, rng, beta: float, hardened_multiplier: float) -> None:
        went_down = apply_disruption(
            self.links, field, rng, self.cells.__getitem__, beta, hardened_multiplier
        )
        for link_id in went_down:
            self._trace_down(link_id, "quake")

    def force_down(self, kinds: Iterable[str] = (), link_ids: Iterable[str] = ()) -> None:
        kinds = {LinkKind(k) for k in kinds} - {LinkKind.SATELLITE}
        targets = set(link_ids)
        for link in self.links:
            if link.kind == LinkKind.SATELLITE or not link.up:
                continue
            if link.kind in kinds or link.link_id in targets:
                link.up = False
                self._trace_down(link.link_id, "forced")

    def mark_dead(self, actor: Hashable) -> None:
        self.dead.add(actor)

    def _trace_down(self, link_id: str, cause: str) -> None:
        link = self.links[link_id]
        self.engine.emit(
            NETWORK_ACTOR,
            "link_down",
            {"link_id": link_id, "link_kind": link.kind.value, "cause": cause},
        )
