import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from engine.core import Engine
from engine.models import SimEvent
from netsim.models import Envelope, SendResult
from netsim.network import Network
from postquake.models import FleeingPopulation
from world.models import IntensityField, RoadGraph, SurvivorSite, ZoneMap
from actors.models import ActorId, FleetEntry

logger = logging.getLogger(__name__)


@dataclass
class SimulationContext:
    """State shared by one simulation instance.

    ``zone_map`` and the roster never change; ``intensity``, ``roads``,
    ``sites`` and ``population`` are the physical world that the
    environment updates and drones and rescue teams observe.
    """

    zone_map: ZoneMap
    roads: RoadGraph
    params: Dict[str, Any]
    world_params: Dict[str, Any]
    network: Optional[Network] = None
    intensity: Optional[IntensityField] = None
    sites: Dict[int, SurvivorSite] = field(default_factory=dict)
    population: FleeingPopulation = field(default_factory=FleeingPopulation)
    roster: Dict[ActorId, FleetEntry] = field(default_factory=dict)
    sensors: List[ActorId] = field(default_factory=list)
    edge_servers: List[ActorId] = field(default_factory=list)
    ground_stations: List[ActorId] = field(default_factory=list)
    rescue_teams: List[ActorId] = field(default_factory=list)
    initial_nurse: Optional[ActorId] = None


class Actor:
    """Base node: timers, sends, and delivery with msg_id deduplication.

    Handlers are looked up by name: ``on_<message kind>`` for deliveries,
    ``tick_<kind>`` for timers and ``inject_<kind>`` for scenario
    injections. A failed actor ignores deliveries and timers and never
    sends.
    """

    def __init__(self, actor_id: ActorId, sim: SimulationContext):
        self.actor_id = actor_id
        self.sim = sim
        self.failed = False
        self.engine: Optional[Engine] = None
        self.rng = None
        self._seen = set()

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.actor_id}>"

    @property
    def name(self) -> str:
        return str(self.actor_id)

    @property
    def now(self) -> int:
        return self.engine.clock

    @property
    def params(self) -> Dict[str, Any]:
        return self.sim.params

    def bind(self, engine: Engine) -> None:
        self.engine = engine
        self.rng = engine.rng(self.actor_id)

    def trace(self, kind: str, payload: Dict[str, Any]) -> None:
        self.engine.emit(self.name, kind, payload)

    def set_timer(self, delay_ms: int, kind: str, body: Optional[Dict[str, Any]] = None) -> None:
        self.engine.schedule(self.now + int(delay_ms), self.actor_id, "timer", kind, body)

    def send(self, dst: ActorId, kind: str, body: Dict[str, Any], channel: str = "auto") -> Optional[SendResult]:
        if self.failed:
            return None
        envelope = self.sim.network.new_envelope(self.actor_id, dst, kind, body)
        envelope.channel = channel
        return self.sim.network.send(envelope)

    def resend(self, envelope: Envelope, channel: str) -> Optional[SendResult]:
        """Send another copy of an envelope under the same msg_id."""
        if self.failed:
            return None
        copy = Envelope(
            msg_id=envelope.msg_id,
            src=envelope.src,
            dst=envelope.dst,
            kind=envelope.kind,
            body=envelope.body,
            sent_ms=self.now,
            channel=channel,
        )
        return self.sim.network.send(copy)

    def dispatch(self, event: SimEvent) -> None:
        if event.type == "deliver":
            self._deliver(event.envelope)
        elif event.type == "timer":
            if not self.failed:
                getattr(self, f"tick_{event.kind}")(event.body)
        else:
            getattr(self, f"inject_{event.kind}")(event.body)

    def _deliver(self, envelope: Envelope) -> None:
        record = {
            "msg_id": envelope.msg_id,
            "src": str(envelope.src),
            "msg_kind": envelope.kind,
            "channel": envelope.channel,
            "path": list(envelope.path),
            "sent_ms": envelope.sent_ms,
            "latency_ms": envelope.latency_ms,
        }
        if envelope.msg_id in self._seen:
            self.trace("msg_dedup", record)
            return
        self._seen.add(envelope.msg_id)
        self.trace("msg_deliver", {**record, "inert": self.failed})
        if self.failed:
            return

        handler = getattr(self, f"on_{envelope.kind}", None)
        if handler is None:
            logger.debug("%s ignores %s", self, envelope.kind)
            return
        handler(envelope)
