"""Run-time invariant checks, registered on the engine by ``run --check-invariants``.

Each check returns None when the invariant holds, else a description of
the violation. Checks that read the trace only look at records appended
since their previous call.
"""
from typing import TYPE_CHECKING, Dict, List, Optional, Set, Tuple

from actors.models import (
    ALPHA,
    BETA,
    CRISIS,
    ActorId,
    ActorKind,
    AlarmLevel,
    DroneRole,
    DroneStatus,
)

if TYPE_CHECKING:
    from scenarios.builder import Simulation

ALARM_RANK = {AlarmLevel.GREEN: 0, AlarmLevel.YELLOW: 1, AlarmLevel.RED: 2}


class InvariantChecks:
    def __init__(self, simulation: "Simulation"):
        self.simulation = simulation
        self.context = simulation.context
        self.detected: Dict[int, int] = {}
        self.alarm_rank = 0
        self.cursors: Dict[str, int] = {}
        self.killed: Set[str] = set()
        self.delivered: Set[Tuple[str, int]] = set()
        self.awaiting: Dict[str, int] = {}

    def register(self, engine) -> None:
        engine.add_check("survivor_conservation", self.survivor_conservation)
        engine.add_check("detection_monotonicity", self.detection_monotonicity)
        engine.add_check("population_conservation", self.population_conservation)
        engine.add_check("single_nurse", self.single_nurse)
        engine.add_check("alarm_monotonicity", self.alarm_monotonicity)
        engine.add_check("dead_actor_silence", self.dead_actor_silence)
        engine.add_check("dedup_soundness", self.dedup_soundness)
        engine.add_check("advisory_safety", self.advisory_safety)
        engine.add_check("coverage_safety", self.coverage_safety)
        engine.add_check("failover_liveness", self.failover_liveness)

    def survivor_conservation(self, engine) -> Optional[str]:
        for site in self.context.sites.values():
            if not 0 <= site.rescued <= site.detected <= site.total:
                return (
                    f"cell {site.cell_id}: rescued={site.rescued} detected={site.detected} "
                    f"total={site.total}"
                )
        return None

    def detection_monotonicity(self, engine) -> Optional[str]:
        for cell, site in self.context.sites.items():
            if site.detected < self.detected.get(cell, 0):
                return f"cell {cell}: detected fell from {self.detected[cell]} to {site.detected}"
            self.detected[cell] = site.detected
        return None

    def population_conservation(self, engine) -> Optional[str]:
        population = self.context.population
        if not population.started:
            return None
        if population.sheltered + population.fleeing != population.initial:
            return (
                f"sheltered {population.sheltered} + fleeing {population.fleeing} "
                f"!= initial {population.initial}"
            )
        return None

    def single_nurse(self, engine) -> Optional[str]:
        nurses = sorted(
            str(actor_id)
            for actor_id, actor in self.simulation.actors.items()
            if getattr(actor, "nursing", False) and not actor.failed
        )
        if len(nurses) > 1:
            return f"nursing role held by {', '.join(nurses)}"
        return None

    def alarm_monotonicity(self, engine) -> Optional[str]:
        alarm = self.simulation.actors[CRISIS].state.alarm
        rank = ALARM_RANK[AlarmLevel(alarm)]
        if rank < self.alarm_rank:
            return f"crisis alarm went back to {alarm}"
        self.alarm_rank = rank
        return None

    def new_records(self, name: str, engine):
        records = engine.trace.records
        start = self.cursors.get(name, 0)
        self.cursors[name] = len(records)
        return records[start:]

    def dead_actor_silence(self, engine) -> Optional[str]:
        for record in self.new_records("dead_actor_silence", engine):
            if record.kind == "kill":
                self.killed.add(record.actor)
            elif record.kind in ("msg_send", "msg_drop") and record.actor in self.killed:
                return f"{record.actor} sent {record.payload['msg_kind']} after failing"
        return None

    def dedup_soundness(self, engine) -> Optional[str]:
        for record in self.new_records("dedup_soundness", engine):
            if record.kind != "msg_deliver":
                continue
            key = (record.actor, record.payload["msg_id"])
            if key in self.delivered:
                return f"msg {key[1]} handled twice by {key[0]}"
            self.delivered.add(key)
        return None

    def advisory_safety(self, engine) -> Optional[str]:
        roads = self.context.roads
        population = self.context.population
        for record in self.new_records("advisory_safety", engine):
            if record.kind != "advisory":
                continue
            path = record.payload["path"]
            blocked = [e for e in path if roads.is_blocked(e)]
            if blocked:
                return f"advisory from cell {record.payload['origin']} uses blocked edges {blocked}"
            congested = set(population.congested(lambda e: roads.edge(e)["capacity"]))
            crowded = [e for e in path if e in congested]
            if crowded:
                return f"advisory from cell {record.payload['origin']} uses congested edges {crowded}"
        return None

    def coverage_safety(self, engine) -> Optional[str]:
        """At most one live coverer per zone."""
        alpha = self.simulation.actors[ALPHA]
        coverers: Dict[int, List[str]] = {}
        for actor_id, actor in sorted(self.simulation.actors.items()):
            if actor_id.kind != ActorKind.DRONE or actor.failed:
                continue
            state = actor.state
            if state.status != DroneStatus.ON_STATION or state.role != DroneRole.COVERAGE:
                continue
            entry = alpha.fleet.get(actor_id)
            if entry is not None and entry.role == DroneRole.NURSING:
                # promotion still in flight
                continue
            coverers.setdefault(state.zone, []).append(str(actor_id))
        for zone in sorted(self.simulation.actors[BETA].zones):
            coverers.setdefault(zone, []).append(str(BETA))
        for zone, held in sorted(coverers.items()):
            if len(held) > 1:
                return f"zone {zone} covered by {', '.join(held)}"
        return None

    def current_nurse(self):
        for actor in self.simulation.actors.values():
            if getattr(actor, "nursing", False) and not actor.failed:
                return actor
        return None

    def failover_liveness(self, engine) -> Optional[str]:
        """A monitored failure is answered within miss_limit + 1 heartbeat periods."""
        alpha = self.simulation.actors[ALPHA]
        for record in self.new_records("failover_liveness", engine):
            if record.kind == "kill":
                nurse = self.current_nurse()
                if record.actor == str(alpha.nurse):
                    if alpha.watching:
                        self.awaiting[record.actor] = record.t_ms
                elif nurse is not None and ActorId.parse(record.actor) in nurse.ledger.last_seen:
                    self.awaiting[record.actor] = record.t_ms
            elif record.kind == "failure_notice":
                self.awaiting.pop(record.payload["drone"], None)
            elif record.kind == "nurse_promote":
                self.awaiting.clear()

        heartbeat_ms = self.context.params["heartbeat_ms"]
        limit = (self.context.params["miss_limit"] + 1) * heartbeat_ms
        for drone, killed_ms in sorted(self.awaiting.items()):
            if engine.clock - killed_ms > limit:
                return f"{drone} failed at {killed_ms}ms, no failover after {limit}ms"
        return None
