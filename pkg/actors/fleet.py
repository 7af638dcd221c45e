import logging
from dataclasses import replace
from typing import Dict, Optional

from actors.base import Actor, SimulationContext
from actors.models import (
    ALPHA,
    BETA,
    CRISIS,
    ActorId,
    ActorKind,
    AssignCmd,
    DroneRole,
    DroneState,
    DroneStatus,
    FleetEntry,
    NurseLedger,
    Trigger,
)
from actors.protocol import (
    drone_on_arrive,
    drone_on_trigger,
    nurse_on_tick,
    nurse_successor,
    reassign_zone,
)
from postquake.utils import (
    adopt_advisory,
    compute_safe_route,
    congested_cells,
    designate_secure_areas,
    detect_congestion,
    scan_for_survivors,
    within_radius,
)
from world.utils import zone_intensity

logger = logging.getLogger(__name__)

Fleet = Dict[ActorId, FleetEntry]


def fleet_to_body(fleet: Fleet) -> list:
    return [
        {
            "drone": str(e.drone),
            "status": e.status.value,
            "role": e.role.value,
            "zone": e.zone,
            "spare": e.spare,
        }
        for e in sorted(fleet.values(), key=lambda e: e.drone)
    ]


def fleet_from_body(body: list, roster: Fleet) -> Fleet:
    fleet = {}
    for item in body:
        drone = ActorId.parse(item["drone"])
        fleet[drone] = replace(
            roster[drone],
            status=DroneStatus(item["status"]),
            role=DroneRole(item["role"]),
            zone=item["zone"],
            spare=item["spare"],
        )
    return fleet


def mark_assigned(fleet: Fleet, assign: AssignCmd) -> None:
    if assign.coverer in fleet:
        fleet[assign.coverer] = replace(
            fleet[assign.coverer], status=DroneStatus.ENROUTE, zone=assign.zone, spare=False
        )


def survey(actor: Actor, zone: int) -> None:
    """Scan, congestion report, secure areas and advisories for one zone."""
    sim = actor.sim
    params = actor.params
    radius = params["scan_radius_cells"]
    position = sim.zone_map.centroid(zone)

    report = scan_for_survivors(
        actor.name,
        position,
        list(sim.sites.values()),
        sim.zone_map,
        radius,
        params["detect_prob"],
        actor.rng,
        actor.now,
    )
    found = [[cell, n] for cell, n in report.detected]
    intensities = {cell: round(sim.intensity[cell], 6) for cell, _ in report.detected}
    actor.trace("scan", {"zone": zone, "detected": found})
    actor.send(
        ALPHA,
        "scan_report",
        {
            "zone": zone,
            "detected": found,
            "intensity": {str(c): i for c, i in intensities.items()},
        },
    )

    population = sim.population
    capacity = lambda e: sim.roads.edge(e)["capacity"]  # noqa: E731
    congestion = detect_congestion(
        actor.name, position, sim.roads, population.loads, sim.zone_map, radius, actor.now
    )
    if congestion is not None:
        actor.trace("congestion", {"zone": zone, "edges": list(congestion.edges)})
        actor.send(ALPHA, "congestion_report", {"zone": zone, "edges": list(congestion.edges)})

    if not population.started:
        return

    congested = population.congested(capacity)
    secure = designate_secure_areas(
        sim.zone_map,
        sim.intensity,
        congested_cells(sim.roads, congested),
        sim.world_params["safe_intensity"],
    )
    if secure != population.secure:
        population.secure = secure
        actor.trace("secure_area", {"zone": zone, "cells": sorted(secure)})
    if not secure:
        return

    origins = sorted({cell for cell, _ in population.groups})
    for origin in origins:
        if not within_radius(sim.zone_map, position, origin, radius):
            continue
        advisory = compute_safe_route(sim.roads, origin, secure, congested, actor.now)
        if advisory is None:
            continue
        current = population.advisories.get(origin)
        if current is not None and current.path == advisory.path:
            continue
        adopt_advisory(population, advisory)
        actor.trace("advisory", advisory.as_body())


class NurseDuty:
    """Heartbeat monitoring and failover, held by one actor at a time."""

    ledger: Optional[NurseLedger] = None
    fleet: Optional[Fleet] = None
    nursing = False
    nurse_ticking = False

    def init_nursing(self, monitored: Dict[ActorId, int], fleet: Fleet) -> None:
        self.nursing = True
        self.ledger = NurseLedger(
            heartbeat_ms=self.params["heartbeat_ms"],
            miss_limit=self.params["miss_limit"],
            last_seen=dict(monitored),
        )
        self.fleet = dict(fleet)

    def start_nurse_ticks(self) -> None:
        if not self.nurse_ticking:
            self.nurse_ticking = True
            self.set_timer(self.params["heartbeat_ms"], "nurse")

    def tick_nurse(self, body) -> None:
        if not self.nursing:
            self.nurse_ticking = False
            return
        zones = {drone: entry.zone for drone, entry in self.fleet.items()}
        for notice in nurse_on_tick(self.ledger, self.now, zones):
            self.report_failure(notice.drone, notice.zone, notice.cause)
        self.send(
            ALPHA,
            "nurse_summary",
            {"sent_ms": self.now, "monitored": sorted(str(d) for d in self.ledger.last_seen)},
        )
        self.set_timer(self.params["heartbeat_ms"], "nurse")

    def on_launched(self, envelope) -> None:
        # monitoring starts at launch, not at arrival
        if not self.nursing or envelope.src.kind != ActorKind.DRONE:
            return
        if envelope.src in self.fleet and self.fleet[envelope.src].status == DroneStatus.FAILED:
            return
        seen = self.ledger.last_seen.get(envelope.src, envelope.body["sent_ms"])
        self.ledger.last_seen[envelope.src] = max(seen, envelope.body["sent_ms"])
        if envelope.src in self.fleet:
            self.fleet[envelope.src] = replace(
                self.fleet[envelope.src],
                status=DroneStatus.ENROUTE,
                zone=envelope.body["zone"],
                spare=False,
            )
        self.start_nurse_ticks()

    def report_failure(self, drone: ActorId, zone: Optional[int], cause: str) -> None:
        self.ledger.last_seen.pop(drone, None)
        if drone in self.fleet:
            self.fleet[drone] = replace(self.fleet[drone], status=DroneStatus.FAILED)
        assign = reassign_zone(zone, self.sim.zone_map, self.fleet.values()) if zone is not None else None

        payload = {
            "drone": str(drone),
            "zone": zone,
            "cause": cause,
            "coverer": str(assign.coverer) if assign else None,
        }
        self.trace("failure_notice", payload)
        self.send(ALPHA, "failure_notice", payload)
        if assign is not None:
            self.apply_assign(assign)

    def apply_assign(self, assign: AssignCmd) -> None:
        self.trace(
            "assign",
            {"zone": assign.zone, "coverer": str(assign.coverer), "distance_m": assign.distance_m},
        )
        mark_assigned(self.fleet, assign)
        if assign.coverer == self.actor_id:
            self.cover(assign.zone)
        elif assign.coverer == BETA:
            self.send(BETA, "cover_cmd", {"zone": assign.zone})
        else:
            self.send(assign.coverer, "assign_cmd", {"zone": assign.zone})

    def on_heartbeat(self, envelope) -> None:
        if self.nursing and envelope.src in self.ledger.last_seen:
            sent = envelope.body["sent_ms"]
            self.ledger.last_seen[envelope.src] = max(self.ledger.last_seen[envelope.src], sent)

    def on_coverage_up(self, envelope) -> None:
        if not self.nursing or envelope.src.kind != ActorKind.DRONE:
            return
        if envelope.src in self.fleet and self.fleet[envelope.src].status == DroneStatus.FAILED:
            return
        seen = self.ledger.last_seen.get(envelope.src, envelope.body["sent_ms"])
        self.ledger.last_seen[envelope.src] = max(seen, envelope.body["sent_ms"])
        if envelope.src in self.fleet:
            self.fleet[envelope.src] = replace(
                self.fleet[envelope.src],
                status=DroneStatus.ON_STATION,
                zone=envelope.body["zone"],
                spare=False,
            )

    def on_problem_report(self, envelope) -> None:
        if self.nursing and envelope.src in self.ledger.last_seen:
            self.report_failure(envelope.src, envelope.body["zone"], "self_reported")

    def on_promote(self, envelope) -> None:
        monitored = {ActorId.parse(d): self.now for d in envelope.body["monitored"]}
        monitored.pop(self.actor_id, None)
        fleet = fleet_from_body(envelope.body["fleet"], self.sim.roster)
        self.become_nurse(monitored, fleet)

    def become_nurse(self, monitored, fleet) -> None:
        self.init_nursing(monitored, fleet)
        self.trace("nurse_role", {"monitored": sorted(str(d) for d in monitored)})
        self.start_nurse_ticks()


class Drone(NurseDuty, Actor):
    def __init__(self, actor_id: ActorId, sim: SimulationContext, state: DroneState):
        super().__init__(actor_id, sim)
        self.state = state
        self.nurse = sim.initial_nurse
        self.armed = False
        self.scanning = False
        self.heartbeating = False
        if state.role == DroneRole.NURSING:
            self.init_nursing({}, sim.roster)

    def trigger(self, trigger: Trigger) -> None:
        launched = drone_on_trigger(
            self.state, trigger, self.now, self.sim.zone_map, self.params["drone_speed_mps"]
        )
        if launched == self.state:
            return
        self.state = launched
        self.trace(
            "launch",
            {
                "trigger": trigger.value,
                "zone": launched.zone,
                "role": launched.role.value,
                "eta_ms": launched.eta_ms,
            },
        )
        self.set_timer(launched.eta_ms - self.now, "arrive")

        if launched.role == DroneRole.NURSING:
            return
        self.state = replace(launched, last_heartbeat_sent_ms=self.now)
        notice = {"zone": launched.zone, "role": launched.role.value, "sent_ms": self.now}
        self.send(ALPHA, "launched", notice)
        if self.nurse is not None and self.nurse != self.actor_id:
            self.send(self.nurse, "launched", notice)
        if not self.heartbeating:
            self.heartbeating = True
            self.set_timer(self.params["heartbeat_ms"], "heartbeat")

    def inject_local_sense(self, body) -> None:
        if not self.failed:
            self.trigger(Trigger.LOCAL_QUAKE_SENSED)

    def on_alert(self, envelope) -> None:
        self.trigger(Trigger.PAIRED_SENSOR_ALERT)

    def on_early_warning(self, envelope) -> None:
        self.trigger(Trigger.EARLY_WARNING)

    def on_launch_cmd(self, envelope) -> None:
        self.armed = True
        self.trigger(Trigger.LAUNCH_CMD)
        self.start_scanning()

    def on_assign_cmd(self, envelope) -> None:
        if self.state.status != DroneStatus.DOCKED:
            return
        self.state = replace(self.state, zone=envelope.body["zone"])
        self.armed = True
        self.trigger(Trigger.LAUNCH_CMD)

    def on_nurse_changed(self, envelope) -> None:
        self.nurse = ActorId.parse(envelope.body["nurse"])

    def on_promote(self, envelope) -> None:
        previous = self.state.zone
        self.state = replace(self.state, role=DroneRole.NURSING, zone=None)
        self.nurse = self.actor_id
        self.trace("role_change", {"role": DroneRole.NURSING.value, "previous_zone": previous})
        super().on_promote(envelope)

    def tick_arrive(self, body) -> None:
        self.state = drone_on_arrive(self.state)
        zone = self.state.zone
        self.trace("arrive", {"zone": zone, "role": self.state.role.value})

        coverage = {
            "zone": zone,
            "role": self.state.role.value,
            "sent_ms": self.now,
            "intensity": (
                round(zone_intensity(self.sim.zone_map, self.sim.intensity, zone), 6)
                if zone is not None and self.sim.intensity is not None
                else None
            ),
        }
        self.send(ALPHA, "coverage_up", coverage)
        if self.nurse is not None and self.nurse != self.actor_id:
            self.send(self.nurse, "coverage_up", coverage)

        if self.state.role == DroneRole.NURSING:
            self.start_nurse_ticks()
        self.start_scanning()

    def tick_heartbeat(self, body) -> None:
        if self.state.role == DroneRole.NURSING:
            self.heartbeating = False
            return
        hazard = self.params.get("hazard_rate", 0.0)
        if hazard and self.rng.random() < hazard:
            self.fail("hazard")
            return
        if self.nurse is not None:
            self.send(self.nurse, "heartbeat", {"sent_ms": self.now})
            self.state = replace(self.state, last_heartbeat_sent_ms=self.now)
            self.trace("heartbeat", {"nurse": str(self.nurse)})
        self.set_timer(self.params["heartbeat_ms"], "heartbeat")

    def start_scanning(self) -> None:
        ready = (
            self.armed
            and self.state.status == DroneStatus.ON_STATION
            and self.state.role == DroneRole.COVERAGE
            and self.state.zone is not None
        )
        if ready and not self.scanning:
            self.scanning = True
            self.set_timer(self.params["scan_period_ms"], "scan")

    def tick_scan(self, body) -> None:
        if self.state.status != DroneStatus.ON_STATION or self.state.role != DroneRole.COVERAGE:
            self.scanning = False
            return
        survey(self, self.state.zone)
        self.set_timer(self.params["scan_period_ms"], "scan")

    def inject_kill(self, body) -> None:
        self.fail(body.get("cause", "injected"))

    def inject_degrade(self, body) -> None:
        if self.failed:
            return
        if self.nurse is not None and self.nurse != self.actor_id:
            self.send(self.nurse, "problem_report", {"zone": self.state.zone})
        self.fail("self_reported")

    def fail(self, cause: str) -> None:
        if self.failed:
            return
        self.trace(
            "kill",
            {
                "cause": cause,
                "zone": self.state.zone,
                "role": self.state.role.value,
                "status": self.state.status.value,
                "last_heartbeat_ms": self.state.last_heartbeat_sent_ms,
            },
        )
        self.failed = True
        self.nursing = False
        self.scanning = False
        self.state = replace(self.state, status=DroneStatus.FAILED)
        self.sim.network.mark_dead(self.actor_id)
        logger.debug("%s failed (%s)", self, cause)


class HelicopterBeta(NurseDuty, Actor):
    """Surveillance helicopter; backup coverer of any number of zones."""

    def __init__(self, actor_id: ActorId, sim: SimulationContext):
        super().__init__(actor_id, sim)
        self.zones = set()
        self.scanning = False

    def on_cover_cmd(self, envelope) -> None:
        self.cover(envelope.body["zone"])

    def cover(self, zone: int) -> None:
        if zone in self.zones:
            return
        self.zones.add(zone)
        intensity = zone_intensity(self.sim.zone_map, self.sim.intensity, zone) if self.sim.intensity else None
        self.trace("beta_cover", {"zone": zone})
        self.send(
            ALPHA,
            "coverage_up",
            {
                "zone": zone,
                "role": "Surveillance",
                "sent_ms": self.now,
                "intensity": round(intensity, 6) if intensity is not None else None,
            },
        )
        if not self.scanning:
            self.scanning = True
            self.set_timer(self.params["scan_period_ms"], "scan")

    def tick_scan(self, body) -> None:
        for zone in sorted(self.zones):
            survey(self, zone)
        self.set_timer(self.params["scan_period_ms"], "scan")


class HelicopterAlpha(Actor):
    """Coordinator: relays every report to the crisis center twice (terrestrial
    and satellite, one msg_id), launches the fleet and watches the nurse."""

    FORWARDED = ("edge_report", "coverage_up", "failure_notice", "scan_report", "congestion_report")

    def __init__(self, actor_id: ActorId, sim: SimulationContext):
        super().__init__(actor_id, sim)
        self.fleet: Fleet = dict(sim.roster)
        self.nurse = sim.initial_nurse
        self.last_summary_ms: Optional[int] = None
        self.watching = False
        self.launched = False

    def forward(self, envelope) -> None:
        body = {**envelope.body, "origin": str(envelope.src), "report_kind": envelope.kind}
        copy = self.sim.network.new_envelope(self.actor_id, CRISIS, "report", body)
        copy.channel = "terrestrial"
        self.sim.network.send(copy)
        self.resend(copy, "satellite")

    def on_edge_report(self, envelope) -> None:
        self.forward(envelope)
        if self.launched:
            return
        self.launched = True
        drones = sorted(d for d, e in self.fleet.items() if not e.spare)
        self.trace("launch", {"command": "LaunchCmd", "drones": [str(d) for d in drones]})
        for drone in drones:
            self.send(drone, "launch_cmd", {"arm": True})
        self.arm_watch()

    def arm_watch(self) -> None:
        if self.watching:
            return
        self.watching = True
        self.last_summary_ms = self.now
        self.set_timer(self.params["heartbeat_ms"], "watch")

    def on_launched(self, envelope) -> None:
        entry = self.fleet.get(envelope.src)
        if entry is not None and entry.status == DroneStatus.DOCKED:
            self.fleet[envelope.src] = replace(
                entry, status=DroneStatus.ENROUTE, zone=envelope.body["zone"], spare=False
            )
        self.arm_watch()

    def on_coverage_up(self, envelope) -> None:
        if envelope.src in self.fleet and self.fleet[envelope.src].status != DroneStatus.FAILED:
            self.fleet[envelope.src] = replace(
                self.fleet[envelope.src],
                status=DroneStatus.ON_STATION,
                zone=envelope.body["zone"],
                spare=False,
            )
        self.forward(envelope)

    def on_failure_notice(self, envelope) -> None:
        drone = ActorId.parse(envelope.body["drone"])
        if drone in self.fleet:
            self.fleet[drone] = replace(self.fleet[drone], status=DroneStatus.FAILED)
        coverer = envelope.body.get("coverer")
        if coverer and coverer != str(self.actor_id):
            mark_assigned(self.fleet, AssignCmd(zone=envelope.body["zone"], coverer=ActorId.parse(coverer)))
        self.forward(envelope)

    def on_scan_report(self, envelope) -> None:
        self.forward(envelope)

    def on_congestion_report(self, envelope) -> None:
        self.forward(envelope)

    def on_nurse_summary(self, envelope) -> None:
        if envelope.src != self.nurse:
            return
        self.arm_watch()
        self.last_summary_ms = max(self.last_summary_ms, envelope.body["sent_ms"])

    def tick_watch(self, body) -> None:
        limit = self.params["miss_limit"] * self.params["heartbeat_ms"]
        if self.last_summary_ms is not None and self.now - self.last_summary_ms > limit:
            self.nurse_failover()
        self.set_timer(self.params["heartbeat_ms"], "watch")

    def nurse_failover(self) -> None:
        previous = self.nurse
        if previous in self.fleet:
            self.fleet[previous] = replace(self.fleet[previous], status=DroneStatus.FAILED)
        candidates = [e for d, e in self.fleet.items() if d != previous]
        successor = nurse_successor(candidates)
        monitored = sorted(
            d
            for d, e in self.fleet.items()
            if e.status in (DroneStatus.ENROUTE, DroneStatus.ON_STATION) and d != successor
        )

        self.trace("nurse_promote", {"previous": str(previous), "nurse": str(successor)})
        freed_zone = None
        if successor in self.fleet:
            freed_zone = self.fleet[successor].zone
            self.fleet[successor] = replace(
                self.fleet[successor], role=DroneRole.NURSING, zone=None
            )
        self.send(
            successor,
            "promote",
            {"monitored": [str(d) for d in monitored], "fleet": fleet_to_body(self.fleet)},
        )
        for drone, entry in sorted(self.fleet.items()):
            if entry.status != DroneStatus.FAILED and drone != successor:
                self.send(drone, "nurse_changed", {"nurse": str(successor)})

        if freed_zone is not None:
            assign = reassign_zone(freed_zone, self.sim.zone_map, self.fleet.values())
            self.trace(
                "assign",
                {"zone": freed_zone, "coverer": str(assign.coverer), "distance_m": assign.distance_m},
            )
            mark_assigned(self.fleet, assign)
            kind = "cover_cmd" if assign.coverer == BETA else "assign_cmd"
            self.send(assign.coverer, kind, {"zone": freed_zone})

        self.nurse = successor
        self.last_summary_ms = self.now
