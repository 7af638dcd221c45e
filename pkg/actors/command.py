import logging
from dataclasses import replace

from actors.base import Actor, SimulationContext
from actors.models import (
    CRISIS,
    POLICE,
    ActorId,
    AlarmLevel,
    CrisisState,
    KnownSite,
    TeamState,
    TeamStatus,
)
from actors.protocol import (
    crisis_assignments,
    crisis_on_confirmation,
    plan_team_route,
    rescue_team_step,
)
from postquake.utils import priority_score

logger = logging.getLogger(__name__)


class CrisisCenter(Actor):
    """Consumes α's relayed reports, raises the alarm and dispatches teams."""

    def __init__(self, actor_id: ActorId, sim: SimulationContext):
        super().__init__(actor_id, sim)
        self.state = CrisisState(team_tasks={team: None for team in sim.rescue_teams})

    def on_early_warning(self, envelope) -> None:
        self.confirm(str(envelope.src), 0.0)

    def on_report(self, envelope) -> None:
        body = envelope.body
        kind = body["report_kind"]
        if kind == "edge_report":
            self.confirm(body["origin"], body["estimated_intensity"])
        elif kind == "coverage_up" and body.get("intensity") is not None:
            self.confirm(body["origin"], body["intensity"])
        elif kind == "scan_report":
            self.record_detections(body)
        elif kind == "congestion_report":
            self.state.congested.update(body["edges"])
            for team in self.sim.rescue_teams:
                self.send(team, "advisory", {"congested": sorted(self.state.congested)})
        self.dispatch_teams()

    def confirm(self, source: str, intensity: float) -> None:
        entered = crisis_on_confirmation(
            self.state, source, intensity, self.params["red_threshold"]
        )
        for level in entered:
            if level == AlarmLevel.YELLOW:
                self.trace("yellow", {"source": source})
            elif level == AlarmLevel.RED:
                self.trace("red", {"sources": sorted(self.state.confirmations)})
                self.notify(level)

    def notify(self, level: AlarmLevel) -> None:
        self.trace("notify", {"level": level.value})
        self.send(POLICE, "notify", {"level": level.value})
        for station in self.sim.ground_stations:
            self.send(station, "notify", {"level": level.value})

    def record_detections(self, body) -> None:
        intensity = body.get("intensity", {})
        for cell, found in body["detected"]:
            site = self.state.sites.setdefault(cell, KnownSite(cell_id=cell))
            site.detected += found
            site.intensity = intensity.get(str(cell), site.intensity)
            if site.first_detected_ms is None:
                site.first_detected_ms = self.now

    def dispatch_teams(self) -> None:
        intensity = {cell: site.intensity for cell, site in self.state.sites.items()}
        for team, cell in crisis_assignments(self.state):
            score = priority_score(self.state.sites[cell], intensity)
            self.trace("dispatch", {"team": str(team), "site": cell, "score": round(score, 6)})
            self.send(team, "dispatch", {"site": cell, "congested": sorted(self.state.congested)})

    def on_rescue_report(self, envelope) -> None:
        body = envelope.body
        site = self.state.sites.get(body["site"])
        if site is not None:
            site.rescued += body["saved"]
        if body["complete"]:
            self.state.team_tasks[envelope.src] = None
        self.dispatch_teams()

    def on_blocked(self, envelope) -> None:
        logger.debug("%s reports blocked route to %s", envelope.src, envelope.body["site"])


class RescueTeam(Actor):
    def __init__(self, actor_id: ActorId, sim: SimulationContext, home_cell: int):
        super().__init__(actor_id, sim)
        self.state = TeamState(position=home_cell)
        self.congested = set()
        self.moving = False

    def on_dispatch(self, envelope) -> None:
        self.congested = set(envelope.body["congested"])
        self.state = replace(
            self.state, target=envelope.body["site"], status=TeamStatus.MOVING, route=()
        )
        self.replan()
        if not self.moving and self.state.status != TeamStatus.BLOCKED:
            self.moving = True
            self.set_timer(self.params["team_tick_ms"], "move")

    def on_advisory(self, envelope) -> None:
        self.congested = set(envelope.body["congested"])
        if self.state.status == TeamStatus.BLOCKED:
            self.state = replace(self.state, status=TeamStatus.MOVING)
            self.replan()
            if self.state.status != TeamStatus.BLOCKED and not self.moving:
                self.moving = True
                self.set_timer(self.params["team_tick_ms"], "move")

    def replan(self) -> None:
        if self.state.position == self.state.target:
            return
        self.state = plan_team_route(self.state, self.sim.roads, self.congested)
        if self.state.status == TeamStatus.BLOCKED:
            self.report_blocked()

    def report_blocked(self) -> None:
        self.trace("blocked", {"position": self.state.position, "site": self.state.target})
        self.send(CRISIS, "blocked", {"site": self.state.target})

    def tick_move(self, body) -> None:
        before = self.state
        site = self.sim.sites.get(before.target) if before.target is not None else None
        self.state, saved = rescue_team_step(
            before, self.sim.roads, self.congested, site, self.params["rescue_rate"]
        )

        if self.state.status == TeamStatus.BLOCKED and before.status != TeamStatus.BLOCKED:
            self.report_blocked()
        elif self.state.position != before.position:
            self.trace("move", {"position": self.state.position, "site": self.state.target})

        arrived_empty = before.target is not None and self.state.target is None and not saved
        if saved or arrived_empty:
            complete = self.state.target is None
            self.trace("rescue", {"site": before.target, "saved": saved, "complete": complete})
            self.send(
                CRISIS,
                "rescue_report",
                {"site": before.target, "saved": saved, "complete": complete},
            )

        if self.state.target is None or self.state.status == TeamStatus.BLOCKED:
            self.moving = False
            return
        self.set_timer(self.params["team_tick_ms"], "move")
