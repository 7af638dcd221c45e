"""Transition functions of the rescue protocol.

Everything here is a function of (state, input, rng) with no access to
other actors; the actor classes in ``actors.fleet``, ``actors.ground`` and
``actors.command`` wire them to messages.
"""
import math
from dataclasses import replace
from typing import Dict, Iterable, List, Optional, Tuple

from actors.models import (
    BETA,
    ActorId,
    Alert,
    AlarmLevel,
    AssignCmd,
    CrisisState,
    DroneRole,
    DroneState,
    DroneStatus,
    EdgeReport,
    EdgeWindow,
    FailureNotice,
    FleetEntry,
    NurseLedger,
    SensorState,
    TeamState,
    TeamStatus,
    Trigger,
)
from postquake.utils import compute_safe_route, rank_sites
from world.models import RoadGraph, SurvivorSite, ZoneMap


def sensor_on_sample(sensor: ActorId, state: SensorState, amplitude: float, rng) -> Optional[Alert]:
    measured = amplitude + rng.normal(state.noise_sigma)
    if measured >= state.theta:
        return Alert(sensor=sensor, cell_id=state.cell_id, measured=round(measured, 6))
    return None


def edge_on_alert(window: EdgeWindow, alert: Alert, now_ms: int) -> Optional[EdgeReport]:
    """Yellow once ``k`` distinct sensors alerted within ``window_ms``."""
    window.alerts.append((now_ms, alert))
    while window.alerts and window.alerts[0][0] < now_ms - window.window_ms:
        window.alerts.popleft()

    if window.yellow:
        return None
    sensors = {a.sensor for _, a in window.alerts}
    if len(sensors) < window.k:
        return None

    window.yellow = True
    measured = [a.measured for _, a in window.alerts]
    return EdgeReport(
        estimated_intensity=round(sum(measured) / len(measured), 6),
        cells=tuple(sorted({a.cell_id for _, a in window.alerts})),
        sensors=tuple(sorted(str(s) for s in sensors)),
    )


def travel_ms(distance_m: float, speed_mps: float) -> int:
    return int(math.ceil(distance_m * 1000.0 / speed_mps))


def drone_on_trigger(
    state: DroneState,
    trigger: Trigger,
    now_ms: int,
    zone_map: ZoneMap,
    speed_mps: float,
) -> DroneState:
    """Docked drones take off; anything else is unchanged.

    Coverage drones fly to their zone centroid. Nursing and gateway drones
    hold position over their station. A docked spare has no zone and stays.
    """
    if state.status != DroneStatus.DOCKED:
        return state
    if state.role == DroneRole.COVERAGE:
        if state.zone is None:
            return state
        distance = zone_map.distance_m(
            zone_map.station_xy(state.station_id), zone_map.centroid(state.zone)
        )
        return replace(
            state, status=DroneStatus.ENROUTE, eta_ms=now_ms + travel_ms(distance, speed_mps)
        )
    return replace(state, status=DroneStatus.ENROUTE, eta_ms=now_ms)


def drone_on_arrive(state: DroneState) -> DroneState:
    if state.status != DroneStatus.ENROUTE:
        return state
    return replace(state, status=DroneStatus.ON_STATION, eta_ms=None)


def nurse_on_tick(
    ledger: NurseLedger, now_ms: int, zones: Dict[ActorId, Optional[int]]
) -> List[FailureNotice]:
    limit = ledger.miss_limit * ledger.heartbeat_ms
    failed = sorted(d for d, seen in ledger.last_seen.items() if now_ms - seen > limit)
    for drone in failed:
        del ledger.last_seen[drone]
    return [FailureNotice(drone=d, zone=zones.get(d)) for d in failed]


def reassign_zone(zone_id: int, zone_map: ZoneMap, fleet: Iterable[FleetEntry]) -> AssignCmd:
    """Nearest docked spare by (distance, index); helicopter beta otherwise."""
    centroid = zone_map.centroid(zone_id)
    candidates = [
        (zone_map.distance_m(entry.station_xy, centroid), entry.drone.index, entry.drone)
        for entry in fleet
        if entry.spare and entry.status == DroneStatus.DOCKED
    ]
    if not candidates:
        return AssignCmd(zone=zone_id, coverer=BETA)
    distance, _, chosen = min(candidates)
    return AssignCmd(zone=zone_id, coverer=chosen, distance_m=round(distance, 6))


def nurse_successor(fleet: Iterable[FleetEntry]) -> ActorId:
    """Lowest-index on-station drone of any non-nursing role, else helicopter beta."""
    on_station = [
        entry.drone
        for entry in fleet
        if entry.status == DroneStatus.ON_STATION and entry.role != DroneRole.NURSING
    ]
    return min(on_station, key=lambda d: d.index) if on_station else BETA


def crisis_on_confirmation(
    state: CrisisState, source: str, intensity: float, red_threshold: float
) -> List[AlarmLevel]:
    """Record one intensity confirmation; returns the alarm levels entered."""
    entered = []
    if state.alarm == AlarmLevel.GREEN:
        state.alarm = AlarmLevel.YELLOW
        entered.append(AlarmLevel.YELLOW)
    if intensity >= red_threshold:
        state.confirmations.setdefault(source, intensity)
    if state.alarm == AlarmLevel.YELLOW and len(state.confirmations) >= 2:
        state.alarm = AlarmLevel.RED
        entered.append(AlarmLevel.RED)
    return entered


def crisis_assignments(state: CrisisState) -> List[Tuple[ActorId, int]]:
    """Pair idle teams (by index) with the best-ranked unassigned sites."""
    if state.alarm != AlarmLevel.RED:
        return []
    taken = {site for site in state.team_tasks.values() if site is not None}
    intensity = {cell: site.intensity for cell, site in state.sites.items()}
    ranked = [s for s in rank_sites(state.sites.values(), intensity) if s.cell_id not in taken]
    idle = sorted(team for team, site in state.team_tasks.items() if site is None)

    pairs = list(zip(idle, (s.cell_id for s in ranked)))
    for team, cell in pairs:
        state.team_tasks[team] = cell
    return pairs


def rescue_team_step(
    team: TeamState,
    roads: RoadGraph,
    congested: Iterable[int],
    site: Optional[SurvivorSite],
    rescue_rate: int,
) -> Tuple[TeamState, int]:
    """One movement or rescue tick; returns the new state and survivors saved.

    The next edge is checked before it is taken: a blocked edge forces a
    re-plan, and no route leaves the team Blocked.
    """
    if team.target is None or team.status in (TeamStatus.IDLE, TeamStatus.BLOCKED):
        return team, 0

    if team.position == team.target:
        if site is None or site.awaiting_rescue == 0:
            return replace(team, status=TeamStatus.IDLE, target=None, route=()), 0
        saved = min(rescue_rate, site.awaiting_rescue)
        site.rescued += saved
        status = TeamStatus.RESCUING if site.awaiting_rescue else TeamStatus.IDLE
        target = team.target if site.awaiting_rescue else None
        return (
            replace(team, status=status, target=target, route=(), rescued=team.rescued + saved),
            saved,
        )

    route = team.route
    if not route or roads.is_blocked(route[0]) or route[0] in set(congested):
        team = plan_team_route(team, roads, congested)
        if team.status == TeamStatus.BLOCKED:
            return team, 0
        route = team.route

    u, v = roads.endpoints(route[0])
    position = v if u == team.position else u
    return replace(team, position=position, route=route[1:], status=TeamStatus.MOVING), 0


def plan_team_route(team: TeamState, roads: RoadGraph, congested: Iterable[int]) -> TeamState:
    advisory = compute_safe_route(roads, team.position, {team.target}, congested)
    if advisory is None:
        return replace(team, status=TeamStatus.BLOCKED, route=())
    return replace(team, status=TeamStatus.MOVING, route=advisory.path)
