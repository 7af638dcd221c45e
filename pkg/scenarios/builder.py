import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List

from django.conf import settings

from actors.base import Actor, SimulationContext
from actors.command import CrisisCenter, RescueTeam
from actors.environment import Environment
from actors.fleet import Drone, HelicopterAlpha, HelicopterBeta
from actors.ground import EdgeServer, GroundStation, Police, Satellite, SeismicCenter, Sensor
from actors.models import (
    ALPHA,
    BETA,
    CRISIS,
    POLICE,
    SATELLITE,
    SEISMIC,
    WORLD,
    ActorId,
    ActorKind,
    DroneRole,
    DroneState,
    DroneStatus,
    FleetEntry,
    SensorState,
    drone,
)
from engine.core import Engine
from engine.trace import Trace
from netsim.network import Network
from netsim.topology import build_link_table, satellite_capable
from scenarios.invariants import InvariantChecks
from scenarios.models import Scenario
from scenarios.utils import build_zone_map
from world.models import RiskLevel
from world.utils import WorldBuilder

logger = logging.getLogger(__name__)

PLACEMENT = ("drones", "sensors", "edge_servers", "ground_stations", "rescue_teams")


@dataclass
class Simulation:
    scenario: Scenario
    engine: Engine
    context: SimulationContext
    actors: Dict[ActorId, Actor] = field(default_factory=dict)

    @property
    def trace(self) -> Trace:
        return self.engine.trace

    def run(self) -> Trace:
        logger.info("running until t=%dms (seed %d)", self.scenario.t_end_ms, self.scenario.seed)
        self.engine.run_until(self.scenario.t_end_ms)
        logger.info(
            "dispatched %d events, %d trace records", self.engine.dispatched, len(self.trace)
        )
        return self.trace


def actor_parameters(scenario: Scenario) -> Dict[str, Any]:
    params = {
        key: value
        for key, value in scenario.actors.items()
        if key not in PLACEMENT and not key.endswith("_cell")
    }
    params["hazard_rate"] = scenario.faults["hazard_rate"]
    return params


class SimulationBuilder:
    """Turns a resolved scenario into a ready-to-run engine."""

    def __init__(self, scenario: Scenario, check_invariants: bool = False):
        self.scenario = scenario
        self.check_invariants = check_invariants
        self.params = actor_parameters(scenario)
        self.cells: Dict[ActorId, int] = {}

    def build(self) -> Simulation:
        scenario = self.scenario
        zone_map = build_zone_map(scenario.world)
        roads = WorldBuilder.grid_roads(zone_map, scenario.world["road_capacity"])
        engine = Engine(scenario.seed, check_invariants=self.check_invariants)
        engine.header(
            {
                "format_version": settings.RESCUE_NETWORK["TRACE_FORMAT_VERSION"],
                "scenario": scenario.to_dict(),
                "zones": [zone.zone_id for zone in zone_map.zones],
            }
        )

        context = SimulationContext(
            zone_map=zone_map,
            roads=roads,
            params=self.params,
            world_params=scenario.world,
        )
        simulation = Simulation(scenario=scenario, engine=engine, context=context)

        drones, gateways = self.fleet(context)
        sensors = self.sensors(zone_map)
        edge_servers = self.placed(ActorKind.EDGE_SERVER, "edge_servers")
        context.ground_stations = self.placed(ActorKind.GROUND_STATION, "ground_stations")
        context.rescue_teams = self.placed(ActorKind.RESCUE_TEAM, "rescue_teams")
        context.sensors = sorted(sensors)
        context.edge_servers = edge_servers
        for actor_id, key in (
            (ALPHA, "alpha_cell"),
            (BETA, "beta_cell"),
            (CRISIS, "crisis_cell"),
            (SEISMIC, "seismic_cell"),
            (POLICE, "police_cell"),
            (SATELLITE, "crisis_cell"),
            (WORLD, "crisis_cell"),
        ):
            self.cells[actor_id] = scenario.actors[key]

        links = build_link_table(
            self.params,
            sensors,
            edge_servers,
            drones,
            gateways,
            context.ground_stations,
            context.rescue_teams,
        )
        context.network = Network(
            engine, links, satellite_capable(drones, context.ground_stations), self.cells
        )

        for actor in self.actors(context, sensors):
            simulation.actors[actor.actor_id] = actor
        for actor_id in sorted(simulation.actors):
            engine.register(simulation.actors[actor_id])

        self.schedule_injections(engine)
        if self.check_invariants:
            InvariantChecks(simulation).register(engine)
        logger.info(
            "built %d actors and %d links on a %dx%d grid",
            len(simulation.actors),
            len(links),
            zone_map.width,
            zone_map.height,
        )
        return simulation

    def fleet(self, context: SimulationContext):
        zone_map = context.zone_map
        drones, gateways = [], []
        for index, entry in enumerate(self.scenario.actors["drones"]):
            drone_id = drone(index)
            role = DroneRole(entry["role"])
            drones.append(drone_id)
            if role == DroneRole.GATEWAY:
                gateways.append(drone_id)
            if role == DroneRole.NURSING:
                context.initial_nurse = drone_id
            self.cells[drone_id] = zone_map.stations[entry["station"]]
            context.roster[drone_id] = FleetEntry(
                drone=drone_id,
                station_xy=zone_map.station_xy(entry["station"]),
                status=DroneStatus.DOCKED,
                role=role,
                zone=entry["zone"],
                spare=entry["spare"],
            )
        return drones, gateways

    def sensors(self, zone_map) -> Dict[ActorId, SensorState]:
        sensors = {}
        for index, entry in enumerate(self.scenario.actors["sensors"]):
            sensor_id = ActorId(ActorKind.SENSOR.value, index)
            risk = zone_map.cell(entry["cell"]).risk
            suffix = {RiskLevel.HIGH: "high", RiskLevel.MEDIUM: "medium", RiskLevel.LOW: "low"}[risk]
            paired = entry["paired_drone"]
            sensors[sensor_id] = SensorState(
                cell_id=entry["cell"],
                risk=risk,
                theta=self.params[f"theta_{suffix}"],
                noise_sigma=self.params[f"noise_{suffix}"],
                edge=ActorId(ActorKind.EDGE_SERVER.value, entry["edge"]),
                paired_drone=drone(paired) if paired is not None else None,
            )
            self.cells[sensor_id] = entry["cell"]
        return sensors

    def placed(self, kind: ActorKind, key: str) -> List[ActorId]:
        ids = []
        for index, entry in enumerate(self.scenario.actors[key]):
            actor_id = ActorId(kind.value, index)
            self.cells[actor_id] = entry["cell"]
            ids.append(actor_id)
        return ids

    def actors(self, context: SimulationContext, sensors: Dict[ActorId, SensorState]) -> List[Actor]:
        built: List[Actor] = []
        for index, entry in enumerate(self.scenario.actors["drones"]):
            state = DroneState(
                status=DroneStatus.DOCKED,
                role=DroneRole(entry["role"]),
                station_id=entry["station"],
                zone=entry["zone"],
                label=entry["label"],
            )
            built.append(Drone(drone(index), context, state))
        built += [Sensor(sensor_id, context, state) for sensor_id, state in sorted(sensors.items())]
        built += [EdgeServer(edge, context) for edge in context.edge_servers]
        built += [GroundStation(station, context) for station in context.ground_stations]
        built += [RescueTeam(team, context, self.cells[team]) for team in context.rescue_teams]
        built += [
            HelicopterAlpha(ALPHA, context),
            HelicopterBeta(BETA, context),
            Satellite(SATELLITE, context),
            SeismicCenter(SEISMIC, context, self.scenario.quake["early_warning_lead_ms"]),
            CrisisCenter(CRISIS, context),
            Police(POLICE, context),
            Environment(
                WORLD,
                context,
                sensor_cells={sensor_id: state.cell_id for sensor_id, state in sensors.items()},
                station_cells={d: self.cells[d] for d in context.roster},
            ),
        ]
        return built

    def schedule_injections(self, engine: Engine) -> None:
        quake, faults = self.scenario.quake, self.scenario.faults
        engine.schedule(
            quake["t_ms"],
            WORLD,
            "inject",
            "quake",
            {
                "epicenter": quake["epicenter"],
                "magnitude": quake["magnitude"],
                "force_down": {
                    "kinds": faults["force_down_kinds"],
                    "links": faults["force_down_links"],
                },
            },
        )
        lead = quake["early_warning_lead_ms"]
        if lead is not None:
            engine.schedule(quake["t_ms"] - lead, SEISMIC, "inject", "early_warning")
        for aftershock in quake["aftershocks"]:
            engine.schedule(
                aftershock["t_ms"],
                WORLD,
                "inject",
                "aftershock",
                {
                    "epicenter": aftershock["epicenter"] or quake["epicenter"],
                    "magnitude": aftershock["magnitude"],
                    "resample_links": aftershock["resample_links"],
                },
            )
        for kill in faults["kills"]:
            engine.schedule(kill["t_ms"], ActorId.parse(kill["actor"]), "inject", "kill", {"cause": "injected"})
        for entry in faults["degrade"]:
            engine.schedule(entry["t_ms"], ActorId.parse(entry["actor"]), "inject", "degrade")


def build_simulation(scenario: Scenario, check_invariants: bool = False) -> Simulation:
    return SimulationBuilder(scenario, check_invariants).build()
