import logging
import math
from typing import Any, Dict

from actors.base import Actor, SimulationContext
from actors.models import ActorId
from postquake.utils import population_flow_step, start_flight
from world.models import EarthquakeEvent
from world.utils import block_roads, intensity_field, seed_survivors, survivor_totals

logger = logging.getLogger(__name__)


class Environment(Actor):
    """The physical world: ground motion, damage, and people on the move.

    Quake and aftershock injections land here. The environment updates the
    shared field, roads, survivor sites and population, and schedules the
    ground-motion arrivals that sensors and docked drones feel.
    """

    def __init__(self, actor_id: ActorId, sim: SimulationContext, sensor_cells: Dict[ActorId, int], station_cells: Dict[ActorId, int]):
        super().__init__(actor_id, sim)
        self.sensor_cells = sensor_cells
        self.station_cells = station_cells
        self.flowing = False

    def inject_quake(self, body: Dict[str, Any]) -> None:
        quake = EarthquakeEvent(
            epicenter=tuple(body["epicenter"]),
            magnitude=body["magnitude"],
            t_ms=self.now,
        )
        world = self.sim.world_params
        first = self.sim.intensity is None
        self.sim.intensity = intensity_field(
            self.sim.zone_map, quake, world["attenuation_m"], previous=self.sim.intensity
        )
        self.trace(
            "quake" if first else "aftershock",
            {"epicenter": list(quake.epicenter), "magnitude": quake.magnitude},
        )

        if first or body.get("resample_links", False):
            self.sim.network.disrupt(
                self.sim.intensity,
                self.rng,
                self.params["disruption_beta"],
                self.params["hardened_multiplier"],
            )
        if first:
            faults = body.get("force_down", {})
            self.sim.network.force_down(faults.get("kinds", ()), faults.get("links", ()))
            self.seed(world)

        self.damage_roads(world)
        if first:
            self.start_population(world)
        self.schedule_ground_motion(quake)

    inject_aftershock = inject_quake

    def seed(self, world: Dict[str, Any]) -> None:
        sites = seed_survivors(
            self.sim.zone_map,
            self.sim.intensity,
            world["trap_rate"],
            self.rng.generator,
            world["collapse_midpoint"],
            world["collapse_slope"],
        )
        self.sim.sites = {site.cell_id: site for site in sites}
        self.trace(
            "survivors_seeded",
            {"sites": [[s.cell_id, s.total] for s in sites], **survivor_totals(sites)},
        )

    def damage_roads(self, world: Dict[str, Any]) -> None:
        before = set(self.sim.roads.blocked_ids())
        self.sim.roads = block_roads(
            self.sim.roads,
            self.sim.intensity,
            world["block_factor"],
            self.rng.generator,
            world["collapse_midpoint"],
            world["collapse_slope"],
        )
        newly = [e for e in self.sim.roads.blocked_ids() if e not in before]
        if newly:
            self.trace("road_blocked", {"edges": newly})

    def start_population(self, world: Dict[str, Any]) -> None:
        secure = {c.cell_id for c in self.sim.zone_map.cells if c.predefined_secure}
        self.sim.population = start_flight(self.sim.zone_map, secure, world["flee_fraction"])
        self.trace("flight", {"fleeing": self.sim.population.initial, "secure": sorted(secure)})
        if self.sim.population.initial and not self.flowing:
            self.flowing = True
            self.set_timer(self.params["flow_tick_ms"], "flow")

    def arrival_delay(self, quake: EarthquakeEvent, cell_id: int) -> int:
        cell = self.sim.zone_map.cell(cell_id)
        distance = math.hypot(cell.x - quake.epicenter[0], cell.y - quake.epicenter[1])
        distance_m = distance * self.sim.zone_map.cell_size_m
        return int(math.ceil(distance_m * 1000.0 / self.params["wave_speed_mps"]))

    def schedule_ground_motion(self, quake: EarthquakeEvent) -> None:
        samples = self.params["samples_per_quake"]
        for sensor, cell in sorted(self.sensor_cells.items()):
            self.engine.schedule(
                self.now + self.arrival_delay(quake, cell),
                sensor,
                "timer",
                "sample",
                {"remaining": samples},
            )
        threshold = self.params["drone_sense_threshold"]
        for drone, cell in sorted(self.station_cells.items()):
            if self.sim.intensity[cell] >= threshold:
                self.engine.schedule(
                    self.now + self.arrival_delay(quake, cell), drone, "inject", "local_sense"
                )

    def tick_flow(self, body) -> None:
        population = self.sim.population
        sheltered = population_flow_step(population, self.sim.roads)
        if sheltered:
            self.trace(
                "sheltered",
                {
                    "count": sheltered,
                    "sheltered": population.sheltered,
                    "fleeing": population.fleeing,
                },
            )
        if population.fleeing:
            self.set_timer(self.params["flow_tick_ms"], "flow")
        else:
            population.loads = {}
            self.flowing = False
