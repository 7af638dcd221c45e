import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from actors.models import KnownSite, drone
from engine.rng import actor_rng
from postquake.models import FleeingPopulation, RouteAdvisory
from postquake.utils import (
    adopt_advisory,
    compute_safe_route,
    designate_secure_areas,
    detect_congestion,
    population_flow_step,
    priority_score,
    rank_sites,
    scan_for_survivors,
    start_flight,
)
from world.models import SurvivorSite, ZoneMap
from world.utils import WorldBuilder


def grid_map(width, height, population=0, open_space=(), secure=()):
    cells = WorldBuilder.build_cells(
        width,
        height,
        [[0.5] * width for _ in range(height)],
        [[population] * width for _ in range(height)],
        open_space,
        secure,
    )
    return ZoneMap(width, height, 500.0, cells, WorldBuilder.zones_by_risk(cells, 1), {0: 0})


def edge_between(roads, a, b):
    return next(e for e in roads.edge_ids() if set(roads.endpoints(e)) == {a, b})


class ScanForSurvivorsTest(SimpleTestCase):
    def setUp(self):
        self.zone_map = grid_map(5, 5)

    def test_sites_out_of_range_are_not_scanned(self):
        far = SurvivorSite(cell_id=24, total=10)
        report = scan_for_survivors("Drone:0", (0.0, 0.0), [far], self.zone_map, 2.0, 1.0, actor_rng(0, drone(0)), 0)
        self.assertEqual(report.detected, ())
        self.assertEqual(far.detected, 0)

    def test_certain_detection_finds_everyone_once(self):
        site = SurvivorSite(cell_id=1, total=4)
        rng = actor_rng(0, drone(0))
        first = scan_for_survivors("Drone:0", (0.0, 0.0), [site], self.zone_map, 2.0, 1.0, rng, 500)
        second = scan_for_survivors("Drone:0", (0.0, 0.0), [site], self.zone_map, 2.0, 1.0, rng, 900)
        self.assertEqual(first.detected, ((1, 4),))
        self.assertEqual(second.detected, ())
        self.assertEqual((site.detected, site.first_detected_ms), (4, 500))

    def test_mean_scans_to_detection(self):
        q = 0.3
        scans = []
        for seed in range(1000):
            rng = actor_rng(seed, drone(0))
            site = SurvivorSite(cell_id=0, total=1)
            count = 0
            while not site.detected:
                count += 1
                scan_for_survivors("Drone:0", (0.0, 0.0), [site], self.zone_map, 1.0, q, rng, count)
            scans.append(count)
        sigma = math.sqrt((1 - q) / q**2 / 1000)
        self.assertLess(abs(np.mean(scans) - 1 / q), 3 * sigma)


class DetectCongestionTest(SimpleTestCase):
    def setUp(self):
        self.zone_map = grid_map(4, 4)
        self.roads = WorldBuilder.grid_roads(self.zone_map, capacity=10)

    def test_load_at_capacity_is_not_congested(self):
        self.assertIsNone(detect_congestion("Drone:0", (0.0, 0.0), self.roads, {0: 10}, self.zone_map, 2.0, 0))

    def test_load_over_capacity_is_reported(self):
        report = detect_congestion("Drone:0", (0.0, 0.0), self.roads, {0: 11, 1: 3}, self.zone_map, 2.0, 7)
        self.assertEqual((report.edges, report.t_ms), ((0,), 7))

    def test_edges_beyond_the_radius_are_invisible(self):
        far = edge_between(self.roads, 14, 15)
        self.assertIsNone(detect_congestion("Drone:0", (0.0, 0.0), self.roads, {far: 50}, self.zone_map, 1.0, 0))


class DesignateSecureAreasTest(SimpleTestCase):
    def test_open_calm_uncongested_cells_are_secure(self):
        zone_map = grid_map(3, 1, open_space=[0, 1, 2], secure=[])
        field = {0: 1.0, 1: 3.0, 2: 0.5}
        self.assertEqual(designate_secure_areas(zone_map, field, congested=[2], safe_intensity=2.0), {0})

    def test_predefined_cells_are_always_secure(self):
        zone_map = grid_map(2, 1, open_space=[], secure=[1])
        self.assertEqual(designate_secure_areas(zone_map, {0: 9.0, 1: 9.0}, congested=[1]), {1})


class ComputeSafeRouteTest(SimpleTestCase):
    def setUp(self):
        self.zone_map = grid_map(3, 3)
        self.roads = WorldBuilder.grid_roads(self.zone_map, capacity=10)

    def test_empty_secure_set_is_an_error(self):
        with self.assertRaises(ValueError):
            compute_safe_route(self.roads, 0, set())

    def test_nearest_secure_cell_wins(self):
        advisory = compute_safe_route(self.roads, 0, {8, 2}, now_ms=40)
        self.assertEqual((advisory.destination, advisory.length_m, advisory.issued_ms), (2, 1000.0, 40))
        self.assertEqual(advisory.path, (edge_between(self.roads, 0, 1), edge_between(self.roads, 1, 2)))

    def test_blocked_and_congested_edges_are_avoided(self):
        self.roads.edge(edge_between(self.roads, 1, 2))["blocked"] = True
        congested = [edge_between(self.roads, 0, 3)]
        advisory = compute_safe_route(self.roads, 0, {2}, congested)
        self.assertEqual(advisory.path, tuple(edge_between(self.roads, a, b) for a, b in [(0, 1), (1, 4), (4, 5), (5, 2)]))

    def test_unreachable_gives_none(self):
        for a, b in [(0, 1), (0, 3)]:
            self.roads.edge(edge_between(self.roads, a, b))["blocked"] = True
        self.assertIsNone(compute_safe_route(self.roads, 0, {8}))

    def test_source_already_secure(self):
        advisory = compute_safe_route(self.roads, 4, {4})
        self.assertEqual((advisory.path, advisory.length_m), ((), 0))


class RankSitesTest(SimpleTestCase):
    def test_score_then_detection_time_then_cell(self):
        field = {1: 6.0, 2: 6.0, 3: 6.0, 4: 9.0, 5: 6.0}
        sites = [
            KnownSite(1, detected=2, first_detected_ms=300),
            KnownSite(2, detected=2, first_detected_ms=100),
            KnownSite(3, detected=2, first_detected_ms=100),
            KnownSite(4, detected=1, first_detected_ms=900),
            KnownSite(5, detected=4, rescued=4, first_detected_ms=0),
        ]
        ranked = [s.cell_id for s in rank_sites(sites, field)]
        self.assertEqual(ranked, [2, 3, 1, 4])

    def test_score_scales_with_waiting_survivors(self):
        site = KnownSite(1, detected=5, rescued=1)
        self.assertAlmostEqual(priority_score(site, {1: 5.0}), 2.0)


class PopulationFlowTest(SimpleTestCase):
    def test_flight_leaves_secure_cells_alone(self):
        zone_map = grid_map(3, 1, population=10, secure=[2])
        population = start_flight(zone_map, {2}, flee_fraction=0.5)
        self.assertEqual(population.groups, {(0, ()): 5, (1, ()): 5})
        self.assertEqual(population.initial, 10)

    def test_groups_walk_one_edge_per_step(self):
        zone_map = grid_map(3, 1, population=10, secure=[2])
        roads = WorldBuilder.grid_roads(zone_map, capacity=10)
        population = start_flight(zone_map, {2}, flee_fraction=0.5)

        self.assertEqual(population_flow_step(population, roads), 5)
        self.assertEqual(population.groups, {(1, (edge_between(roads, 1, 2),)): 5})
        self.assertEqual(population.loads, {0: 5, 1: 5})
        self.assertEqual(population_flow_step(population, roads), 5)
        self.assertEqual((population.fleeing, population.sheltered), (0, 10))

    def test_advisory_overrides_the_greedy_plan(self):
        zone_map = grid_map(3, 2, population=0, secure=[2])
        roads = WorldBuilder.grid_roads(zone_map, capacity=10)
        population = FleeingPopulation(started=True, secure={2}, groups={(0, ()): 4}, initial=4)
        detour = tuple(edge_between(roads, a, b) for a, b in [(0, 3), (3, 4), (4, 5), (5, 2)])
        adopt_advisory(population, RouteAdvisory(0, 2, detour, 2000.0, 0))
        population_flow_step(population, roads)
        self.assertEqual(list(population.groups), [(3, detour[1:])])

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(min_value=0, max_value=10_000),
        st.floats(min_value=0.0, max_value=0.6),
    )
    def test_agents_are_conserved(self, seed, blocked_share):
        rng = np.random.default_rng(seed)
        zone_map = grid_map(4, 4, population=int(rng.integers(0, 30)), secure=[15])
        roads = WorldBuilder.grid_roads(zone_map, capacity=20)
        for edge_id in roads.edge_ids():
            if rng.random() < blocked_share:
                roads.edge(edge_id)["blocked"] = True
        population = start_flight(zone_map, {15, int(rng.integers(0, 15))}, flee_fraction=0.5)
        for _ in range(12):
            population_flow_step(population, roads)
            self.assertEqual(population.sheltered + population.fleeing, population.initial)
            for edge_id in population.loads:
                self.assertFalse(roads.is_blocked(edge_id))
