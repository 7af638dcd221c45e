import math

import networkx as nx
import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st
from rest_framework.serializers import ValidationError

from actors.models import WORLD
from engine.rng import actor_rng
from world.graphs import lexicographic_shortest_path
from world.models import EarthquakeEvent, RiskLevel, RoadGraph, ZoneMap
from world.utils import (
    WorldBuilder,
    block_roads,
    classify_risk,
    collapse_probability,
    intensity_at,
    intensity_field,
    seed_survivors,
)


def make_map(width, height, strength=0.5, population=0, cell_size_m=500.0):
    cells = WorldBuilder.build_cells(
        width,
        height,
        [[strength] * width for _ in range(height)],
        [[population] * width for _ in range(height)],
        [],
        [],
    )
    zones = WorldBuilder.zones_by_risk(cells, 1)
    return ZoneMap(width, height, cell_size_m, cells, zones, {0: 0})


class ClassifyRiskTest(SimpleTestCase):
    def test_documented_thresholds(self):
        self.assertEqual(classify_risk(0.9), RiskLevel.HIGH)
        self.assertEqual(classify_risk(0.7), RiskLevel.HIGH)
        self.assertEqual(classify_risk(0.3), RiskLevel.MEDIUM)
        self.assertEqual(classify_risk(0.0), RiskLevel.LOW)

    def test_out_of_range_is_rejected(self):
        with self.assertRaises(ValidationError):
            classify_risk(1.2)
        with self.assertRaises(ValidationError):
            classify_risk(-0.1)

    def test_built_cells_carry_their_classification(self):
        cells = WorldBuilder.build_cells(2, 1, [[0.8, 0.1]], [[0, 0]], [], [])
        self.assertEqual([c.risk for c in cells], [RiskLevel.HIGH, RiskLevel.LOW])


class IntensityTest(SimpleTestCase):
    def setUp(self):
        self.zone_map = make_map(5, 5)

    def test_epicenter_cell_gets_the_magnitude(self):
        quake = EarthquakeEvent(epicenter=(0.0, 0.0), magnitude=7.0, t_ms=0)
        self.assertEqual(intensity_at(quake, self.zone_map.cell(0), 1000.0, 500.0), 7.0)

    def test_one_attenuation_length_away(self):
        quake = EarthquakeEvent(epicenter=(0.0, 0.0), magnitude=7.0, t_ms=0)
        cell = self.zone_map.cell_at(2, 0)
        self.assertAlmostEqual(intensity_at(quake, cell, 1000.0, 500.0), 2.5752, places=4)

    def test_zero_magnitude(self):
        quake = EarthquakeEvent(epicenter=(0.0, 0.0), magnitude=0.0, t_ms=0)
        self.assertEqual(intensity_at(quake, self.zone_map.cell(24), 1000.0, 500.0), 0.0)

    def test_non_positive_attenuation_is_rejected(self):
        quake = EarthquakeEvent(epicenter=(0.0, 0.0), magnitude=7.0, t_ms=0)
        with self.assertRaises(ValidationError):
            intensity_at(quake, self.zone_map.cell(0), 0.0)

    @given(
        x=st.floats(min_value=0, max_value=4),
        y=st.floats(min_value=0, max_value=4),
        magnitude=st.floats(min_value=0, max_value=10),
    )
    def test_field_is_radially_non_increasing(self, x, y, magnitude):
        quake = EarthquakeEvent(epicenter=(x, y), magnitude=magnitude, t_ms=0)
        field = intensity_field(self.zone_map, quake, 1000.0)

        def distance(cell):
            return math.hypot(cell.x - x, cell.y - y)

        ordered = sorted(self.zone_map.cells, key=distance)
        for near, far in zip(ordered, ordered[1:]):
            if distance(near) < distance(far):
                self.assertGreaterEqual(field[near.cell_id], field[far.cell_id])

    def test_aftershock_field_keeps_the_cellwise_maximum(self):
        first = intensity_field(self.zone_map, EarthquakeEvent((0.0, 0.0), 7.0, 0), 1000.0)
        second = intensity_field(
            self.zone_map, EarthquakeEvent((4.0, 4.0), 5.0, 10), 1000.0, previous=first
        )
        for cell_id, value in second.items():
            self.assertGreaterEqual(value, first[cell_id])
        self.assertEqual(second[0], 7.0)
        self.assertEqual(second[24], 5.0)


class CollapseProbabilityTest(SimpleTestCase):
    def test_midpoint(self):
        self.assertEqual(collapse_probability(5.0), 0.5)

    def test_two_units_below_midpoint(self):
        self.assertAlmostEqual(collapse_probability(3.0), 1 / (1 + math.exp(2.5)), places=12)
        self.assertAlmostEqual(collapse_probability(3.0), 0.0759, places=4)

    @given(st.floats(min_value=0, max_value=20), st.floats(min_value=0.01, max_value=5))
    def test_strictly_monotone(self, intensity, step):
        self.assertLess(collapse_probability(intensity), collapse_probability(intensity + step))


class SeedSurvivorsTest(SimpleTestCase):
    def test_empty_city_has_no_sites(self):
        zone_map = make_map(3, 3, population=0)
        field = {c.cell_id: 9.0 for c in zone_map.cells}
        rng = actor_rng(1, WORLD).generator
        self.assertEqual(seed_survivors(zone_map, field, 0.5, rng), [])

    def test_zero_trap_rate_has_no_sites(self):
        zone_map = make_map(3, 3, population=10)
        field = {c.cell_id: 0.0 for c in zone_map.cells}
        rng = actor_rng(1, WORLD).generator
        self.assertEqual(seed_survivors(zone_map, field, 0.0, rng), [])

    def test_mean_matches_the_binomial_expectation(self):
        zone_map = make_map(1, 1, population=100)
        field = {0: 5.0}
        trap_rate = 0.2
        p = collapse_probability(5.0) * trap_rate
        totals = [
            sum(s.total for s in seed_survivors(zone_map, field, trap_rate, actor_rng(seed, WORLD).generator))
            for seed in range(1000)
        ]
        sigma = math.sqrt(100 * p * (1 - p) / 1000)
        self.assertLess(abs(np.mean(totals) - 100 * p), 3 * sigma)

    def test_counters_start_consistent(self):
        zone_map = make_map(4, 4, population=50)
        field = {c.cell_id: 8.0 for c in zone_map.cells}
        for site in seed_survivors(zone_map, field, 0.5, actor_rng(3, WORLD).generator):
            self.assertTrue(0 <= site.rescued <= site.detected <= site.total)
            self.assertGreater(site.total, 0)


class RoadTest(SimpleTestCase):
    def test_grid_roads_are_four_connected(self):
        zone_map = make_map(4, 3)
        roads = WorldBuilder.grid_roads(zone_map, capacity=10)
        self.assertEqual(len(roads.edge_ids()), 2 * 4 * 3 - 4 - 3)
        self.assertEqual(roads.endpoints(0), (0, 1))
        self.assertEqual(roads.endpoints(1), (0, 4))

    def test_zero_block_factor_blocks_nothing(self):
        zone_map = make_map(3, 3)
        roads = WorldBuilder.grid_roads(zone_map, capacity=10)
        field = {c.cell_id: 10.0 for c in zone_map.cells}
        damaged = block_roads(roads, field, 0.0, actor_rng(5, WORLD).generator)
        self.assertEqual(damaged.blocked_ids(), [])

    def test_blocking_returns_a_copy_and_keeps_blocked_edges(self):
        zone_map = make_map(3, 3)
        roads = WorldBuilder.grid_roads(zone_map, capacity=10)
        roads.edge(0)["blocked"] = True
        field = {c.cell_id: 20.0 for c in zone_map.cells}
        damaged = block_roads(roads, field, 1.0, actor_rng(5, WORLD).generator)
        self.assertEqual(damaged.blocked_ids(), roads.edge_ids())
        self.assertEqual(roads.blocked_ids(), [0])

    def test_blocked_fraction_matches_the_collapse_model(self):
        roads = RoadGraph()
        roads.add_edge(0, 0, 1, 500.0, 10)
        field = {0: 5.0, 1: 0.0}
        blocked = [
            bool(block_roads(roads, field, 1.0, actor_rng(seed, WORLD).generator).blocked_ids())
            for seed in range(1000)
        ]
        sigma = math.sqrt(0.25 / 1000)
        self.assertLess(abs(np.mean(blocked) - 0.5), 3 * sigma)


def oracle_path(graph, source, targets, usable_edge=lambda data: True):
    best = None
    for target in targets:
        if target == source:
            candidate = (0, ())
        else:
            candidate = None
            for nodes in nx.all_simple_paths(graph, source, target):
                edges = [graph[a][b] for a, b in zip(nodes, nodes[1:])]
                if not all(usable_edge(data) for data in edges):
                    continue
                key = (sum(d["w"] for d in edges), tuple(d["eid"] for d in edges))
                if candidate is None or key < candidate:
                    candidate = key
        if candidate is not None and (best is None or candidate < best):
            best = candidate
    return best


class LexicographicShortestPathTest(SimpleTestCase):
    def random_graph(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 9))
        graph = nx.gnp_random_graph(n, 0.45, seed=seed)
        ids = rng.permutation(graph.number_of_edges())
        for (u, v), eid in zip(sorted(graph.edges()), ids):
            graph[u][v]["w"] = int(rng.integers(1, 4))
            graph[u][v]["eid"] = int(eid)
            graph[u][v]["blocked"] = bool(rng.random() < 0.2)
        return graph, rng

    def test_matches_exhaustive_enumeration(self):
        for seed in range(100):
            graph, rng = self.random_graph(seed)
            source = int(rng.integers(0, graph.number_of_nodes()))
            targets = {int(t) for t in rng.choice(graph.number_of_nodes(), size=2)}

            found = lexicographic_shortest_path(
                graph,
                source,
                targets,
                weight="w",
                edge_key="eid",
                usable=lambda u, v, data: not data["blocked"],
            )
            expected = oracle_path(graph, source, targets, lambda data: not data["blocked"])
            if expected is None:
                self.assertIsNone(found, f"seed {seed}")
            else:
                self.assertEqual((found.cost, found.edge_ids), expected, f"seed {seed}")

    def test_equal_cost_tie_goes_to_smaller_edge_ids(self):
        graph = nx.Graph()
        graph.add_edge("s", "a", w=1, eid=5)
        graph.add_edge("a", "t", w=1, eid=1)
        graph.add_edge("s", "b", w=1, eid=2)
        graph.add_edge("b", "t", w=1, eid=9)
        path = lexicographic_shortest_path(graph, "s", {"t"}, weight="w", edge_key="eid")
        self.assertEqual(path.edge_ids, (2, 9))
        self.assertEqual(path.nodes, ("s", "b", "t"))

    @settings(max_examples=30)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_unreachable_target_gives_none(self, seed):
        graph, _ = self.random_graph(seed)
        graph.add_node("island")
        self.assertIsNone(lexicographic_shortest_path(graph, 0, {"island"}, weight="w", edge_key="eid"))
