import math
from itertools import combinations

import networkx as nx
import numpy as np
from django.test import SimpleTestCase

from actors.models import ALPHA, BETA, CRISIS, SEISMIC, WORLD, ActorId, ActorKind, SensorState, drone
from engine.core import Engine
from engine.rng import actor_rng
from netsim.models import Envelope, Link, LinkKind, LinkTable, RouteKind
from netsim.network import Network
from netsim.topology import build_link_table, link_id
from netsim.utils import apply_disruption, down_probability, force_satellite, route
from rescue_network.defaults import DEFAULTS
from world.models import RiskLevel

ACTORS = DEFAULTS["actors"]


def p2p(a, b, latency=20, up=True, name=None):
    return Link(name or f"p2p:{a}~{b}", (a, b), LinkKind.POINT_TO_POINT, latency, up=up)


def wireless(a, b, latency=40, up=True, name=None):
    return Link(name or f"wl:{a}~{b}", (a, b), LinkKind.WIRELESS, latency, up=up)


def satellite(a, b, latency=600):
    return Link(f"sat:{a}~{b}", (a, b), LinkKind.SATELLITE, latency)


class DownProbabilityTest(SimpleTestCase):
    def test_scales_with_intensity(self):
        self.assertAlmostEqual(down_probability(5.0, beta=0.8), 0.4)
        self.assertEqual(down_probability(0.0, beta=0.8), 0.0)

    def test_is_capped_at_one(self):
        self.assertEqual(down_probability(15.0, beta=0.8), 1.0)

    def test_multiplier_halves_the_risk(self):
        self.assertAlmostEqual(down_probability(5.0, beta=0.8, multiplier=0.5), 0.2)

    def test_link_down_rate_matches_the_model(self):
        downs = []
        for seed in range(1000):
            table = LinkTable([wireless("a", "b")])
            went = apply_disruption(table, {0: 5.0}, actor_rng(seed, WORLD), lambda actor: 0, beta=0.8)
            downs.append(bool(went))
        p = 0.4
        self.assertLess(abs(np.mean(downs) - p), 3 * math.sqrt(p * (1 - p) / 1000))

    def test_satellite_links_never_fail(self):
        table = LinkTable([satellite("a", "b"), wireless("a", "b")])
        went = apply_disruption(table, {0: 10.0}, actor_rng(0, WORLD), lambda actor: 0, beta=1.0)
        self.assertEqual(went, ["wl:a~b"])
        self.assertTrue(table["sat:a~b"].up)


class RouteTest(SimpleTestCase):
    def test_direct_link_wins(self):
        table = LinkTable([p2p("a", "b"), wireless("a", "b")])
        choice = route("a", "b", table)
        self.assertEqual(choice.kind, RouteKind.DIRECT)
        self.assertEqual(choice.latency_ms, 20)

    def test_multihop_when_direct_is_down(self):
        table = LinkTable([p2p("a", "c", up=False), wireless("a", "b"), wireless("b", "c")])
        choice = route("a", "c", table)
        self.assertEqual(choice.kind, RouteKind.MULTIHOP)
        self.assertEqual(choice.path, ("wl:a~b", "wl:b~c"))
        self.assertEqual(choice.latency_ms, 80)

    def test_dead_actors_do_not_relay(self):
        table = LinkTable([wireless("a", "b"), wireless("b", "c")])
        self.assertFalse(route("a", "c", table, dead={"b"}).reachable)
        self.assertTrue(route("a", "b", table, dead={"b"}).reachable)

    def test_satellite_fallback_needs_both_ends_capable(self):
        table = LinkTable([wireless("a", "b", up=False), satellite("a", "b")])
        self.assertEqual(route("a", "b", table, {"a", "b"}).kind, RouteKind.SATELLITE_RELAY)
        self.assertEqual(route("a", "b", table, {"a"}).kind, RouteKind.NO_PATH)
        self.assertEqual(route("a", "b", table, {"a", "b"}, allow_satellite=False).kind, RouteKind.NO_PATH)

    def test_forced_satellite(self):
        table = LinkTable([wireless("a", "b"), satellite("a", "b")])
        choice = force_satellite("a", "b", table)
        self.assertEqual((choice.kind, choice.path, choice.latency_ms), (RouteKind.SATELLITE_RELAY, ("sat:a~b",), 600))

    def expected_route(self, src, dst, links, capable, dead):
        direct = sorted(
            l.link_id for l in links
            if l.kind == LinkKind.POINT_TO_POINT and l.up and set(l.endpoints) == {src, dst}
        )
        if direct:
            return (RouteKind.DIRECT, (direct[0],), links[direct[0]].base_latency_ms)

        graph = nx.Graph()
        for l in links:
            if l.kind == LinkKind.WIRELESS:
                graph.add_edge(*l.endpoints, link=l)
        best = None
        if src in graph and dst in graph:
            for nodes in nx.all_simple_paths(graph, src, dst):
                hops = [graph[a][b]["link"] for a, b in zip(nodes, nodes[1:])]
                if not all(h.up for h in hops) or any(n in dead for n in nodes[1:-1]):
                    continue
                key = (sum(h.base_latency_ms for h in hops), tuple(h.link_id for h in hops))
                if best is None or key < best:
                    best = key
        if best is not None:
            return (RouteKind.MULTIHOP, best[1], best[0])

        relay = sorted(
            l.link_id for l in links
            if l.kind == LinkKind.SATELLITE and set(l.endpoints) == {src, dst}
        )
        if relay and src in capable and dst in capable:
            return (RouteKind.SATELLITE_RELAY, (relay[0],), links[relay[0]].base_latency_ms)
        return (RouteKind.NO_PATH, (), 0)

    def test_matches_exhaustive_enumeration(self):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            nodes = [f"n{i}" for i in range(int(rng.integers(2, 11)))]
            table = LinkTable()
            for a, b in combinations(nodes, 2):
                draw = rng.random()
                if draw < 0.35:
                    table.add(wireless(a, b, latency=int(rng.integers(1, 4)) * 10, up=rng.random() < 0.8))
                elif draw < 0.45:
                    table.add(p2p(a, b, up=rng.random() < 0.5))
                if rng.random() < 0.3:
                    table.add(satellite(a, b))
            capable = {n for n in nodes if rng.random() < 0.6}
            dead = {n for n in nodes if rng.random() < 0.15}
            src, dst = rng.choice(len(nodes), size=2, replace=False)
            src, dst = nodes[src], nodes[dst]

            choice = route(src, dst, table, capable, dead)
            self.assertEqual(
                (choice.kind, choice.path, choice.latency_ms),
                self.expected_route(src, dst, table, capable, dead),
                f"seed {seed}",
            )


class NetworkTest(SimpleTestCase):
    def setUp(self):
        # five nodes: alpha - gw - crisis over wireless, every pair on satellite
        self.engine = Engine(master_seed=0)
        a, gw, c, x, y = "alpha", "gw", "crisis", "x", "y"
        links = [
            wireless(a, gw),
            wireless(gw, c),
            wireless(a, x),
            wireless(x, y),
            satellite(a, c),
        ]
        self.links = LinkTable(links)
        self.network = Network(self.engine, self.links, {a, c}, {n: 0 for n in (a, gw, c, x, y)})

    def test_send_traces_and_schedules_delivery(self):
        envelope = self.network.new_envelope("alpha", "crisis", "report", {"n": 1})
        result = self.network.send(envelope)
        self.assertEqual(result.at_ms, 80)
        record = self.engine.trace.records[-1]
        self.assertEqual(record.kind, "msg_send")
        self.assertEqual(record.payload["route"], "Multihop")
        self.assertEqual(record.payload["path"], ["wl:alpha~gw", "wl:gw~crisis"])
        event = self.engine.queue.pop()
        self.assertEqual((event.t_ms, event.type, event.target), (80, "deliver", "crisis"))

    def test_first_arrival_is_the_faster_of_both_copies(self):
        envelope = self.network.new_envelope("alpha", "crisis", "report", {})
        envelope.channel = "terrestrial"
        terrestrial = self.network.send(envelope)
        twin = Envelope(envelope.msg_id, "alpha", "crisis", "report", {}, 0, channel="satellite")
        relayed = self.network.send(twin)
        self.assertEqual(min(terrestrial.at_ms, relayed.at_ms), 80)
        self.assertEqual(relayed.at_ms, 600)

    def test_no_path_is_traced_as_a_drop(self):
        self.links["wl:alpha~gw"].up = False
        envelope = self.network.new_envelope("alpha", "crisis", "report", {})
        envelope.channel = "terrestrial"
        self.network.send(envelope)
        record = self.engine.trace.records[-1]
        self.assertEqual(record.kind, "msg_drop")
        self.assertEqual(record.payload["msg_id"], envelope.msg_id)
        self.assertEqual(len(self.engine.queue), 0)

    def test_forced_outage_spares_satellites(self):
        self.network.force_down(kinds=["Wireless"])
        self.assertTrue(all(not l.up for l in self.links if l.kind == LinkKind.WIRELESS))
        self.assertTrue(self.links["sat:alpha~crisis"].up)
        downs = self.engine.trace.of_kind("link_down")
        self.assertEqual(len(downs), 4)
        self.assertEqual({r.payload["cause"] for r in downs}, {"forced"})


class TopologyTest(SimpleTestCase):
    def setUp(self):
        self.sensors = {
            ActorId(ActorKind.SENSOR.value, 0): SensorState(
                0, RiskLevel.HIGH, 2.0, 0.3, ActorId(ActorKind.EDGE_SERVER.value, 0), drone(0)
            ),
            ActorId(ActorKind.SENSOR.value, 1): SensorState(
                5, RiskLevel.LOW, 2.0, 0.1, ActorId(ActorKind.EDGE_SERVER.value, 0)
            ),
            ActorId(ActorKind.SENSOR.value, 2): SensorState(
                3, RiskLevel.MEDIUM, 2.0, 0.3, ActorId(ActorKind.EDGE_SERVER.value, 0)
            ),
        }
        self.drones = [drone(0), drone(1), drone(2)]
        self.stations = [ActorId(ActorKind.GROUND_STATION.value, 0)]
        self.table = build_link_table(
            ACTORS,
            self.sensors,
            [ActorId(ActorKind.EDGE_SERVER.value, 0)],
            self.drones,
            [drone(2)],
            self.stations,
            [ActorId(ActorKind.RESCUE_TEAM.value, 0)],
        )

    def test_high_risk_sensor_has_a_hardened_line_to_its_drone(self):
        sensor = ActorId(ActorKind.SENSOR.value, 0)
        [line] = self.table.between(sensor, drone(0), LinkKind.POINT_TO_POINT)
        self.assertTrue(line.hardened)
        [radio] = self.table.between(sensor, ActorId(ActorKind.EDGE_SERVER.value, 0), LinkKind.WIRELESS)
        self.assertEqual(radio.reliability, 1.0)

    def test_medium_risk_sensor_radio_is_weakened(self):
        sensor = ActorId(ActorKind.SENSOR.value, 2)
        [radio] = self.table.between(sensor, ActorId(ActorKind.EDGE_SERVER.value, 0), LinkKind.WIRELESS)
        self.assertEqual(radio.reliability, ACTORS["medium_zone_multiplier"])
        self.assertEqual(self.table.between(sensor, drone(0), LinkKind.POINT_TO_POINT), [])

    def test_low_risk_sensor_has_plain_wireless(self):
        sensor = ActorId(ActorKind.SENSOR.value, 1)
        [radio] = self.table.between(sensor, ActorId(ActorKind.EDGE_SERVER.value, 0), LinkKind.WIRELESS)
        self.assertEqual(radio.reliability, 1.0)
        self.assertEqual(self.table.between(sensor, drone(0), LinkKind.POINT_TO_POINT), [])

    def test_satellite_links_join_every_capable_pair(self):
        capable = sorted({ALPHA, BETA, CRISIS, SEISMIC, *self.drones, *self.stations})
        sat = [l for l in self.table if l.kind == LinkKind.SATELLITE]
        self.assertEqual(len(sat), len(capable) * (len(capable) - 1) // 2)
        self.assertIn(link_id(LinkKind.SATELLITE, ALPHA, CRISIS), self.table.links)

    def test_alpha_reaches_crisis_through_the_gateway(self):
        choice = route(ALPHA, CRISIS, self.table, allow_satellite=False)
        self.assertEqual(choice.kind, RouteKind.MULTIHOP)
        self.assertEqual(choice.latency_ms, 2 * ACTORS["latency_wireless_ms"])
