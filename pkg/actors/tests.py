import numpy as np
from django.test import SimpleTestCase
from hypothesis import given
from hypothesis import strategies as st

from actors.base import SimulationContext
from actors.models import (
    BETA,
    ActorId,
    ActorKind,
    Alert,
    AlarmLevel,
    CrisisState,
    DroneRole,
    DroneState,
    DroneStatus,
    EdgeWindow,
    FleetEntry,
    KnownSite,
    NurseLedger,
    SensorState,
    TeamState,
    TeamStatus,
    Trigger,
    drone,
)
from actors.protocol import (
    crisis_assignments,
    crisis_on_confirmation,
    drone_on_arrive,
    drone_on_trigger,
    edge_on_alert,
    nurse_on_tick,
    nurse_successor,
    reassign_zone,
    rescue_team_step,
    sensor_on_sample,
)
from engine.rng import actor_rng
from postquake.utils import priority_score
from world.models import RiskLevel, RoadGraph, SurvivorSite, Zone, ZoneMap
from world.utils import WorldBuilder

EDGE = ActorId(ActorKind.EDGE_SERVER.value, 0)


def sensor(index):
    return ActorId(ActorKind.SENSOR.value, index)


def team(index):
    return ActorId(ActorKind.RESCUE_TEAM.value, index)


def line_map(width, zone_cells, cell_size_m=500.0):
    cells = WorldBuilder.build_cells(width, 1, [[0.5] * width], [[0] * width], [], [])
    return ZoneMap(width, 1, cell_size_m, cells, [Zone(0, tuple(zone_cells), RiskLevel.MEDIUM)], {0: 0})


def line_roads(length):
    roads = RoadGraph()
    for i in range(length):
        roads.add_edge(i, i, i + 1, 500.0, 10)
    return roads


class SensorOnSampleTest(SimpleTestCase):
    def setUp(self):
        self.state = SensorState(4, RiskLevel.LOW, theta=2.0, noise_sigma=0.0, edge=EDGE)
        self.rng = actor_rng(0, sensor(0))

    def test_threshold_is_inclusive(self):
        alert = sensor_on_sample(sensor(0), self.state, 2.0, self.rng)
        self.assertEqual(alert, Alert(sensor=sensor(0), cell_id=4, measured=2.0))

    def test_below_threshold_is_silent(self):
        self.assertIsNone(sensor_on_sample(sensor(0), self.state, 1.8, self.rng))


class EdgeOnAlertTest(SimpleTestCase):
    def alert(self, index):
        return Alert(sensor=sensor(index), cell_id=index, measured=float(index))

    def test_too_few_sensors_send_nothing(self):
        window = EdgeWindow(k=3, window_ms=2000)
        self.assertIsNone(edge_on_alert(window, self.alert(0), 0))
        self.assertIsNone(edge_on_alert(window, self.alert(1), 10))
        self.assertIsNone(edge_on_alert(window, self.alert(1), 20))
        self.assertFalse(window.yellow)

    def test_yellow_happens_once(self):
        window = EdgeWindow(k=3, window_ms=2000)
        reports = [edge_on_alert(window, self.alert(i % 4), 100 * i) for i in range(8)]
        sent = [r for r in reports if r is not None]
        self.assertEqual(len(sent), 1)
        self.assertIsNotNone(reports[2])
        self.assertEqual(reports[2].cells, (0, 1, 2))
        self.assertEqual(reports[2].estimated_intensity, 1.0)

    def test_alerts_outside_the_window_expire(self):
        window = EdgeWindow(k=2, window_ms=1000)
        edge_on_alert(window, self.alert(0), 0)
        self.assertIsNone(edge_on_alert(window, self.alert(1), 1001))
        self.assertIsNotNone(edge_on_alert(window, self.alert(2), 1500))

    @staticmethod
    def first_window_hit(timeline, k, window_ms):
        for j, (t_j, _) in enumerate(timeline):
            distinct = {s for t, s in timeline[: j + 1] if t >= t_j - window_ms}
            if len(distinct) >= k:
                return j
        return None

    def test_matches_a_brute_force_window_scan(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            k = int(rng.integers(1, 5))
            window_ms = int(rng.integers(100, 3000))
            times = np.sort(rng.integers(0, 10_000, size=int(rng.integers(1, 20))))
            timeline = [(int(t), int(rng.integers(0, 6))) for t in times]

            window = EdgeWindow(k=k, window_ms=window_ms)
            sent = [
                j
                for j, (t, s) in enumerate(timeline)
                if edge_on_alert(window, self.alert(s), t) is not None
            ]
            expected = self.first_window_hit(timeline, k, window_ms)
            self.assertEqual(sent, [] if expected is None else [expected], f"seed {seed}")


class DroneTransitionTest(SimpleTestCase):
    def setUp(self):
        self.zone_map = line_map(3, zone_cells=[2])
        self.docked = DroneState(DroneStatus.DOCKED, DroneRole.COVERAGE, station_id=0, zone=0)

    def test_launch_eta_uses_distance_over_speed(self):
        launched = drone_on_trigger(self.docked, Trigger.LAUNCH_CMD, 1000, self.zone_map, 20.0)
        self.assertEqual(launched.status, DroneStatus.ENROUTE)
        self.assertEqual(launched.eta_ms, 1000 + 50_000)

    def test_second_trigger_changes_nothing(self):
        launched = drone_on_trigger(self.docked, Trigger.PAIRED_SENSOR_ALERT, 0, self.zone_map, 20.0)
        again = drone_on_trigger(launched, Trigger.EARLY_WARNING, 500, self.zone_map, 20.0)
        self.assertIs(again, launched)

    def test_failed_drone_stays_failed(self):
        failed = DroneState(DroneStatus.FAILED, DroneRole.COVERAGE, station_id=0, zone=0)
        self.assertEqual(drone_on_trigger(failed, Trigger.LAUNCH_CMD, 0, self.zone_map, 20.0), failed)

    def test_docked_spare_without_zone_stays(self):
        spare = DroneState(DroneStatus.DOCKED, DroneRole.COVERAGE, station_id=0)
        self.assertEqual(drone_on_trigger(spare, Trigger.LAUNCH_CMD, 0, self.zone_map, 20.0), spare)

    def test_nurse_takes_off_in_place(self):
        nurse = DroneState(DroneStatus.DOCKED, DroneRole.NURSING, station_id=0)
        launched = drone_on_trigger(nurse, Trigger.LOCAL_QUAKE_SENSED, 300, self.zone_map, 20.0)
        self.assertEqual((launched.status, launched.eta_ms), (DroneStatus.ENROUTE, 300))

    def test_arrival(self):
        launched = drone_on_trigger(self.docked, Trigger.LAUNCH_CMD, 0, self.zone_map, 20.0)
        arrived = drone_on_arrive(launched)
        self.assertEqual((arrived.status, arrived.zone, arrived.eta_ms), (DroneStatus.ON_STATION, 0, None))
        self.assertEqual(drone_on_arrive(self.docked), self.docked)


class NurseOnTickTest(SimpleTestCase):
    def ledger(self, last_seen):
        return NurseLedger(heartbeat_ms=5000, miss_limit=3, last_seen=dict(last_seen))

    def test_exactly_at_the_limit_is_healthy(self):
        ledger = self.ledger({drone(1): 0})
        self.assertEqual(nurse_on_tick(ledger, 15_000, {drone(1): 2}), [])
        self.assertIn(drone(1), ledger.last_seen)

    def test_one_missed_heartbeat_is_healthy(self):
        ledger = self.ledger({drone(1): 5000})
        self.assertEqual(nurse_on_tick(ledger, 15_000, {}), [])

    def test_past_the_limit_fails_and_stops_monitoring(self):
        ledger = self.ledger({drone(1): 0, drone(2): 10_000})
        [notice] = nurse_on_tick(ledger, 15_001, {drone(1): 2})
        self.assertEqual((notice.drone, notice.zone), (drone(1), 2))
        self.assertEqual(list(ledger.last_seen), [drone(2)])


class ReassignZoneTest(SimpleTestCase):
    def setUp(self):
        cells = WorldBuilder.build_cells(5, 5, [[0.5] * 5] * 5, [[0] * 5] * 5, [], [])
        self.zone_map = ZoneMap(5, 5, 500.0, cells, [Zone(0, (12,), RiskLevel.MEDIUM)])

    def entry(self, index, xy, status=DroneStatus.DOCKED, spare=True):
        return FleetEntry(drone(index), xy, status, spare=spare)

    def test_single_spare_is_chosen(self):
        fleet = [self.entry(1, (0.0, 0.0), spare=False), self.entry(3, (4.0, 4.0))]
        self.assertEqual(reassign_zone(0, self.zone_map, fleet).coverer, drone(3))

    def test_equidistant_spares_go_to_lower_index(self):
        fleet = [self.entry(7, (0.0, 2.0)), self.entry(4, (4.0, 2.0))]
        assign = reassign_zone(0, self.zone_map, fleet)
        self.assertEqual(assign.coverer, drone(4))
        self.assertEqual(assign.distance_m, 1000.0)

    def test_no_spare_falls_back_to_beta(self):
        fleet = [self.entry(2, (0.0, 0.0), status=DroneStatus.ENROUTE)]
        assign = reassign_zone(0, self.zone_map, fleet)
        self.assertEqual((assign.coverer, assign.distance_m), (BETA, None))

    def test_matches_brute_force_minimum(self):
        centroid = self.zone_map.centroid(0)
        for seed in range(100):
            rng = np.random.default_rng(seed)
            fleet = [
                self.entry(
                    i,
                    (float(rng.integers(0, 5)), float(rng.integers(0, 5))),
                    status=list(DroneStatus)[int(rng.integers(0, 4))],
                    spare=bool(rng.random() < 0.5),
                )
                for i in map(int, rng.permutation(int(rng.integers(1, 13))))
            ]
            candidates = sorted(
                (self.zone_map.distance_m(e.station_xy, centroid), e.drone.index)
                for e in fleet
                if e.spare and e.status == DroneStatus.DOCKED
            )
            expected = drone(candidates[0][1]) if candidates else BETA
            self.assertEqual(reassign_zone(0, self.zone_map, fleet).coverer, expected, f"seed {seed}")


class NurseSuccessorTest(SimpleTestCase):
    def test_lowest_index_on_station_drone(self):
        fleet = [
            FleetEntry(drone(5), (0.0, 0.0), DroneStatus.ON_STATION),
            FleetEntry(drone(2), (0.0, 0.0), DroneStatus.ON_STATION),
            FleetEntry(drone(1), (0.0, 0.0), DroneStatus.ENROUTE),
        ]
        self.assertEqual(nurse_successor(fleet), drone(2))

    def test_gateway_on_station_is_eligible(self):
        fleet = [
            FleetEntry(drone(2), (0.0, 0.0), DroneStatus.ON_STATION),
            FleetEntry(drone(0), (0.0, 0.0), DroneStatus.ON_STATION, role=DroneRole.GATEWAY),
        ]
        self.assertEqual(nurse_successor(fleet), drone(0))

    def test_nursing_entry_is_skipped(self):
        fleet = [
            FleetEntry(drone(1), (0.0, 0.0), DroneStatus.ON_STATION, role=DroneRole.NURSING),
            FleetEntry(drone(4), (0.0, 0.0), DroneStatus.ON_STATION, role=DroneRole.GATEWAY),
        ]
        self.assertEqual(nurse_successor(fleet), drone(4))

    def test_beta_when_nobody_is_on_station(self):
        fleet = [FleetEntry(drone(0), (0.0, 0.0), DroneStatus.DOCKED, spare=True)]
        self.assertEqual(nurse_successor(fleet), BETA)


class CrisisTest(SimpleTestCase):
    def test_single_source_stays_yellow(self):
        state = CrisisState()
        self.assertEqual(crisis_on_confirmation(state, "Drone:0", 6.0, 4.0), [AlarmLevel.YELLOW])
        self.assertEqual(crisis_on_confirmation(state, "Drone:0", 7.0, 4.0), [])
        self.assertEqual(state.alarm, AlarmLevel.YELLOW)

    def test_two_sources_turn_red_once(self):
        state = CrisisState()
        crisis_on_confirmation(state, "EdgeServer:0", 5.0, 4.0)
        self.assertEqual(crisis_on_confirmation(state, "Drone:0", 4.0, 4.0), [AlarmLevel.RED])
        self.assertEqual(crisis_on_confirmation(state, "Drone:1", 9.0, 4.0), [])
        self.assertEqual(state.alarm, AlarmLevel.RED)

    def test_weak_readings_do_not_confirm(self):
        state = CrisisState()
        crisis_on_confirmation(state, "EdgeServer:0", 3.9, 4.0)
        crisis_on_confirmation(state, "Drone:0", 2.0, 4.0)
        self.assertEqual(state.alarm, AlarmLevel.YELLOW)
        self.assertEqual(state.confirmations, {})

    def test_no_assignments_before_red(self):
        state = CrisisState(
            sites={1: KnownSite(1, detected=3, intensity=5.0)}, team_tasks={team(0): None}
        )
        self.assertEqual(crisis_assignments(state), [])

    def test_teams_get_the_top_scores_in_order(self):
        sites = {cell: KnownSite(cell, detected=d, intensity=6.0) for cell, d in [(10, 2), (11, 5), (12, 1), (13, 4), (14, 3)]}
        state = CrisisState(
            alarm=AlarmLevel.RED, sites=sites, team_tasks={team(2): None, team(0): None, team(1): None}
        )
        intensity = {cell: site.intensity for cell, site in sites.items()}
        by_score = sorted(sites.values(), key=lambda s: -priority_score(s, intensity))

        pairs = crisis_assignments(state)
        self.assertEqual(pairs, [(team(i), by_score[i].cell_id) for i in range(3)])
        self.assertEqual(crisis_assignments(state), [])


class RescueTeamStepTest(SimpleTestCase):
    def test_team_on_site_rescues_in_one_tick(self):
        site = SurvivorSite(cell_id=1, total=4, detected=3)
        state = TeamState(position=1, status=TeamStatus.MOVING, target=1)
        after, saved = rescue_team_step(state, line_roads(2), (), site, rescue_rate=5)
        self.assertEqual(saved, 3)
        self.assertEqual((after.status, after.target), (TeamStatus.IDLE, None))
        self.assertEqual(site.rescued, 3)

    def test_rescue_rate_caps_each_tick(self):
        site = SurvivorSite(cell_id=0, total=8, detected=8)
        state = TeamState(position=0, status=TeamStatus.MOVING, target=0)
        after, saved = rescue_team_step(state, line_roads(1), (), site, rescue_rate=5)
        self.assertEqual((saved, after.status), (5, TeamStatus.RESCUING))
        after, saved = rescue_team_step(after, line_roads(1), (), site, rescue_rate=5)
        self.assertEqual((saved, after.status), (3, TeamStatus.IDLE))

    def test_four_edges_take_four_ticks(self):
        roads = line_roads(4)
        state = TeamState(position=0, status=TeamStatus.MOVING, target=4)
        for tick in range(4):
            self.assertNotEqual(state.position, 4)
            state, _ = rescue_team_step(state, roads, (), None, rescue_rate=5)
        self.assertEqual(state.position, 4)

    def test_blocked_edge_is_never_crossed(self):
        roads = line_roads(4)
        state = TeamState(position=0, status=TeamStatus.MOVING, target=4)
        state, _ = rescue_team_step(state, roads, (), None, rescue_rate=5)
        roads.edge(2)["blocked"] = True
        positions = [state.position]
        for _ in range(4):
            state, _ = rescue_team_step(state, roads, (), None, rescue_rate=5)
            positions.append(state.position)
        self.assertEqual(positions, [1, 2, 2, 2, 2])
        self.assertEqual(state.status, TeamStatus.BLOCKED)

    def test_detour_around_a_block(self):
        cells = WorldBuilder.build_cells(3, 3, [[0.5] * 3] * 3, [[0] * 3] * 3, [], [])
        zone_map = ZoneMap(3, 3, 500.0, cells, [])
        roads = WorldBuilder.grid_roads(zone_map, capacity=10)
        state = TeamState(position=0, status=TeamStatus.MOVING, target=2)
        state, _ = rescue_team_step(state, roads, (), None, rescue_rate=5)
        for edge_id in roads.edge_ids():
            if set(roads.endpoints(edge_id)) == {1, 2}:
                roads.edge(edge_id)["blocked"] = True
        visited = [state.position]
        while state.position != 2:
            before = state.position
            state, _ = rescue_team_step(state, roads, (), None, rescue_rate=5)
            self.assertNotEqual({before, state.position}, {1, 2})
            visited.append(state.position)
        self.assertEqual(visited, [1, 4, 5, 2])

    @given(st.integers(min_value=0, max_value=40), st.integers(min_value=1, max_value=10))
    def test_rescue_never_exceeds_detected(self, detected, rate):
        site = SurvivorSite(cell_id=0, total=40, detected=detected)
        state = TeamState(position=0, status=TeamStatus.MOVING, target=0)
        roads = line_roads(1)
        for _ in range(50):
            state, _ = rescue_team_step(state, roads, (), site, rescue_rate=rate)
        self.assertEqual(site.rescued, detected)
        self.assertEqual(state.status, TeamStatus.IDLE)


class SimulationContextTest(SimpleTestCase):
    def context(self):
        return SimulationContext(line_map(3, [0, 1, 2]), line_roads(2), params={}, world_params={})

    def test_world_state_starts_empty(self):
        context = self.context()
        self.assertIsNone(context.intensity)
        self.assertEqual(context.sites, {})
        self.assertEqual(context.roster, {})
        self.assertFalse(context.population.started)

    def test_contexts_do_not_share_world_state(self):
        first, second = self.context(), self.context()
        first.sites[0] = SurvivorSite(0, total=3)
        self.assertEqual(second.sites, {})
        self.assertIsNot(first.population, second.population)
