import io
import tempfile
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from actors.models import BETA, ActorId
from engine.models import TraceRecord
from engine.trace import read_trace
from scenarios.builder import build_simulation
from scenarios.exceptions import ScenarioError
from scenarios.invariants import InvariantChecks
from scenarios.loader import load_scenario, validate_scenario
from scenarios.metrics import compute_metrics, metrics_csv

FIXTURES = Path(settings.RESCUE_NETWORK["FIXTURES_DIR"])
S1 = FIXTURES / "s1.toml"
MINIMAL = FIXTURES / "minimal.toml"


def fixture_data(path):
    return load_scenario(path).to_dict()


def run_scenario(data, check_invariants=False):
    simulation = build_simulation(validate_scenario(data), check_invariants=check_invariants)
    simulation.run()
    return simulation.trace


def first(records, kind, actor=None):
    return next(r for r in records if r.kind == kind and (actor is None or r.actor == actor))


class LoadScenarioTest(SimpleTestCase):
    def test_minimal_scenario_gets_defaults(self):
        scenario = load_scenario(MINIMAL)
        self.assertEqual(scenario.actors["heartbeat_ms"], 5000)
        self.assertEqual(scenario.run["seed"], 0)
        self.assertEqual(scenario.faults["kills"], [])

        header = build_simulation(scenario).trace.records[0]
        self.assertEqual((header.kind, header.actor, header.seq), ("header", "Engine:0", 0))
        self.assertEqual(header.payload["scenario"]["actors"]["heartbeat_ms"], 5000)
        self.assertEqual(header.payload["zones"], [0, 1, 2])

    def test_missing_file(self):
        with self.assertRaisesMessage(ScenarioError, "does not exist"):
            load_scenario(FIXTURES / "nope.toml")

    def test_toml_syntax_error_names_the_line(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "broken.toml"
            path.write_text("[world]\nwidth = 2\nheight = \n", encoding="utf-8")
            with self.assertRaisesMessage(ScenarioError, "line 3"):
                load_scenario(path)

    def test_station_on_a_missing_cell(self):
        data = fixture_data(MINIMAL)
        data["world"]["stations"] = [0, 9]
        with self.assertRaises(ScenarioError) as raised:
            validate_scenario(data)
        self.assertEqual(raised.exception.field, "world.stations")
        self.assertIn("station 1 references cell 9, which does not exist", str(raised.exception))

    def test_high_risk_sensor_needs_a_paired_drone(self):
        data = fixture_data(MINIMAL)
        data["actors"]["sensors"] = [{"cell": 0, "edge": 0}]
        with self.assertRaisesMessage(ScenarioError, "needs a paired drone"):
            validate_scenario(data)

    def test_low_risk_sensor_cannot_be_paired(self):
        data = fixture_data(MINIMAL)
        data["actors"]["sensors"] = [{"cell": 3, "edge": 0, "paired_drone": 1}]
        with self.assertRaisesMessage(ScenarioError, "not High-risk"):
            validate_scenario(data)

    def test_exactly_one_nurse(self):
        data = fixture_data(MINIMAL)
        data["actors"]["drones"][1] = {"station": 1, "role": "Nursing"}
        with self.assertRaises(ScenarioError) as raised:
            validate_scenario(data)
        self.assertEqual(raised.exception.field, "actors.drones")
        self.assertIn("exactly one nursing drone", str(raised.exception))

    def test_zone_partition_must_cover_the_grid(self):
        data = fixture_data(MINIMAL)
        data["world"]["zones"] = [[0, 1], [2]]
        with self.assertRaisesMessage(ScenarioError, "zone partition"):
            validate_scenario(data)

    def test_unknown_section(self):
        data = fixture_data(MINIMAL)
        data["weather"] = {}
        with self.assertRaisesMessage(ScenarioError, "unknown section"):
            validate_scenario(data)

    def test_generated_fault_field(self):
        data = fixture_data(MINIMAL)
        del data["world"]["fault_strength"]
        data["world"]["fault"] = {"x": 0.0, "y": 0.0, "decay_cells": 1.0}
        data["actors"]["sensors"] = []
        scenario = validate_scenario(data)
        self.assertEqual(scenario.world["fault"]["decay_cells"], 1.0)


class ReferenceRunTest(SimpleTestCase):
    """The reference scenario with every terrestrial link up."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.data = fixture_data(S1)
        cls.records = run_scenario(cls.data).records

    def test_same_seed_same_bytes(self):
        again = run_scenario(fixture_data(S1))
        self.assertEqual(
            "".join(r.to_json() + "\n" for r in self.records),
            again.to_jsonl(),
        )

    def test_other_seed_other_trace(self):
        data = fixture_data(S1)
        data["run"]["seed"] = 43
        self.assertNotEqual(run_scenario(data).records, self.records)

    def test_causal_order(self):
        alert = first(self.records, "alert")
        edge_yellow = first(self.records, "yellow", "EdgeServer:0")
        alpha_launch = first(self.records, "launch", "HelicopterAlpha:0")
        arrival = first(self.records, "arrive", "Drone:0")
        red = first(self.records, "red", "CrisisCenter:0")
        self.assertLess(alert.seq, edge_yellow.seq)
        self.assertLess(edge_yellow.seq, alpha_launch.seq)
        self.assertLess(alpha_launch.seq, arrival.seq)
        self.assertLess(arrival.seq, red.seq)
        self.assertEqual(first(self.records, "quake").t_ms, 1000)

    def test_no_links_fail(self):
        self.assertEqual([r for r in self.records if r.kind == "link_down"], [])

    def test_high_risk_alert_goes_to_edge_and_paired_drone(self):
        alert = next(r for r in self.records if r.kind == "alert" and r.actor == "Sensor:0")
        sends = [
            r
            for r in self.records[alert.seq + 1 : alert.seq + 3]
            if r.kind == "msg_send" and r.actor == "Sensor:0"
        ]
        self.assertEqual([r.payload["dst"] for r in sends], ["EdgeServer:0", "Drone:0"])
        self.assertEqual(sends[1].payload["route"], "Direct")

    def test_paired_alert_launches_drone_zero(self):
        launch = first(self.records, "launch", "Drone:0")
        self.assertEqual(launch.payload["trigger"], "PairedSensorAlert")

    def test_first_heartbeat_one_period_after_launch(self):
        launch = first(self.records, "launch", "Drone:1")
        arrival = first(self.records, "arrive", "Drone:1")
        heartbeat = first(self.records, "heartbeat", "Drone:1")
        self.assertEqual(heartbeat.t_ms, launch.t_ms + 5000)
        self.assertLess(heartbeat.t_ms, arrival.t_ms)

    def test_nurse_monitors_drones_from_launch(self):
        launch = first(self.records, "launch", "Drone:0")
        notice = next(
            r
            for r in self.records
            if r.kind == "msg_deliver"
            and r.actor == "Drone:3"
            and (r.payload["msg_kind"], r.payload["src"]) == ("launched", "Drone:0")
        )
        self.assertLess(notice.t_ms - launch.t_ms, 1000)
        self.assertLess(notice.t_ms, first(self.records, "arrive", "Drone:0").t_ms)

    def test_every_zone_is_covered_before_red(self):
        red = first(self.records, "red", "CrisisCenter:0")
        covered = {
            r.payload["zone"]
            for r in self.records[: red.seq]
            if r.kind == "arrive" and r.payload["role"] == "Coverage"
        }
        self.assertEqual(covered, set(self.records[0].payload["zones"]))

    def test_crisis_keeps_the_terrestrial_copy(self):
        delivered = next(
            r
            for r in self.records
            if r.kind == "msg_deliver" and r.actor == "CrisisCenter:0" and r.payload["msg_kind"] == "report"
        )
        self.assertFalse(any(link.startswith("sat:") for link in delivered.payload["path"]))
        twin = next(
            r
            for r in self.records
            if r.kind == "msg_dedup" and r.payload["msg_id"] == delivered.payload["msg_id"]
        )
        self.assertEqual(twin.payload["channel"], "satellite")
        self.assertGreater(twin.t_ms, delivered.t_ms)

    def test_metrics(self):
        report = compute_metrics(self.records)
        self.assertIsNotNone(report.first_full_coverage_ms)
        self.assertLess(report.first_full_coverage_ms, report.red_alarm_ms)
        self.assertEqual(report.failover_latency_ms, [])
        self.assertEqual(report.satellite_fallback_count, 0)
        self.assertEqual(report.dropped_message_count, 0)

    def test_header_describes_the_run(self):
        header = self.records[0]
        rerun = run_scenario(header.payload["scenario"])
        self.assertEqual(rerun.records, self.records)


class FailoverTest(SimpleTestCase):
    def kill(self, data, actor, t_ms, horizon_ms=25_000):
        data["faults"]["kills"] = [{"actor": actor, "t_ms": t_ms}]
        data["run"]["t_end_ms"] = t_ms + horizon_ms
        return run_scenario(data).records

    def test_failure_notice_within_the_bound(self):
        rng = np.random.default_rng(7)
        cases = [("Drone:1", int(t)) for t in rng.integers(30_000, 200_000, size=50)]
        cases += [("Drone:0", int(t)) for t in rng.integers(2_000, 76_000, size=50)]
        for actor, t_kill in cases:
            records = self.kill(fixture_data(S1), actor, t_kill, horizon_ms=110_000)
            [(failed, latency)] = compute_metrics(records).failover_latency_ms
            self.assertEqual(failed, actor)
            self.assertLessEqual(latency, 3 * 5000 + 5000, f"{actor} killed at {t_kill}")

            notice = first(records, "failure_notice")
            spare = notice.payload["coverer"]
            launch = next(r for r in records[notice.seq :] if r.kind == "launch" and r.actor == spare)
            arrival = first(records[launch.seq :], "arrive", spare)
            self.assertEqual(arrival.payload["zone"], notice.payload["zone"])
            self.assertLessEqual(
                arrival.t_ms,
                notice.t_ms + (launch.payload["eta_ms"] - launch.t_ms) + 5000,
                f"{actor} killed at {t_kill}",
            )

    def test_drone_lost_on_the_way_is_replaced(self):
        records = self.kill(fixture_data(S1), "Drone:0", 5_000)
        kill = first(records, "kill", "Drone:0")
        self.assertEqual(kill.payload["status"], "Enroute")
        self.assertEqual(kill.payload["last_heartbeat_ms"], first(records, "launch", "Drone:0").t_ms)
        notice = first(records, "failure_notice")
        self.assertEqual(
            (notice.payload["drone"], notice.payload["zone"], notice.payload["cause"]),
            ("Drone:0", 0, "missed_heartbeats"),
        )
        self.assertLessEqual(notice.t_ms - 5_000, 20_000)
        self.assertIn(notice.payload["coverer"], ("Drone:6", "Drone:7"))

    def test_nurse_lost_before_its_first_summary(self):
        records = self.kill(fixture_data(S1), "Drone:3", 4_000)
        self.assertFalse(
            any(
                r.kind == "msg_send" and r.payload["msg_kind"] == "nurse_summary"
                for r in records
                if r.t_ms <= 4_000
            )
        )
        promote = first(records, "nurse_promote")
        self.assertEqual(promote.payload["previous"], "Drone:3")
        self.assertLessEqual(promote.t_ms - 4_000, 20_000)
        role = first(records, "nurse_role")
        self.assertEqual(role.actor, promote.payload["nurse"])

    def test_nearest_spare_takes_the_zone(self):
        records = self.kill(fixture_data(S1), "Drone:1", 40_000, horizon_ms=80_000)
        notice = first(records, "failure_notice")
        self.assertEqual((notice.payload["drone"], notice.payload["zone"]), ("Drone:1", 1))
        self.assertEqual(notice.payload["coverer"], "Drone:6")
        self.assertTrue(any(r.kind == "arrive" and r.actor == "Drone:6" for r in records))

    def test_beta_covers_when_no_spare_is_left(self):
        data = fixture_data(S1)
        data["actors"]["drones"] = data["actors"]["drones"][:6]
        records = self.kill(data, "Drone:1", 40_000)
        assign = first(records, "assign")
        self.assertEqual((assign.payload["zone"], assign.payload["coverer"]), (1, "HelicopterBeta:0"))
        cover = first(records, "beta_cover")
        self.assertEqual((cover.actor, cover.payload["zone"]), ("HelicopterBeta:0", 1))
        self.assertGreater(cover.t_ms, assign.t_ms)

    def test_gateway_on_station_takes_over_nursing(self):
        data = fixture_data(S1)
        data["actors"]["drone_speed_mps"] = 1.0
        records = self.kill(data, "Drone:3", 30_000, horizon_ms=40_000)
        promote = first(records, "nurse_promote")
        self.assertEqual(promote.payload, {"previous": "Drone:3", "nurse": "Drone:4"})
        change = first(records, "role_change", "Drone:4")
        self.assertEqual(change.payload, {"role": "Nursing", "previous_zone": None})
        self.assertEqual(first(records, "nurse_role").actor, "Drone:4")

    def test_beta_takes_over_nursing(self):
        data = fixture_data(S1)
        drones = data["actors"]["drones"]
        data["actors"]["drones"] = drones[:4] + drones[6:]
        data["actors"]["drone_speed_mps"] = 1.0
        records = self.kill(data, "Drone:3", 30_000, horizon_ms=40_000)
        self.assertFalse(any(r.kind == "arrive" and r.t_ms < 30_000 and r.actor != "Drone:3" for r in records))
        promote = first(records, "nurse_promote")
        self.assertEqual(promote.payload, {"previous": "Drone:3", "nurse": "HelicopterBeta:0"})
        self.assertLessEqual(promote.t_ms - 30_000, 20_000)
        role = first(records, "nurse_role")
        self.assertEqual(role.actor, "HelicopterBeta:0")
        self.assertEqual(role.payload["monitored"], ["Drone:0", "Drone:1", "Drone:2"])
        [(failed, _)] = compute_metrics(records).failover_latency_ms
        self.assertEqual(failed, "Drone:3")


class InjectedEventsTest(SimpleTestCase):
    def test_early_warning_launches_the_fleet_before_the_quake(self):
        data = fixture_data(S1)
        data["quake"]["early_warning_lead_ms"] = 800
        data["run"]["t_end_ms"] = 30_000
        records = run_scenario(data).records

        warning = first(records, "early_warning", "SeismicCenter:0")
        self.assertEqual(warning.t_ms, 200)
        launch = first(records, "launch", "Drone:0")
        self.assertEqual(launch.payload["trigger"], "EarlyWarning")
        self.assertLess(launch.t_ms, 1000)
        self.assertFalse(any(r.kind == "launch" and r.actor in ("Drone:6", "Drone:7") for r in records))

    def test_degraded_drone_is_replaced_without_waiting_for_misses(self):
        data = fixture_data(S1)
        data["faults"]["degrade"] = [{"actor": "Drone:1", "t_ms": 40_000}]
        data["run"]["t_end_ms"] = 60_000
        records = run_scenario(data).records

        kill = first(records, "kill", "Drone:1")
        self.assertEqual(kill.payload["cause"], "self_reported")
        notice = first(records, "failure_notice")
        self.assertEqual((notice.payload["drone"], notice.payload["cause"]), ("Drone:1", "self_reported"))
        self.assertLess(notice.t_ms - kill.t_ms, 5000)

    def test_aftershock_is_traced(self):
        data = fixture_data(S1)
        data["quake"]["aftershocks"] = [{"t_ms": 90_000, "magnitude": 5.5}]
        data["run"]["t_end_ms"] = 95_000
        records = run_scenario(data).records
        aftershock = first(records, "aftershock")
        self.assertEqual((aftershock.t_ms, aftershock.payload["magnitude"]), (90_000, 5.5))


class SatelliteFallbackTest(SimpleTestCase):
    def test_reports_reach_crisis_by_satellite(self):
        for seed in range(50):
            data = fixture_data(S1)
            data["faults"]["force_down_kinds"] = ["Wireless"]
            data["run"].update(seed=seed, t_end_ms=120_000)
            records = run_scenario(data).records

            report = compute_metrics(records)
            self.assertGreater(report.satellite_fallback_count, 0, f"seed {seed}")
            self.assertGreater(report.dropped_message_count, 0, f"seed {seed}")

            at_crisis = [
                r.payload["msg_id"]
                for r in records
                if r.kind == "msg_deliver" and r.actor == "CrisisCenter:0"
            ]
            self.assertEqual(len(at_crisis), len(set(at_crisis)))
            for record in records:
                if record.kind == "msg_deliver" and record.actor == "CrisisCenter:0":
                    self.assertTrue(record.payload["path"][0].startswith("sat:"))


class InvariantSweepTest(SimpleTestCase):
    def test_reference_scenario_is_clean(self):
        trace = run_scenario(fixture_data(S1), check_invariants=True)
        self.assertEqual([r for r in trace if r.kind == "invariant_violation"], [])

    def test_randomized_sweep_is_clean(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            data = fixture_data(S1)
            data["actors"]["disruption_beta"] = 0.8
            data["faults"]["kills"] = [
                {"actor": f"Drone:{int(rng.integers(0, 8))}", "t_ms": int(rng.integers(20_000, 150_000))}
            ]
            data["quake"]["aftershocks"] = [
                {"t_ms": 90_000, "magnitude": 5.5, "resample_links": True}
            ]
            data["run"].update(seed=seed, t_end_ms=240_000)
            trace = run_scenario(data, check_invariants=True)
            self.assertEqual(trace.of_kind("invariant_violation"), [], f"seed {seed}")


class InvariantChecksTest(SimpleTestCase):
    def simulation(self, until_ms):
        simulation = build_simulation(load_scenario(S1))
        simulation.engine.run_until(until_ms)
        return simulation, InvariantChecks(simulation)

    def test_advisory_through_a_congested_road(self):
        simulation, checks = self.simulation(0)
        roads = simulation.context.roads
        edge = roads.edge_ids()[0]
        simulation.context.population.loads[edge] = roads.edge(edge)["capacity"] + 1
        simulation.trace.append(
            0, "Drone:0", "advisory", {"origin": 0, "destination": 1, "path": [edge], "length_m": 500.0}
        )
        self.assertIn("congested edges", checks.advisory_safety(simulation.engine))

    def test_advisory_on_open_roads_passes(self):
        simulation, checks = self.simulation(0)
        edge = simulation.context.roads.edge_ids()[0]
        simulation.trace.append(
            0, "Drone:0", "advisory", {"origin": 0, "destination": 1, "path": [edge], "length_m": 500.0}
        )
        self.assertIsNone(checks.advisory_safety(simulation.engine))

    def test_two_coverers_in_one_zone(self):
        simulation, checks = self.simulation(80_000)
        self.assertIsNone(checks.coverage_safety(simulation.engine))
        simulation.actors[BETA].zones.add(1)
        self.assertEqual(
            checks.coverage_safety(simulation.engine), "zone 1 covered by Drone:1, HelicopterBeta:0"
        )

    def test_unanswered_failure(self):
        simulation, checks = self.simulation(40_000)
        self.assertIsNone(checks.failover_liveness(simulation.engine))
        simulation.actors[ActorId.parse("Drone:1")].fail("injected")
        self.assertIsNone(checks.failover_liveness(simulation.engine))
        simulation.engine.clock = 60_001
        self.assertIn("Drone:1 failed at 40000ms", checks.failover_liveness(simulation.engine))

    def test_answered_failure(self):
        simulation, checks = self.simulation(40_000)
        simulation.actors[ActorId.parse("Drone:1")].fail("injected")
        checks.failover_liveness(simulation.engine)
        simulation.engine.run_until(70_000)
        self.assertTrue(simulation.trace.of_kind("failure_notice"))
        self.assertIsNone(checks.failover_liveness(simulation.engine))


class MetricsTest(SimpleTestCase):
    def records(self):
        rows = [
            (0, "Engine:0", "header", {"format_version": 1, "scenario": {}, "zones": [0, 1]}),
            (1000, "World:0", "quake", {"epicenter": [0.0, 0.0], "magnitude": 7.0}),
            (1000, "World:0", "survivors_seeded", {"sites": [[3, 6], [4, 2], [7, 2]], "total": 10, "detected": 0, "rescued": 0}),
            (5000, "Drone:0", "arrive", {"zone": 0, "role": "Coverage"}),
            (6000, "Drone:0", "kill", {"cause": "injected", "zone": 0, "role": "Coverage", "status": "OnStation"}),
            (7000, "Drone:1", "arrive", {"zone": 1, "role": "Coverage"}),
            (8000, "Drone:1", "scan", {"zone": 1, "detected": [[3, 2], [4, 1]]}),
            (9000, "HelicopterAlpha:0", "msg_drop", {"msg_id": 5, "src": "HelicopterAlpha:0", "dst": "CrisisCenter:0", "msg_kind": "report", "channel": "terrestrial"}),
            (9600, "CrisisCenter:0", "msg_deliver", {"msg_id": 5, "path": ["sat:CrisisCenter:0~HelicopterAlpha:0"], "msg_kind": "report"}),
            (12000, "Drone:3", "scan", {"zone": 1, "detected": [[7, 1], [3, 1]]}),
            (21000, "Drone:3", "failure_notice", {"drone": "Drone:0", "zone": 0, "cause": "missed_heartbeats", "coverer": "HelicopterBeta:0"}),
            (30000, "CrisisCenter:0", "red", {"sources": ["Drone:1", "EdgeServer:0"]}),
            (40000, "RescueTeam:0", "rescue", {"site": 3, "saved": 4, "complete": False}),
        ]
        return [TraceRecord(t, seq, actor, kind, payload) for seq, (t, actor, kind, payload) in enumerate(rows)]

    def test_hand_computed_values(self):
        report = compute_metrics(self.records())
        self.assertEqual(report.first_full_coverage_ms, 7000)
        self.assertEqual(report.failover_latency_ms, [("Drone:0", 15000)])
        self.assertEqual(report.detection_latency_ms, {"min": 7000, "median": 7000.0, "max": 11000})
        self.assertEqual(report.rescued_fraction, 0.4)
        self.assertEqual(report.satellite_fallback_count, 1)
        self.assertEqual(report.dropped_message_count, 1)
        self.assertEqual(report.red_alarm_ms, 30000)

    def test_csv_layout(self):
        self.assertEqual(
            metrics_csv(compute_metrics(self.records())),
            "metric,key,value\n"
            "first_full_coverage_ms,,7000\n"
            "failover_latency_ms,Drone:0,15000\n"
            "detection_latency_ms,min,7000\n"
            "detection_latency_ms,median,7000.0\n"
            "detection_latency_ms,max,11000\n"
            "rescued_fraction,,0.4\n"
            "satellite_fallback_count,,1\n"
            "dropped_message_count,,1\n"
            "red_alarm_ms,,30000\n",
        )

    def test_empty_run_leaves_values_blank(self):
        report = compute_metrics(self.records()[:2])
        self.assertIsNone(report.first_full_coverage_ms)
        self.assertIsNone(report.rescued_fraction)
        self.assertEqual(report.detection_latency_ms["median"], None)

    def test_report_is_byte_stable(self):
        with tempfile.TemporaryDirectory() as tmp:
            trace = Path(tmp) / "trace.jsonl"
            trace.write_text("".join(r.to_json() + "\n" for r in self.records()), encoding="utf-8")
            outputs = []
            for name in ("a.csv", "b.csv"):
                call_command("report", trace=str(trace), csv=str(Path(tmp) / name), stdout=io.StringIO())
                outputs.append((Path(tmp) / name).read_bytes())
            self.assertEqual(outputs[0], outputs[1])


class CommandTest(SimpleTestCase):
    def test_validate_ok(self):
        out = io.StringIO()
        call_command("validate", scenario=str(S1), stdout=out)
        self.assertIn("ok", out.getvalue())
        self.assertIn("8 drones", out.getvalue())

    def test_validate_rejects_a_bad_file(self):
        with self.assertRaises(CommandError) as raised:
            call_command("validate", scenario=str(FIXTURES / "nope.toml"), stdout=io.StringIO())
        self.assertEqual(raised.exception.returncode, 1)

    def test_run_until_zero_writes_only_the_header(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "trace.jsonl"
            call_command("run", scenario=str(S1), until=0, trace=str(path), stdout=io.StringIO())
            records = list(read_trace(path))
        self.assertEqual([r.kind for r in records], ["header"])
        self.assertEqual(records[0].payload["scenario"]["run"]["t_end_ms"], 0)

    def test_run_to_stdout_with_seed_override(self):
        out = io.StringIO()
        call_command("run", scenario=str(MINIMAL), seed=5, until=3000, stdout=out)
        lines = out.getvalue().splitlines()
        header = TraceRecord.from_json(lines[0])
        self.assertEqual(header.payload["scenario"]["run"]["seed"], 5)
        self.assertEqual([TraceRecord.from_json(line).seq for line in lines], list(range(len(lines))))

    def test_report_on_a_malformed_trace(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "trace.jsonl"
            path.write_text("not json\n", encoding="utf-8")
            with self.assertRaises(CommandError) as raised:
                call_command("report", trace=str(path), stdout=io.StringIO())
        self.assertEqual(raised.exception.returncode, 1)
        self.assertIn("line 1", str(raised.exception))

    def test_report_prints_csv_without_an_output_path(self):
        with tempfile.TemporaryDirectory() as tmp:
            trace = Path(tmp) / "trace.jsonl"
            call_command("run", scenario=str(MINIMAL), trace=str(trace), stdout=io.StringIO())
            out, err = io.StringIO(), io.StringIO()
            call_command("report", trace=str(trace), stdout=out, stderr=err)
        self.assertTrue(out.getvalue().startswith("metric,key,value\n"))
        self.assertNotIn("first full coverage", out.getvalue())
        self.assertIn("first full coverage", err.getvalue())

    def test_report_prints_the_summary_next_to_a_csv_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            trace = Path(tmp) / "trace.jsonl"
            call_command("run", scenario=str(MINIMAL), trace=str(trace), stdout=io.StringIO())
            out = io.StringIO()
            call_command("report", trace=str(trace), csv=str(Path(tmp) / "m.csv"), stdout=out)
            self.assertTrue((Path(tmp) / "m.csv").read_text(encoding="utf-8").startswith("metric,"))
        self.assertIn("first full coverage", out.getvalue())
        self.assertIn("red alarm", out.getvalue())


class SettingsTest(SimpleTestCase):
    def test_project_and_app_loggers_are_configured(self):
        loggers = settings.LOGGING["loggers"]
        for name in ("rescue_network", "world", "engine", "netsim", "actors", "postquake", "scenarios"):
            self.assertEqual(loggers[name]["handlers"], ["console"], name)
