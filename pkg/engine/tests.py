import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from actors.models import ActorId, ActorKind
from engine.core import Engine
from engine.exceptions import InvariantViolation, SchedulingError
from engine.models import EventQueue, TraceRecord
from engine.rng import MASK64, actor_rng, splitmix64
from engine.trace import read_trace


class Recorder:
    """Minimal actor: logs every dispatched event."""

    def __init__(self, actor_id, on_event=None):
        self.actor_id = actor_id
        self.seen = []
        self.on_event = on_event

    def bind(self, engine):
        self.engine = engine

    def dispatch(self, event):
        self.seen.append((event.t_ms, event.seq, event.kind))
        if self.on_event:
            self.on_event(self, event)


class EventQueueTest(SimpleTestCase):
    def test_same_time_pops_in_scheduling_order(self):
        queue = EventQueue()
        queue.push(100, "x", "timer", "A")
        queue.push(100, "x", "timer", "B")
        self.assertEqual([queue.pop().kind, queue.pop().kind], ["A", "B"])

    def test_earlier_time_pops_first(self):
        queue = EventQueue()
        queue.push(100, "x", "timer", "late")
        queue.push(50, "x", "timer", "early")
        self.assertEqual(queue.pop().kind, "early")

    def test_pop_on_empty_queue(self):
        self.assertIsNone(EventQueue().pop())


class EngineTest(SimpleTestCase):
    def setUp(self):
        self.engine = Engine(master_seed=7)
        self.actor = Recorder("A:0")
        self.engine.register(self.actor)

    def test_scheduling_in_the_past_fails(self):
        self.engine.schedule(10, "A:0", "timer", "tick")
        self.engine.run_until(20)
        with self.assertRaises(SchedulingError):
            self.engine.schedule(5, "A:0", "timer", "late")

    def test_empty_queue_only_advances_the_clock(self):
        self.engine.run_until(1000)
        self.assertEqual(self.engine.clock, 1000)
        self.assertEqual(self.engine.dispatched, 0)

    def test_events_after_the_horizon_wait(self):
        self.engine.schedule(500, "A:0", "timer", "now")
        self.engine.schedule(501, "A:0", "timer", "later")
        self.engine.run_until(500)
        self.assertEqual([kind for _, _, kind in self.actor.seen], ["now"])
        self.assertEqual(len(self.engine.queue), 1)

    def test_same_time_follow_up_runs_after_its_cause(self):
        def follow_up(actor, event):
            if event.kind == "first":
                actor.engine.schedule(event.t_ms, "A:0", "timer", "follow")

        self.actor.on_event = follow_up
        self.engine.schedule(100, "A:0", "timer", "first")
        self.engine.schedule(100, "A:0", "timer", "second")
        self.engine.run_until(100)
        self.assertEqual([kind for _, _, kind in self.actor.seen], ["first", "second", "follow"])

    def test_random_events_dispatch_in_sorted_order(self):
        rng = np.random.default_rng(2024)
        times = rng.integers(0, 5000, size=10_000)
        injected = []
        for t in times:
            event = self.engine.schedule(int(t), "A:0", "timer", "tick")
            injected.append((event.t_ms, event.seq))
        self.engine.run_until(5000)
        self.assertEqual([(t, seq) for t, seq, _ in self.actor.seen], sorted(injected))

    def test_invariant_violation_is_traced_and_raised(self):
        engine = Engine(master_seed=1, check_invariants=True)
        engine.register(Recorder("A:0"))
        engine.add_check("always_broken", lambda e: "boom" if e.clock >= 30 else None)
        engine.schedule(10, "A:0", "timer", "ok")
        engine.schedule(30, "A:0", "timer", "bad")

        with self.assertRaises(InvariantViolation) as raised:
            engine.run_until(100)
        self.assertEqual(raised.exception.name, "always_broken")
        self.assertEqual(raised.exception.t_ms, 30)
        last = engine.trace.records[-1]
        self.assertEqual(last.kind, "invariant_violation")
        self.assertEqual(last.payload, {"invariant": "always_broken", "detail": "boom"})


class ActorRngTest(SimpleTestCase):
    def test_splitmix_reference_value(self):
        self.assertEqual(splitmix64(0), 0xE220A8397B1DCDAF)
        self.assertLessEqual(splitmix64(MASK64), MASK64)

    def test_same_inputs_same_sequence(self):
        actor = ActorId(ActorKind.DRONE.value, 3)
        a, b = actor_rng(42, actor), actor_rng(42, actor)
        self.assertEqual([a.random() for _ in range(100)], [b.random() for _ in range(100)])

    def test_distinct_actors_get_distinct_seeds(self):
        actors = [ActorId(kind.value, i) for kind in ActorKind for i in range(20)][:200]
        seeds = {actor_rng(42, actor).seed for actor in actors}
        self.assertEqual(len(seeds), len(actors))

    def test_master_seed_changes_every_stream(self):
        actors = [ActorId(kind.value, i) for kind in ActorKind for i in range(5)]
        for actor in actors:
            self.assertNotEqual(actor_rng(1, actor).random(), actor_rng(2, actor).random())

    def test_zero_sigma_draws_no_noise(self):
        stream = actor_rng(0, ActorId(ActorKind.SENSOR.value, 0))
        self.assertEqual(stream.normal(0.0), 0.0)


class TraceTest(SimpleTestCase):
    def test_fixed_key_order(self):
        record = TraceRecord(t_ms=5, seq=1, actor="Drone:0", kind="arrive", payload={"zone": 2, "role": "Coverage"})
        line = record.to_json()
        self.assertEqual(
            line,
            '{"t_ms":5,"seq":1,"actor":"Drone:0","kind":"arrive","payload":{"role":"Coverage","zone":2}}',
        )
        self.assertEqual(list(json.loads(line)), ["t_ms", "seq", "actor", "kind", "payload"])
        self.assertEqual(TraceRecord.from_json(line), record)

    def test_seq_is_the_record_index(self):
        engine = Engine(master_seed=0)
        engine.header({"format_version": 1})
        engine.emit("A:0", "x", {})
        engine.emit("A:0", "y", {})
        self.assertEqual([r.seq for r in engine.trace], [0, 1, 2])
        self.assertEqual(engine.trace.records[0].actor, "Engine:0")

    def test_malformed_line_names_its_number(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "trace.jsonl"
            good = TraceRecord(0, 0, "Engine:0", "header", {}).to_json()
            path.write_text(good + "\n{not json\n", encoding="utf-8")
            with self.assertRaisesMessage(ValueError, "line 2"):
                list(read_trace(path))
