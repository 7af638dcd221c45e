import logging
from typing import Any, Callable, Dict, Hashable, List, Optional, Tuple

from engine.exceptions import InvariantViolation, SchedulingError
from engine.models import EventQueue, SimEvent, TraceRecord
from engine.rng import RngStream, actor_rng
from engine.trace import HEADER_KIND, Trace

logger = logging.getLogger(__name__)

InvariantCheck = Callable[["Engine"], Optional[str]]


class Engine:
    """Single-threaded discrete-event loop.

    Events pop in ``(t_ms, seq)`` order and are handed to the target actor's
    ``dispatch``. With invariant checking on, every registered check runs
    after each dispatch; a check returns an error string to signal a
    violation.
    """

    def __init__(self, master_seed: int, check_invariants: bool = False):
        self.master_seed = master_seed
        self.check_invariants = check_invariants
        self.clock = 0
        self.queue = EventQueue()
        self.trace = Trace()
        self.actors: Dict[Hashable, Any] = {}
        self.checks: List[Tuple[str, InvariantCheck]] = []
        self.dispatched = 0
        self._last_key: Tuple[int, int] = (-1, -1)

    def register(self, actor) -> None:
        if actor.actor_id in self.actors:
            raise ValueError(f"duplicate actor {actor.actor_id}")
        self.actors[actor.actor_id] = actor
        actor.bind(self)

    def add_check(self, name: str, check: InvariantCheck) -> None:
        self.checks.append((name, check))

    def rng(self, actor_id) -> RngStream:
        return actor_rng(self.master_seed, actor_id)

    def header(self, payload: Dict[str, Any]) -> TraceRecord:
        return self.trace.append(0, "Engine:0", HEADER_KIND, payload)

    def emit(self, actor: str, kind: str, payload: Dict[str, Any]) -> TraceRecord:
        return self.trace.append(self.clock, actor, kind, payload)

    def schedule(
        self,
        t_ms: int,
        target: Hashable,
        type: str,
        kind: str,
        body: Optional[Dict[str, Any]] = None,
        envelope: Any = None,
    ) -> SimEvent:
        if t_ms < self.clock:
            raise SchedulingError(
                f"{kind} for {target} at t={t_ms}ms is before the clock ({self.clock}ms)"
            )
        return self.queue.push(int(t_ms), target, type, kind, body, envelope)

    def run_until(self, t_end_ms: int) -> None:
        if t_end_ms < self.clock:
            raise SchedulingError(f"run_until({t_end_ms}) is before the clock")

        while True:
            next_time = self.queue.peek_time()
            if next_time is None or next_time > t_end_ms:
                break
            event = self.queue.pop()
            key = (event.t_ms, event.seq)
            if key <= self._last_key:
                raise SchedulingError(f"dispatch order broken at {key}")
            self._last_key = key
            self.clock = event.t_ms
            self.dispatched += 1

            try:
                self.actors[event.target].dispatch(event)
                if self.check_invariants:
                    self.run_checks()
            except InvariantViolation as exc:
                self.emit(
                    "Engine:0",
                    "invariant_violation",
                    {"invariant": exc.name, "detail": exc.detail},
                )
                logger.error("%s", exc)
                raise

        self.clock = t_end_ms

    def run_checks(self) -> None:
        for name, check in self.checks:
            problem = check(self)
            if problem:
                raise InvariantViolation(name, self.clock, problem)
