import heapq
import json
from dataclasses import dataclass, field
from typing import Any, Dict, Hashable, List, Optional, Tuple


@dataclass
class SimEvent:
    t_ms: int
    seq: int
    target: Hashable
    type: str
    kind: str
    body: Dict[str, Any] = field(default_factory=dict)
    envelope: Optional[Any] = None


class EventQueue:
    """Min-heap keyed by ``(t_ms, seq)``."""

    def __init__(self):
        self._heap: List[Tuple[int, int, SimEvent]] = []
        self._next_seq = 0

    def __len__(self) -> int:
        return len(self._heap)

    def push(
        self,
        t_ms: int,
        target: Hashable,
        type: str,
        kind: str,
        body: Optional[Dict[str, Any]] = None,
        envelope: Any = None,
    ) -> SimEvent:
        event = SimEvent(
            t_ms=t_ms,
            seq=self._next_seq,
            target=target,
            type=type,
            kind=kind,
            body=body or {},
            envelope=envelope,
        )
        self._next_seq += 1
        heapq.heappush(self._heap, (t_ms, event.seq, event))
        return event

    def peek_time(self) -> Optional[int]:
        return self._heap[0][0] if self._heap else None

    def pop(self) -> Optional[SimEvent]:
        if not self._heap:
            return None
        return heapq.heappop(self._heap)[2]


@dataclass(frozen=True)
class TraceRecord:
    t_ms: int
    seq: int
    actor: str
    kind: str
    payload: Dict[str, Any]

    def to_json(self) -> str:
        """One JSON line: fixed top-level key order, payload keys sorted."""
        payload = json.dumps(self.payload, sort_keys=True, separators=(",", ":"))
        return (
            f'{{"t_ms":{self.t_ms},"seq":{self.seq},'
            f'"actor":{json.dumps(self.actor)},"kind":{json.dumps(self.kind)},'
            f'"payload":{payload}}}'
        )

    @classmethod
    def from_json(cls, line: str) -> "TraceRecord":
        data = json.loads(line)
        return cls(
            t_ms=int(data["t_ms"]),
            seq=int(data["seq"]),
            actor=str(data["actor"]),
            kind=str(data["kind"]),
            payload=data["payload"],
        )
