import logging
from pathlib import Path
from typing import Any, Dict, Iterator, List, Union

from engine.models import TraceRecord

logger = logging.getLogger(__name__)

HEADER_KIND = "header"


class Trace:
    """Append-only record list; ``seq`` is the record index."""

    def __init__(self):
        self.records: List[TraceRecord] = []

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TraceRecord]:
        return iter(self.records)

    def append(self, t_ms: int, actor: str, kind: str, payload: Dict[str, Any]) -> TraceRecord:
        record = TraceRecord(
            t_ms=t_ms, seq=len(self.records), actor=actor, kind=kind, payload=payload
        )
        self.records.append(record)
        return record

    def of_kind(self, *kinds: str) -> List[TraceRecord]:
        return [r for r in self.records if r.kind in kinds]

    def to_jsonl(self) -> str:
        return "".join(record.to_json() + "\n" for record in self.records)

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")
        logger.info("wrote %d trace records to %s", len(self.records), path)


def read_trace(path: Union[str, Path]) -> Iterator[TraceRecord]:
    """Yield records; raises ValueError naming the 1-based line on bad input."""
    with open(path, encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield TraceRecord.from_json(line)
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"line {number}: malformed trace record ({exc})") from exc
