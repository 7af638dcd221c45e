"""Metrics computed in a single pass over trace records.

Definitions:

first_full_coverage_ms
    Earliest time at which every zone listed in the header has been reached
    by a coverage drone (``arrive``) or taken over by helicopter β
    (``beta_cover``).
failover_latency_ms
    Per failed drone: time of its ``failure_notice`` (or ``nurse_promote``
    for a failed nurse) minus the time of its ``kill`` record.
detection_latency_ms
    min/median/max over survivor sites of the first ``scan`` detecting the
    site, measured from the ``quake`` record.
rescued_fraction
    Survivors saved in ``rescue`` records over the seeded total.
satellite_fallback_count
    Deliveries whose path includes a satellite link and whose msg_id was
    also dropped (the terrestrial twin found no path).
dropped_message_count
    Number of ``msg_drop`` records.
red_alarm_ms
    Time of the first ``red`` record.
"""
import csv
import io
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Set, Union

import numpy as np

from engine.models import TraceRecord
from scenarios.models import MetricsReport

SATELLITE_PREFIX = "sat:"
CSV_HEADER = ("metric", "key", "value")


def compute_metrics(records: Iterable[TraceRecord]) -> MetricsReport:
    report = MetricsReport()
    zones: Set[int] = set()
    covered: Set[int] = set()
    quake_ms: Optional[int] = None
    killed_at: Dict[str, int] = {}
    failover: Dict[str, int] = {}
    detected_at: Dict[int, int] = {}
    dropped: Set[int] = set()
    seeded = 0
    rescued = 0

    for record in records:
        kind, payload = record.kind, record.payload
        if kind == "header":
            zones = set(payload.get("zones", ()))
        elif kind == "quake":
            quake_ms = record.t_ms
        elif kind == "survivors_seeded":
            seeded = payload["total"]
        elif kind == "arrive" and payload.get("role") == "Coverage" and payload.get("zone") is not None:
            covered.add(payload["zone"])
        elif kind == "beta_cover":
            covered.add(payload["zone"])
        elif kind == "kill":
            killed_at.setdefault(record.actor, record.t_ms)
        elif kind in ("failure_notice", "nurse_promote"):
            drone = payload["drone"] if kind == "failure_notice" else payload["previous"]
            if drone in killed_at and drone not in failover:
                failover[drone] = record.t_ms - killed_at[drone]
        elif kind == "scan" and quake_ms is not None:
            for cell, found in payload["detected"]:
                if found:
                    detected_at.setdefault(cell, record.t_ms - quake_ms)
        elif kind == "rescue":
            rescued += payload["saved"]
        elif kind == "red" and report.red_alarm_ms is None:
            report.red_alarm_ms = record.t_ms
        elif kind == "msg_drop":
            report.dropped_message_count += 1
            dropped.add(payload["msg_id"])
        elif kind == "msg_deliver":
            via_satellite = any(link.startswith(SATELLITE_PREFIX) for link in payload["path"])
            if via_satellite and payload["msg_id"] in dropped:
                report.satellite_fallback_count += 1

        if report.first_full_coverage_ms is None and zones and zones <= covered:
            report.first_full_coverage_ms = record.t_ms

    report.failover_latency_ms = sorted(failover.items(), key=lambda item: (killed_at[item[0]], item[0]))
    if detected_at:
        latencies = np.array(sorted(detected_at.values()))
        report.detection_latency_ms = {
            "min": int(latencies.min()),
            "median": float(np.median(latencies)),
            "max": int(latencies.max()),
        }
    if seeded:
        report.rescued_fraction = round(rescued / seeded, 6)
    return report


def metrics_csv(report: MetricsReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(report.rows())
    return buffer.getvalue()


def write_metrics_csv(report: MetricsReport, path: Union[str, Path]) -> None:
    Path(path).write_text(metrics_csv(report), encoding="utf-8")


def summary(report: MetricsReport) -> List[str]:
    def show(value, unit=""):
        return "n/a" if value is None else f"{value}{unit}"

    lines = [
        f"first full coverage:     {show(report.first_full_coverage_ms, ' ms')}",
        f"red alarm:               {show(report.red_alarm_ms, ' ms')}",
    ]
    if report.failover_latency_ms:
        lines += [f"failover {drone}: {latency} ms" for drone, latency in report.failover_latency_ms]
    else:
        lines.append("failovers:               none")
    stats = report.detection_latency_ms
    lines += [
        "detection latency:       "
        f"min {show(stats['min'])} / median {show(stats['median'])} / max {show(stats['max'])} ms",
        f"rescued fraction:        {show(report.rescued_fraction)}",
        f"satellite fallbacks:     {report.satellite_fallback_count}",
        f"dropped messages:        {report.dropped_message_count}",
    ]
    return lines
