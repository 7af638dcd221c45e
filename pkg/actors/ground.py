from typing import Optional

from actors.base import Actor, SimulationContext
from actors.models import ALPHA, CRISIS, ActorId, EdgeWindow, SensorState, Alert
from actors.protocol import edge_on_alert, sensor_on_sample


class Sensor(Actor):
    def __init__(self, actor_id: ActorId, sim: SimulationContext, state: SensorState):
        super().__init__(actor_id, sim)
        self.state = state

    def tick_sample(self, body) -> None:
        amplitude = self.sim.intensity[self.state.cell_id]
        alert = sensor_on_sample(self.actor_id, self.state, amplitude, self.rng)
        if alert is not None:
            payload = {"sensor": self.name, "cell": alert.cell_id, "measured": alert.measured}
            self.trace("alert", payload)
            self.send(self.state.edge, "alert", payload)
            if self.state.paired_drone is not None:
                self.send(self.state.paired_drone, "alert", payload)

        remaining = body.get("remaining", 1) - 1
        if remaining > 0:
            self.set_timer(self.params["sample_period_ms"], "sample", {"remaining": remaining})


class EdgeServer(Actor):
    """Fog-layer server with limited processing: a sliding alert window."""

    def __init__(self, actor_id: ActorId, sim: SimulationContext):
        super().__init__(actor_id, sim)
        self.window = EdgeWindow(k=self.sim.params["edge_k"], window_ms=self.sim.params["edge_window_ms"])

    def on_alert(self, envelope) -> None:
        body = envelope.body
        alert = Alert(sensor=ActorId.parse(body["sensor"]), cell_id=body["cell"], measured=body["measured"])
        report = edge_on_alert(self.window, alert, self.now)
        if report is None:
            return

        payload = {
            "estimated_intensity": report.estimated_intensity,
            "cells": list(report.cells),
            "sensors": list(report.sensors),
        }
        self.trace("yellow", payload)
        self.send(ALPHA, "edge_report", payload)
        for station in self.sim.ground_stations:
            self.send(station, "edge_report", payload)


class GroundStation(Actor):
    def on_edge_report(self, envelope) -> None:
        self.trace("ground_report", {"origin": str(envelope.src)})

    def on_notify(self, envelope) -> None:
        self.trace("notify", {"level": envelope.body["level"]})


class Police(Actor):
    """Notification sink."""

    def on_notify(self, envelope) -> None:
        self.trace("notify", {"level": envelope.body["level"]})


class Satellite(Actor):
    """Relay represented by the satellite links; it handles no messages."""


class SeismicCenter(Actor):
    def __init__(self, actor_id: ActorId, sim: SimulationContext, lead_ms: Optional[int] = None):
        super().__init__(actor_id, sim)
        self.lead_ms = lead_ms

    def inject_early_warning(self, body) -> None:
        self.trace("early_warning", {"lead_ms": self.lead_ms})
        for drone in sorted(self.sim.roster):
            self.send(drone, "early_warning", {"lead_ms": self.lead_ms})
        self.send(CRISIS, "early_warning", {"lead_ms": self.lead_ms})
