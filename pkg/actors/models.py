from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, Optional, Set, Tuple

from django.db import models

from world.models import RiskLevel


class ActorKind(models.TextChoices):
    SENSOR = "Sensor"
    EDGE_SERVER = "EdgeServer"
    DRONE = "Drone"
    HELICOPTER_ALPHA = "HelicopterAlpha"
    HELICOPTER_BETA = "HelicopterBeta"
    SATELLITE = "Satellite"
    GROUND_STATION = "GroundStation"
    SEISMIC_CENTER = "SeismicCenter"
    CRISIS_CENTER = "CrisisCenter"
    POLICE = "Police"
    RESCUE_TEAM = "RescueTeam"
    WORLD = "World"

    @property
    def ordinal(self) -> int:
        return list(ActorKind).index(self) + 1


@dataclass(frozen=True, order=True)
class ActorId:
    kind: str
    index: int = 0

    def __str__(self) -> str:
        return f"{self.kind}:{self.index}"

    @property
    def code(self) -> int:
        """Stable 64-bit encoding: kind ordinal in the high word, index low."""
        return (ActorKind(self.kind).ordinal << 32) | self.index

    @classmethod
    def parse(cls, text: str) -> "ActorId":
        kind, _, index = text.partition(":")
        return cls(ActorKind(kind).value, int(index or 0))


ALPHA = ActorId(ActorKind.HELICOPTER_ALPHA.value)
BETA = ActorId(ActorKind.HELICOPTER_BETA.value)
SATELLITE = ActorId(ActorKind.SATELLITE.value)
SEISMIC = ActorId(ActorKind.SEISMIC_CENTER.value)
CRISIS = ActorId(ActorKind.CRISIS_CENTER.value)
POLICE = ActorId(ActorKind.POLICE.value)
WORLD = ActorId(ActorKind.WORLD.value)


def drone(index: int) -> ActorId:
    return ActorId(ActorKind.DRONE.value, index)


class AlarmLevel(models.TextChoices):
    GREEN = "Green"
    YELLOW = "Yellow"
    RED = "Red"

    def can_become(self, other: "AlarmLevel") -> bool:
        if other == AlarmLevel.GREEN:
            return True
        return (self, other) in {
            (AlarmLevel.GREEN, AlarmLevel.YELLOW),
            (AlarmLevel.YELLOW, AlarmLevel.RED),
        }


class DroneStatus(models.TextChoices):
    DOCKED = "Docked"
    ENROUTE = "Enroute"
    ON_STATION = "OnStation"
    FAILED = "Failed"


class DroneRole(models.TextChoices):
    COVERAGE = "Coverage"
    NURSING = "Nursing"
    GATEWAY = "Gateway"


class Trigger(models.TextChoices):
    LOCAL_QUAKE_SENSED = "LocalQuakeSensed"
    PAIRED_SENSOR_ALERT = "PairedSensorAlert"
    LAUNCH_CMD = "LaunchCmd"
    EARLY_WARNING = "EarlyWarning"


@dataclass(frozen=True)
class DroneState:
    status: DroneStatus
    role: DroneRole
    station_id: int
    zone: Optional[int] = None
    eta_ms: Optional[int] = None
    label: Optional[str] = None
    last_heartbeat_sent_ms: Optional[int] = None


@dataclass(frozen=True)
class SensorState:
    cell_id: int
    risk: RiskLevel
    theta: float
    noise_sigma: float
    edge: ActorId
    paired_drone: Optional[ActorId] = None

    def __post_init__(self):
        if (self.paired_drone is not None) != (self.risk == RiskLevel.HIGH):
            raise ValueError(f"sensor in cell {self.cell_id}: paired drone iff High risk")


@dataclass(frozen=True)
class Alert:
    sensor: ActorId
    cell_id: int
    measured: float


@dataclass
class EdgeWindow:
    k: int
    window_ms: int
    alerts: Deque[Tuple[int, Alert]] = field(default_factory=deque)
    yellow: bool = False


@dataclass(frozen=True)
class EdgeReport:
    estimated_intensity: float
    cells: Tuple[int, ...]
    sensors: Tuple[str, ...]


@dataclass
class NurseLedger:
    heartbeat_ms: int
    miss_limit: int
    last_seen: Dict[ActorId, int] = field(default_factory=dict)


@dataclass(frozen=True)
class FailureNotice:
    drone: ActorId
    zone: Optional[int]
    cause: str = "missed_heartbeats"


@dataclass(frozen=True)
class FleetEntry:
    drone: ActorId
    station_xy: Tuple[float, float]
    status: DroneStatus
    role: DroneRole = DroneRole.COVERAGE
    zone: Optional[int] = None
    spare: bool = False


@dataclass(frozen=True)
class AssignCmd:
    zone: int
    coverer: ActorId
    distance_m: Optional[float] = None


@dataclass
class KnownSite:
    cell_id: int
    detected: int = 0
    rescued: int = 0
    intensity: float = 0.0
    first_detected_ms: Optional[int] = None


@dataclass
class CrisisState:
    alarm: AlarmLevel = AlarmLevel.GREEN
    confirmations: Dict[str, float] = field(default_factory=dict)
    sites: Dict[int, KnownSite] = field(default_factory=dict)
    congested: Set[int] = field(default_factory=set)
    secure: Set[int] = field(default_factory=set)
    team_tasks: Dict[ActorId, Optional[int]] = field(default_factory=dict)
    seen: Set[int] = field(default_factory=set)


class TeamStatus(models.TextChoices):
    IDLE = "Idle"
    MOVING = "Moving"
    RESCUING = "Rescuing"
    BLOCKED = "Blocked"


@dataclass(frozen=True)
class TeamState:
    position: int
    status: TeamStatus = TeamStatus.IDLE
    target: Optional[int] = None
    route: Tuple[int, ...] = ()
    rescued: int = 0
