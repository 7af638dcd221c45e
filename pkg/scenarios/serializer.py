from rest_framework import serializers
from rest_framework.serializers import ValidationError

from actors.models import ActorId, ActorKind, DroneRole
from netsim.models import LinkKind
from rescue_network.defaults import DEFAULTS
from scenarios.utils import build_zone_map
from world.models import RiskLevel

WORLD = DEFAULTS["world"]
ACTORS = DEFAULTS["actors"]
QUAKE = DEFAULTS["quake"]
FAULTS = DEFAULTS["faults"]
RUN = DEFAULTS["run"]

GATEWAY_LABELS = ("A", "B", "C", "D")


def grid_of(child):
    return serializers.ListField(child=serializers.ListField(child=child), required=False)


class FaultPointSerializer(serializers.Serializer):
    x = serializers.FloatField()
    y = serializers.FloatField()
    decay_cells = serializers.FloatField(min_value=0.01)


class WorldSerializer(serializers.Serializer):
    width = serializers.IntegerField(min_value=1)
    height = serializers.IntegerField(min_value=1)
    cell_size_m = serializers.FloatField(min_value=1.0, default=WORLD["cell_size_m"])
    fault_strength = grid_of(serializers.FloatField(min_value=0.0, max_value=1.0))
    fault = FaultPointSerializer(required=False)
    population = grid_of(serializers.IntegerField(min_value=0))
    population_per_cell = serializers.IntegerField(min_value=0, default=0)
    open_space = serializers.ListField(child=serializers.IntegerField(min_value=0), default=list)
    secure_cells = serializers.ListField(child=serializers.IntegerField(min_value=0), default=list)
    stations = serializers.ListField(child=serializers.IntegerField(), min_length=1)
    zones = serializers.ListField(
        child=serializers.ListField(child=serializers.IntegerField(), min_length=1),
        required=False,
    )
    zones_per_risk = serializers.IntegerField(min_value=1, default=1)

    risk_high = serializers.FloatField(min_value=0.0, max_value=1.0, default=WORLD["risk_high"])
    risk_medium = serializers.FloatField(min_value=0.0, max_value=1.0, default=WORLD["risk_medium"])
    attenuation_m = serializers.FloatField(default=WORLD["attenuation_m"])
    collapse_midpoint = serializers.FloatField(default=WORLD["collapse_midpoint"])
    collapse_slope = serializers.FloatField(default=WORLD["collapse_slope"])
    trap_rate = serializers.FloatField(min_value=0.0, max_value=1.0, default=WORLD["trap_rate"])
    block_factor = serializers.FloatField(min_value=0.0, max_value=1.0, default=WORLD["block_factor"])
    road_capacity = serializers.IntegerField(min_value=0, default=WORLD["road_capacity"])
    flee_fraction = serializers.FloatField(min_value=0.0, max_value=1.0, default=WORLD["flee_fraction"])
    safe_intensity = serializers.FloatField(min_value=0.0, default=WORLD["safe_intensity"])

    def validate_attenuation_m(self, attenuation_m):
        if attenuation_m <= 0:
            raise ValidationError("attenuation length must be positive")
        return attenuation_m

    def validate_collapse_slope(self, collapse_slope):
        if collapse_slope <= 0:
            raise ValidationError("collapse slope must be positive")
        return collapse_slope

    def validate(self, data):
        width, height = data["width"], data["height"]
        cell_count = width * height

        if data.get("fault_strength") is None and data.get("fault") is None:
            raise ValidationError({"fault_strength": "give either fault_strength rows or a fault point"})
        for name in ("fault_strength", "population"):
            rows = data.get(name)
            if rows is not None and (len(rows) != height or any(len(r) != width for r in rows)):
                raise ValidationError({name: f"expected {height} rows of {width} values"})

        if data["risk_medium"] > data["risk_high"]:
            raise ValidationError({"risk_medium": "medium threshold is above the high threshold"})

        for name in ("open_space", "secure_cells"):
            for cell in data[name]:
                if cell >= cell_count:
                    raise ValidationError({name: f"cell {cell} does not exist"})

        for station_id, cell in enumerate(data["stations"]):
            if not 0 <= cell < cell_count:
                raise ValidationError(
                    {"stations": f"station {station_id} references cell {cell}, which does not exist"}
                )

        if data.get("zones"):
            members = [c for zone in data["zones"] for c in zone]
            if len(members) != len(set(members)):
                raise ValidationError({"zones": "zone partition: a cell belongs to two zones"})
            if set(members) != set(range(cell_count)):
                missing = sorted(set(range(cell_count)) - set(members))
                raise ValidationError(
                    {"zones": f"zone partition does not cover the grid (cells {missing[:5]})"}
                )
        return data


class DroneSerializer(serializers.Serializer):
    station = serializers.IntegerField(min_value=0)
    role = serializers.ChoiceField(choices=DroneRole.choices, default=DroneRole.COVERAGE.value)
    zone = serializers.IntegerField(min_value=0, allow_null=True, default=None)
    label = serializers.CharField(allow_null=True, default=None)
    spare = serializers.BooleanField(default=False)

    def validate(self, data):
        if data["role"] == DroneRole.GATEWAY and data["label"] not in GATEWAY_LABELS:
            raise ValidationError({"label": f"gateway drones need a label in {GATEWAY_LABELS}"})
        if data["spare"] and (data["role"] != DroneRole.COVERAGE or data["zone"] is not None):
            raise ValidationError({"spare": "a spare is a coverage drone with no zone"})
        if data["role"] == DroneRole.COVERAGE and not data["spare"] and data["zone"] is None:
            raise ValidationError({"zone": "coverage drones need a zone"})
        if data["role"] != DroneRole.COVERAGE and data["zone"] is not None:
            raise ValidationError({"zone": "only coverage drones are assigned a zone"})
        return data


class SensorSerializer(serializers.Serializer):
    cell = serializers.IntegerField(min_value=0)
    edge = serializers.IntegerField(min_value=0)
    paired_drone = serializers.IntegerField(min_value=0, allow_null=True, default=None)


class PlacedSerializer(serializers.Serializer):
    cell = serializers.IntegerField(min_value=0)


class ActorsSerializer(serializers.Serializer):
    drones = DroneSerializer(many=True)
    sensors = SensorSerializer(many=True, default=list)
    edge_servers = PlacedSerializer(many=True, default=list)
    ground_stations = PlacedSerializer(many=True, default=list)
    rescue_teams = PlacedSerializer(many=True, default=list)
    alpha_cell = serializers.IntegerField(min_value=0, default=0)
    beta_cell = serializers.IntegerField(min_value=0, default=0)
    crisis_cell = serializers.IntegerField(min_value=0, default=0)
    seismic_cell = serializers.IntegerField(min_value=0, default=0)
    police_cell = serializers.IntegerField(min_value=0, default=0)

    latency_p2p_ms = serializers.IntegerField(min_value=1, default=ACTORS["latency_p2p_ms"])
    latency_wireless_ms = serializers.IntegerField(min_value=1, default=ACTORS["latency_wireless_ms"])
    latency_satellite_ms = serializers.IntegerField(min_value=1, default=ACTORS["latency_satellite_ms"])
    disruption_beta = serializers.FloatField(min_value=0.0, default=ACTORS["disruption_beta"])
    hardened_multiplier = serializers.FloatField(
        min_value=0.0, max_value=1.0, default=ACTORS["hardened_multiplier"]
    )
    medium_zone_multiplier = serializers.FloatField(
        min_value=0.0, max_value=1.0, default=ACTORS["medium_zone_multiplier"]
    )

    theta_high = serializers.FloatField(default=ACTORS["theta_high"])
    theta_medium = serializers.FloatField(default=ACTORS["theta_medium"])
    theta_low = serializers.FloatField(default=ACTORS["theta_low"])
    noise_high = serializers.FloatField(min_value=0.0, default=ACTORS["noise_high"])
    noise_medium = serializers.FloatField(min_value=0.0, default=ACTORS["noise_medium"])
    noise_low = serializers.FloatField(min_value=0.0, default=ACTORS["noise_low"])
    wave_speed_mps = serializers.FloatField(min_value=1.0, default=ACTORS["wave_speed_mps"])
    samples_per_quake = serializers.IntegerField(min_value=1, default=ACTORS["samples_per_quake"])
    sample_period_ms = serializers.IntegerField(min_value=1, default=ACTORS["sample_period_ms"])
    edge_k = serializers.IntegerField(min_value=1, default=ACTORS["edge_k"])
    edge_window_ms = serializers.IntegerField(min_value=0, default=ACTORS["edge_window_ms"])

    heartbeat_ms = serializers.IntegerField(min_value=1, default=ACTORS["heartbeat_ms"])
    miss_limit = serializers.IntegerField(min_value=1, default=ACTORS["miss_limit"])
    drone_speed_mps = serializers.FloatField(min_value=0.1, default=ACTORS["drone_speed_mps"])
    drone_sense_threshold = serializers.FloatField(default=ACTORS["drone_sense_threshold"])

    red_threshold = serializers.FloatField(default=ACTORS["red_threshold"])
    team_tick_ms = serializers.IntegerField(min_value=1, default=ACTORS["team_tick_ms"])
    rescue_rate = serializers.IntegerField(min_value=1, default=ACTORS["rescue_rate"])

    scan_period_ms = serializers.IntegerField(min_value=1, default=ACTORS["scan_period_ms"])
    scan_radius_cells = serializers.FloatField(min_value=0.0, default=ACTORS["scan_radius_cells"])
    detect_prob = serializers.FloatField(min_value=0.0, max_value=1.0, default=ACTORS["detect_prob"])
    flow_tick_ms = serializers.IntegerField(min_value=1, default=ACTORS["flow_tick_ms"])

    def validate_drones(self, drones):
        nurses = [i for i, d in enumerate(drones) if d["role"] == DroneRole.NURSING]
        if len(nurses) != 1:
            raise ValidationError(
                f"exactly one nursing drone must be designated at start, found {len(nurses)}"
            )
        labels = [d["label"] for d in drones if d["role"] == DroneRole.GATEWAY]
        if len(labels) != len(set(labels)):
            raise ValidationError("gateway labels must be unique")
        return drones

    def validate(self, data):
        for i, sensor in enumerate(data["sensors"]):
            if sensor["edge"] >= len(data["edge_servers"]):
                raise ValidationError(
                    {"sensors": f"sensor {i} reports to edge server {sensor['edge']}, which does not exist"}
                )
            paired = sensor["paired_drone"]
            if paired is not None and paired >= len(data["drones"]):
                raise ValidationError(
                    {"sensors": f"sensor {i} is paired with drone {paired}, which does not exist"}
                )
        return data


class AftershockSerializer(serializers.Serializer):
    t_ms = serializers.IntegerField(min_value=0)
    magnitude = serializers.FloatField(min_value=0.0, max_value=10.0)
    epicenter = serializers.ListField(
        child=serializers.FloatField(), min_length=2, max_length=2, allow_null=True, default=None
    )
    resample_links = serializers.BooleanField(default=False)


class QuakeSerializer(serializers.Serializer):
    epicenter = serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2)
    magnitude = serializers.FloatField(min_value=0.0, max_value=10.0)
    t_ms = serializers.IntegerField(min_value=0)
    early_warning_lead_ms = serializers.IntegerField(
        min_value=0, allow_null=True, default=QUAKE["early_warning_lead_ms"]
    )
    aftershocks = AftershockSerializer(many=True, default=list)

    def validate(self, data):
        lead = data["early_warning_lead_ms"]
        if lead is not None and lead > data["t_ms"]:
            raise ValidationError({"early_warning_lead_ms": "early warning would precede t=0"})
        for i, aftershock in enumerate(data["aftershocks"]):
            if aftershock["t_ms"] < data["t_ms"]:
                raise ValidationError({"aftershocks": f"aftershock {i} precedes the main shock"})
        return data


class InjectionSerializer(serializers.Serializer):
    actor = serializers.CharField()
    t_ms = serializers.IntegerField(min_value=0)

    def validate_actor(self, actor):
        try:
            parsed = ActorId.parse(actor)
        except ValueError:
            raise ValidationError(f"{actor!r} is not an actor id")
        if parsed.kind != ActorKind.DRONE:
            raise ValidationError("only drones can be failed")
        return str(parsed)


class FaultsSerializer(serializers.Serializer):
    kills = InjectionSerializer(many=True, default=list)
    degrade = InjectionSerializer(many=True, default=list)
    hazard_rate = serializers.FloatField(min_value=0.0, max_value=1.0, default=FAULTS["hazard_rate"])
    force_down_kinds = serializers.ListField(
        child=serializers.ChoiceField(
            choices=[LinkKind.POINT_TO_POINT.value, LinkKind.WIRELESS.value]
        ),
        default=list,
    )
    force_down_links = serializers.ListField(child=serializers.CharField(), default=list)


class RunSerializer(serializers.Serializer):
    seed = serializers.IntegerField(min_value=0, default=RUN["seed"])
    t_end_ms = serializers.IntegerField(min_value=0, default=RUN["t_end_ms"])


class ScenarioSerializer(serializers.Serializer):
    world = WorldSerializer()
    actors = ActorsSerializer()
    quake = QuakeSerializer()
    faults = FaultsSerializer()
    run = RunSerializer()

    def validate(self, data):
        world, actors, faults = data["world"], data["actors"], data["faults"]
        zone_map = build_zone_map(world)
        cell_count = len(zone_map.cells)
        zone_ids = {zone.zone_id for zone in zone_map.zones}

        for i, drone in enumerate(actors["drones"]):
            if drone["station"] not in zone_map.stations:
                raise ValidationError(
                    {"actors": f"drone {i} docks at station {drone['station']}, which does not exist"}
                )
            if drone["zone"] is not None and drone["zone"] not in zone_ids:
                raise ValidationError(
                    {"actors": f"drone {i} covers zone {drone['zone']}, which does not exist"}
                )

        placed = [("sensor", s["cell"]) for s in actors["sensors"]]
        for group in ("edge_servers", "ground_stations", "rescue_teams"):
            placed += [(group, p["cell"]) for p in actors[group]]
        for name in ("alpha_cell", "beta_cell", "crisis_cell", "seismic_cell", "police_cell"):
            placed.append((name, actors[name]))
        for owner, cell in placed:
            if cell >= cell_count:
                raise ValidationError({"actors": f"{owner} placed in cell {cell}, which does not exist"})

        for i, sensor in enumerate(actors["sensors"]):
            high = zone_map.cell(sensor["cell"]).risk == RiskLevel.HIGH
            if high and sensor["paired_drone"] is None:
                raise ValidationError(
                    {"actors": f"sensor {i} is in a High-risk cell and needs a paired drone"}
                )
            if not high and sensor["paired_drone"] is not None:
                raise ValidationError(
                    {"actors": f"sensor {i} is paired with a drone but its cell is not High-risk"}
                )

        drone_count = len(actors["drones"])
        for section in ("kills", "degrade"):
            for entry in faults[section]:
                if ActorId.parse(entry["actor"]).index >= drone_count:
                    raise ValidationError({"faults": f"{section} names {entry['actor']}, which does not exist"})
        return data
