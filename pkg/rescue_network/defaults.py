"""Default simulation parameters, one table per scenario section.

Any key may be overridden in the scenario file; the resolved values are
written to the trace header. Times are integer milliseconds.
"""

DEFAULTS = {
    "world": {
        "cell_size_m": 500.0,
        "risk_high": 0.7,
        "risk_medium": 0.3,
        "attenuation_m": 1000.0,
        "collapse_midpoint": 5.0,
        "collapse_slope": 0.8,
        "trap_rate": 0.1,
        "block_factor": 0.5,
        "road_capacity": 50,
        "flee_fraction": 0.5,
        "safe_intensity": 2.0,
    },
    "actors": {
        # communications
        "latency_p2p_ms": 20,
        "latency_wireless_ms": 40,
        "latency_satellite_ms": 600,
        "disruption_beta": 0.8,
        "hardened_multiplier": 0.5,
        "medium_zone_multiplier": 0.5,
        # sensing and edge layer
        "theta_high": 2.0,
        "theta_medium": 2.0,
        "theta_low": 2.0,
        "noise_high": 0.3,
        "noise_medium": 0.3,
        "noise_low": 0.1,
        "wave_speed_mps": 3000.0,
        "samples_per_quake": 3,
        "sample_period_ms": 500,
        "edge_k": 3,
        "edge_window_ms": 2000,
        # fleet
        "heartbeat_ms": 5000,
        "miss_limit": 3,
        "drone_speed_mps": 20.0,
        "drone_sense_threshold": 4.0,
        # crisis and rescue
        "red_threshold": 4.0,
        "team_tick_ms": 10000,
        "rescue_rate": 5,
        # after the quake
        "scan_period_ms": 10000,
        "scan_radius_cells": 2.0,
        "detect_prob": 0.3,
        "flow_tick_ms": 5000,
    },
    "quake": {
        "early_warning_lead_ms": None,
        "aftershocks": [],
    },
    "faults": {
        "kills": [],
        "degrade": [],
        "hazard_rate": 0.0,
        "force_down_kinds": [],
        "force_down_links": [],
    },
    "run": {
        "seed": 0,
        "t_end_ms": 600000,
    },
}
