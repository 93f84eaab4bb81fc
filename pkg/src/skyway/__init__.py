"""Skyway drone delivery: rooftop station networks with line-of-sight
corridors, battery-aware temporal route planning, mission simulation, and
a dispatch service with live telemetry.
"""

__version__ = "0.1.0"

from .city import (
    Building,
    CityModel,
    CityParseError,
    CityValidationError,
    NoFlyZone,
    Point2,
    Point3,
    Polygon2,
    load_city,
    save_city,
)
from .network import (
    LosVerdict,
    NetworkParams,
    SkywayEdge,
    SkywayNetwork,
    SkywayNode,
    build_network,
    candidate_obstacles,
    load_network,
    los_clear,
    los_oracle,
    rooftop_node,
    save_network,
)
from .planner import (
    DroneSpec,
    FlyLeg,
    PlanError,
    RechargeLeg,
    Route,
    UnreachableError,
    edge_cost,
    heuristic,
    load_route,
    plan,
    plan_oracle,
    save_route,
)
from .simulator import (
    MissionFailed,
    MissionLog,
    MissionState,
    SimulationError,
    TelemetryFrame,
    new_mission,
    run_to_completion,
    tick,
)

__all__ = [name for name in dir() if not name.startswith("_")]
