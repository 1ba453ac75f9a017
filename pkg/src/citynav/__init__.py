"""citynav: deterministic headless urban simulation engine and benchmarks."""

__version__ = "0.1.0"

from .geometry import Aabb, Pose, QuadTree, Vec2, raycast, turn_heading
from .procgen import CityMap, CitySpec, SpecInfeasible, generate_city
from .waypoints import WaypointGraph, astar_path, build_waypoint_graph, sample_route
from .world import World, tick_world

__all__ = [
    "Aabb",
    "Pose",
    "QuadTree",
    "Vec2",
    "raycast",
    "turn_heading",
    "CityMap",
    "CitySpec",
    "SpecInfeasible",
    "generate_city",
    "WaypointGraph",
    "astar_path",
    "build_waypoint_graph",
    "sample_route",
    "World",
    "tick_world",
    "__version__",
]
