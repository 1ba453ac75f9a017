"""Multi-robot search tasks: landmark memory for the main robot, blind follower.

The main robot keeps front-door hint snapshots of landmarks sampled street by
street; the follower gets nothing. Success is one robot confirming sight of the
other through its own scan.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..agents import visibility_check
from ..geometry import Pose, Vec2
from ..waypoints import NoPath, WaypointGraph, astar_path, build_waypoint_graph, path_cost
from .mmnav import HintSnapshot, capture_hint, cardinal_heading_toward

DEFAULT_STREETS = 10
DEFAULT_PER_STREET = 2
MIN_SPAWN_SEPARATION = 100.0  # waypoint-graph meters
MAX_SPAWN_SEPARATION = 950.0
DEFAULT_STEP_BUDGET = 600  # combined actions for both robots


class InsufficientLandmarks(Exception):
    pass


@dataclass(frozen=True)
class MemoryEntry:
    landmark_id: str
    street_id: str
    position: Vec2  # front-door point
    hint: HintSnapshot

    def to_dict(self) -> dict:
        return {
            "landmark": self.landmark_id,
            "street": self.street_id,
            "position": [self.position.x, self.position.y],
            "hint": self.hint.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MemoryEntry":
        return cls(doc["landmark"], doc["street"], Vec2(*doc["position"]), HintSnapshot.from_dict(doc["hint"]))


@dataclass(frozen=True)
class LandmarkMemory:
    entries: tuple[MemoryEntry, ...]

    def to_dict(self) -> list:
        return [e.to_dict() for e in self.entries]

    @classmethod
    def from_list(cls, docs: list) -> "LandmarkMemory":
        return cls(tuple(MemoryEntry.from_dict(d) for d in docs))


@dataclass
class MRSTask:
    task_id: str
    map_hash: str
    memory: LandmarkMemory
    spawn_main: Pose
    spawn_follower: Pose
    step_budget: int
    oracle_distance: float  # waypoint-graph meters between spawns

    def to_dict(self) -> dict:
        return {
            "schema": "citynav-task/1",
            "benchmark": "mrs",
            "id": self.task_id,
            "map_hash": self.map_hash,
            "memory": self.memory.to_dict(),
            "spawn_main": {"position": [self.spawn_main.position.x, self.spawn_main.position.y], "heading": self.spawn_main.heading},
            "spawn_follower": {
                "position": [self.spawn_follower.position.x, self.spawn_follower.position.y],
                "heading": self.spawn_follower.heading,
            },
            "step_budget": self.step_budget,
            "oracle_distance": self.oracle_distance,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MRSTask":
        if doc.get("benchmark") != "mrs" or doc.get("schema") != "citynav-task/1":
            raise ValueError("not an mrs task document")
        return cls(
            doc["id"],
            doc["map_hash"],
            LandmarkMemory.from_list(doc["memory"]),
            Pose(Vec2(*doc["spawn_main"]["position"]), doc["spawn_main"]["heading"]),
            Pose(Vec2(*doc["spawn_follower"]["position"]), doc["spawn_follower"]["heading"]),
            doc["step_budget"],
            doc["oracle_distance"],
        )


def build_landmark_memory(city_map, streets: int = DEFAULT_STREETS, per_street: int = DEFAULT_PER_STREET, rand=None) -> LandmarkMemory:
    """Sample per-street landmark buildings and capture their front-door hints."""
    by_street: dict[str, list] = {}
    for b in city_map.buildings:
        by_street.setdefault(b.facing_road, []).append(b)
    eligible = sorted(sid for sid, blds in by_street.items() if len(blds) >= per_street)
    if len(eligible) < streets:
        raise InsufficientLandmarks(
            f"need {streets} streets with >= {per_street} buildings, found {len(eligible)}"
        )
    chosen_streets = sorted(rand.sample(eligible, streets), key=lambda s: int(s[1:]))
    entries: list[MemoryEntry] = []
    seen: set[str] = set()
    for sid in chosen_streets:
        candidates = sorted(by_street[sid], key=lambda b: int(b.id[1:]))
        picks = rand.sample(candidates, per_street)
        for b in sorted(picks, key=lambda b: int(b.id[1:])):
            if b.id in seen:
                continue
            seen.add(b.id)
            heading = cardinal_heading_toward(b.front_door, b.footprint.center)
            pose = Pose(b.front_door, heading)
            entries.append(MemoryEntry(b.id, sid, b.front_door, capture_hint(city_map, pose)))
    return LandmarkMemory(tuple(entries))


def generate_mrs_task(
    city_map,
    rand,
    graph: WaypointGraph = None,
    map_hash: str = "",
    task_id: str = "mrs0",
    streets: int = DEFAULT_STREETS,
    per_street: int = DEFAULT_PER_STREET,
    step_budget: int = DEFAULT_STEP_BUDGET,
    min_separation: float = MIN_SPAWN_SEPARATION,
    max_separation: float = MAX_SPAWN_SEPARATION,
    max_tries: int = 200,
) -> MRSTask:
    """Landmark memory plus two distinct sidewalk spawns a sane distance apart."""
    memory = build_landmark_memory(city_map, streets, per_street, rand)
    if graph is None:
        graph = build_waypoint_graph(city_map)
    n = len(graph)
    if n < 2:
        raise InsufficientLandmarks("map has fewer than 2 spawn waypoints")
    for _ in range(max_tries):
        a = rand.randrange(n)
        b = rand.randrange(n)
        if a == b:
            continue
        try:
            distance = path_cost(graph, astar_path(graph, a, b))
        except NoPath:
            continue
        if not min_separation <= distance <= max_separation:
            continue
        headings = (0.0, 90.0, 180.0, 270.0)
        spawn_main = Pose(graph.position(a), headings[rand.randrange(4)])
        spawn_follower = Pose(graph.position(b), headings[rand.randrange(4)])
        return MRSTask(task_id, map_hash, memory, spawn_main, spawn_follower, step_budget, distance)
    raise InsufficientLandmarks(f"no spawn pair in [{min_separation}, {max_separation}] m after {max_tries} tries")


def check_meetup(world, issuer_id: str, other_id: str) -> bool:
    """The rendezvous check: the issuer must actually see the other robot."""
    return visibility_check(world, issuer_id, other_id)
