"""Instruction-following navigation tasks: generation, rendering, and goal checks.

A task decomposes a shortest waypoint path into subtasks: orientation alignment
first, a move-along-road before every turn, a turn at each heading change, and a
final reach-destination. Each subtask carries the instruction text and the hint
snapshot captured at its goal pose on the static map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..agents import Landmark, landmarks_from_scan, scan_environment
from ..assets import describe
from ..geometry import Pose, Vec2, angle_diff, cardinal_of, heading_between
from ..waypoints import NoPath, WaypointGraph, astar_path, build_waypoint_graph, path_cost

POSITION_TOLERANCE = 10.0  # meters, Manhattan
HEADING_TOLERANCE = 45.0  # degrees

MIN_PATH_LENGTH = 150.0
MAX_PATH_LENGTH = 900.0
STRAIGHT_MOVE_MIN = 40.0  # shorter straight runs skip the move subtask

CARDINAL_WORDS = {"N": "north", "E": "east", "S": "south", "W": "west"}


class NoValidPair(Exception):
    """No endpoint pair yielded a 2-4 instruction path within the retry budget."""


class StaticWorldView:
    """World facade over a bare map: static obstacles only, no agents."""

    def __init__(self, city_map):
        self.city_map = city_map

    def dynamic_discs(self):
        return ()

    def static_obstacles_in(self, window):
        for eid in self.city_map.index.query(window):
            if eid.startswith("b"):
                yield (eid, "building", self.city_map.building(eid).footprint)
            elif eid.startswith("e"):
                el = self.city_map.element(eid)
                yield (eid, "tree" if el.element_class == "tree" else "element", el.footprint)


@dataclass(frozen=True)
class HintSnapshot:
    """The expected observation at a subtask's goal pose (static world, level view)."""

    position: tuple[float, float]
    heading: float
    depth: tuple[float, ...]
    semantic: tuple[tuple[str, Optional[str]], ...]
    landmarks: tuple[Landmark, ...]

    def to_dict(self) -> dict:
        return {
            "position": list(self.position),
            "heading": self.heading,
            "depth": list(self.depth),
            "semantic": [[c, i] for c, i in self.semantic],
            "landmarks": [lm.to_dict() for lm in self.landmarks],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "HintSnapshot":
        return cls(
            tuple(doc["position"]),
            doc["heading"],
            tuple(doc["depth"]),
            tuple((c, i) for c, i in doc["semantic"]),
            tuple(Landmark(lm["id"], lm["bearing"], lm["range"]) for lm in doc["landmarks"]),
        )


def capture_hint(city_map, pose: Pose) -> HintSnapshot:
    view = StaticWorldView(city_map)
    depth, semantic = scan_environment(view, "", pose.position, pose.heading, view="level")
    return HintSnapshot(
        (pose.position.x, pose.position.y), pose.heading, depth, semantic, landmarks_from_scan(depth, semantic)
    )


@dataclass(frozen=True)
class Subtask:
    category: str  # orientation_alignment | move_along_road | turn_at_intersection | reach_destination
    instruction: str
    hint: HintSnapshot
    goal: Pose
    position_tolerance: float = POSITION_TOLERANCE
    heading_tolerance: float = HEADING_TOLERANCE
    landmark_id: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "instruction": self.instruction,
            "hint": self.hint.to_dict(),
            "goal": {"position": [self.goal.position.x, self.goal.position.y], "heading": self.goal.heading},
            "position_tolerance": self.position_tolerance,
            "heading_tolerance": self.heading_tolerance,
            "landmark": self.landmark_id,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Subtask":
        return cls(
            doc["category"],
            doc["instruction"],
            HintSnapshot.from_dict(doc["hint"]),
            Pose(Vec2(*doc["goal"]["position"]), doc["goal"]["heading"]),
            doc["position_tolerance"],
            doc["heading_tolerance"],
            doc["landmark"],
        )


@dataclass
class MMNavTask:
    task_id: str
    map_hash: str
    difficulty: str  # "easy" | "hard"
    start: Pose
    subtasks: list[Subtask]
    oracle_path: list[int]
    oracle_length: float
    goal_building: str

    @property
    def final_goal(self) -> Pose:
        return self.subtasks[-1].goal

    def to_dict(self) -> dict:
        return {
            "schema": "citynav-task/1",
            "benchmark": "mmnav",
            "id": self.task_id,
            "map_hash": self.map_hash,
            "difficulty": self.difficulty,
            "start": {"position": [self.start.position.x, self.start.position.y], "heading": self.start.heading},
            "subtasks": [s.to_dict() for s in self.subtasks],
            "oracle_path": list(self.oracle_path),
            "oracle_length": self.oracle_length,
            "goal_building": self.goal_building,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MMNavTask":
        if doc.get("benchmark") != "mmnav" or doc.get("schema") != "citynav-task/1":
            raise ValueError("not an mmnav task document")
        return cls(
            doc["id"],
            doc["map_hash"],
            doc["difficulty"],
            Pose(Vec2(*doc["start"]["position"]), doc["start"]["heading"]),
            [Subtask.from_dict(s) for s in doc["subtasks"]],
            list(doc["oracle_path"]),
            doc["oracle_length"],
            doc["goal_building"],
        )


def _side_phrase(city_map, pose: Pose, building) -> str:
    rel = angle_diff(pose.heading, heading_between(pose.position, building.footprint.center))
    if abs(rel) <= 45.0:
        road = city_map.road(building.facing_road)
        a, _ = road.centerline
        if road.axis == "NS":
            across = (pose.position.x - a.x) * (building.footprint.center.x - a.x) < 0
        else:
            across = (pose.position.y - a.y) * (building.footprint.center.y - a.y) < 0
        return "on the opposite side of the road" if across else "ahead of you"
    if abs(rel) >= 135.0:
        return "behind you"
    return "on your right" if rel > 0 else "on your left"


def render_instruction(subtask: Subtask) -> str:
    return subtask.instruction


def _render(category: str, cardinal: str = "", desc: str = "", side: str = "", turn: str = "") -> str:
    if category == "orientation_alignment":
        return f"Face {CARDINAL_WORDS[cardinal]}. You will see {desc} {side}."
    if category == "move_along_road":
        return f"Move along the road and stop at the intersection when you see {desc} {side}."
    if category == "move_to_destination":
        return f"Move along the road until you see {desc} {side}."
    if category == "turn_at_intersection":
        return f"Turn {turn} at the intersection and you should see this view."
    if category == "reach_destination":
        return f"Your destination is {desc}. Stop in front of it and face it."
    raise ValueError(f"unknown category {category!r}")


def _nearest_building(city_map, p: Vec2, exclude: Optional[str] = None):
    best, best_d = None, float("inf")
    for b in city_map.buildings:
        if b.id == exclude:
            continue
        d = b.front_door.manhattan_to(p)
        if d < best_d:
            best, best_d = b, d
    return best


def decompose_path(city_map, graph: WaypointGraph, path: list[int], goal_building) -> Optional[list[Subtask]]:
    """Algorithm: align, (move+turn) per heading change, optional move, reach.

    Returns None when the decomposition falls outside the 2-4 instruction budget.
    """
    positions = [graph.position(n) for n in path]
    headings = [heading_between(a, b) for a, b in zip(positions, positions[1:])]
    if not headings:
        return None
    turn_indices = [i for i in range(1, len(headings)) if abs(angle_diff(headings[i - 1], headings[i])) > 1e-9]
    final_heading = cardinal_heading_toward(positions[-1], goal_building.footprint.center)
    count = 2 + 2 * len(turn_indices)
    straight_tail_start = turn_indices[-1] if turn_indices else 0
    tail_length = positions[straight_tail_start].manhattan_to(positions[-1])
    include_tail_move = not turn_indices and tail_length >= STRAIGHT_MOVE_MIN
    if include_tail_move:
        count += 1
    if not 2 <= count <= 4:
        return None

    subtasks: list[Subtask] = []
    align_pose = Pose(positions[0], headings[0])
    lm = _nearest_building(city_map, positions[0])
    subtasks.append(
        Subtask(
            "orientation_alignment",
            _render("orientation_alignment", cardinal_of(headings[0]), describe(lm.asset), _side_phrase(city_map, align_pose, lm)),
            capture_hint(city_map, align_pose),
            align_pose,
            landmark_id=lm.id,
        )
    )
    for i in turn_indices:
        move_pose = Pose(positions[i - 1], headings[i - 1])
        turn_pose = Pose(positions[i], headings[i])
        turn_lm = _nearest_building(city_map, positions[i])
        subtasks.append(
            Subtask(
                "move_along_road",
                _render("move_along_road", desc=describe(turn_lm.asset), side=_side_phrase(city_map, move_pose, turn_lm)),
                capture_hint(city_map, move_pose),
                move_pose,
                landmark_id=turn_lm.id,
            )
        )
        direction = "left" if angle_diff(headings[i - 1], headings[i]) < 0 else "right"
        subtasks.append(
            Subtask(
                "turn_at_intersection",
                _render("turn_at_intersection", turn=direction),
                capture_hint(city_map, turn_pose),
                turn_pose,
            )
        )
    if include_tail_move:
        move_pose = Pose(positions[-1], headings[-1])
        subtasks.append(
            Subtask(
                "move_along_road",
                _render("move_to_destination", desc=describe(goal_building.asset), side=_side_phrase(city_map, move_pose, goal_building)),
                capture_hint(city_map, move_pose),
                move_pose,
                landmark_id=goal_building.id,
            )
        )
    reach_pose = Pose(positions[-1], final_heading)
    subtasks.append(
        Subtask(
            "reach_destination",
            _render("reach_destination", desc=describe(goal_building.asset)),
            capture_hint(city_map, reach_pose),
            reach_pose,
            landmark_id=goal_building.id,
        )
    )
    return subtasks


def cardinal_heading_toward(origin: Vec2, target: Vec2) -> float:
    bearing = heading_between(origin, target)
    return float((round(bearing / 90.0) % 4) * 90)


def generate_mmnav_task(
    city_map,
    rand,
    difficulty: str = "easy",
    graph: Optional[WaypointGraph] = None,
    map_hash: str = "",
    task_id: str = "task0",
    min_path: float = MIN_PATH_LENGTH,
    max_path: float = MAX_PATH_LENGTH,
    max_tries: int = 200,
) -> MMNavTask:
    """Sample endpoints, plan, decompose, and capture hints for one task."""
    if difficulty not in ("easy", "hard"):
        raise ValueError("difficulty must be 'easy' or 'hard'")
    has_dynamics = bool(city_map.elements) or bool(city_map.traffic)
    if difficulty == "easy" and has_dynamics:
        raise ValueError("easy tasks need a map without street elements or traffic")
    if difficulty == "hard" and not (city_map.elements and city_map.traffic):
        raise ValueError("hard tasks need a map with street elements and traffic")
    segments_with_buildings = {b.facing_road for b in city_map.buildings}
    if len(city_map.buildings) < 2 or len(segments_with_buildings) < 2:
        raise ValueError("map needs at least 2 buildings on distinct segments")
    if graph is None:
        graph = build_waypoint_graph(city_map)
    bounds = city_map.bounds
    for _ in range(max_tries):
        p_start = Vec2(rand.uniform(bounds.min.x, bounds.max.x), rand.uniform(bounds.min.y, bounds.max.y))
        p_goal = Vec2(rand.uniform(bounds.min.x, bounds.max.x), rand.uniform(bounds.min.y, bounds.max.y))
        start_building = _nearest_building(city_map, p_start)
        goal_building = _nearest_building(city_map, p_goal, exclude=start_building.id)
        if start_building is None or goal_building is None:
            continue
        start_wp = graph.nearest_node(start_building.front_door)
        goal_wp = graph.nearest_node(goal_building.front_door)
        if start_wp == goal_wp:
            continue
        try:
            path = astar_path(graph, start_wp, goal_wp)
        except NoPath:
            continue
        length = path_cost(graph, path)
        if not min_path <= length <= max_path:
            continue
        subtasks = decompose_path(city_map, graph, path, goal_building)
        if subtasks is None:
            continue
        first_heading = subtasks[0].goal.heading
        other_cardinals = [h for h in (0.0, 90.0, 180.0, 270.0) if h != first_heading]
        spawn = Pose(graph.position(path[0]), other_cardinals[rand.randrange(3)])
        return MMNavTask(task_id, map_hash, difficulty, spawn, subtasks, path, length, goal_building.id)
    raise NoValidPair(f"no endpoint pair produced a 2-4 instruction task in {max_tries} tries")


def check_subtask_success(world, agent_id: str, subtask: Subtask) -> bool:
    """Goal pose reached within tolerances; reach also needs the landmark in view."""
    robot = world.robot(agent_id)
    goal = subtask.goal
    if robot.position.manhattan_to(goal.position) > subtask.position_tolerance:
        return False
    if abs(angle_diff(robot.heading, goal.heading)) > subtask.heading_tolerance:
        return False
    if subtask.category == "reach_destination":
        depth, semantic = scan_environment(world, agent_id, robot.position, robot.heading, view="level")
        visible = {lm.building_id for lm in landmarks_from_scan(depth, semantic)}
        return subtask.landmark_id in visible
    return True
