"""Controllable robots: discrete actions, ray-scan observations, async control buffer.

Perception is headless: a 90-degree frontal fan of 64 rays yields a depth scan,
a per-ray semantic class/id scan, and a visible-landmark list. That preserves
what the benchmarks consume (occlusion, distance, class, landmark identity)
without a renderer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .geometry import (
    Aabb,
    Vec2,
    heading_vector,
    normalize_heading,
    ray_aabb_distance,
    ray_disc_distance,
)

ROBOT_RADIUS = 0.4
TRANSLATION_DISTANCE = 5.0
FAN_DEGREES = 90.0
NUM_RAYS = 64
MAX_RANGE = 120.0
LOOK_UP_BUILDING_RANGE = 15.0
LOOK_DOWN_RANGE = 10.0
MESSAGE_MAX_CHARS = 128

# Sim-seconds per action kind.
ACTION_DURATIONS = {
    "move_forward": 2.0,
    "move_backward": 2.0,
    "move_left": 2.0,
    "move_right": 2.0,
    "turn_left": 1.0,
    "turn_right": 1.0,
    "stay": 0.5,
    "evaluate": 0.5,
    "look": 0.5,
    "send_message": 0.5,
    "check_task_complete": 0.5,
}

TRANSLATIONS = {"move_forward": 0.0, "move_right": 90.0, "move_backward": 180.0, "move_left": 270.0}


class UnknownAgent(KeyError):
    pass


class AgentBusy(Exception):
    pass


class MessageTooLong(ValueError):
    pass


@dataclass(frozen=True)
class RobotAction:
    kind: str
    view: Optional[str] = None  # look(): "level" | "up" | "down"
    text: Optional[str] = None  # send_message payload

    def __post_init__(self) -> None:
        if self.kind not in ACTION_DURATIONS:
            raise ValueError(f"unknown action kind: {self.kind!r}")
        if self.kind == "look" and self.view not in ("level", "up", "down"):
            raise ValueError("look requires view in {level, up, down}")
        if self.kind == "send_message":
            if self.text is None:
                raise ValueError("send_message requires text")
            if len(self.text) > MESSAGE_MAX_CHARS:
                raise MessageTooLong(f"message exceeds {MESSAGE_MAX_CHARS} characters")

    @property
    def duration(self) -> float:
        return ACTION_DURATIONS[self.kind]

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.view is not None:
            out["view"] = self.view
        if self.text is not None:
            out["text"] = self.text
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "RobotAction":
        return cls(doc["kind"], doc.get("view"), doc.get("text"))


@dataclass(frozen=True)
class SafetyEvent:
    kind: str  # static_collision | dynamic_collision | red_light_violation
    tick: int
    agent_id: str
    other_id: Optional[str]
    other_class: Optional[str]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "tick": self.tick,
            "agent": self.agent_id,
            "other": self.other_id,
            "other_class": self.other_class,
        }


@dataclass(frozen=True)
class Landmark:
    building_id: str
    bearing: float  # degrees relative to heading, left negative
    range: float

    def to_dict(self) -> dict:
        return {"id": self.building_id, "bearing": self.bearing, "range": self.range}


@dataclass(frozen=True)
class Observation:
    position: tuple[float, float]
    heading: float
    cardinal: str
    view: str
    depth: tuple[float, ...]
    semantic: tuple[tuple[str, Optional[str]], ...]
    landmarks: tuple[Landmark, ...]
    instruction: Optional[dict] = None
    messages: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "position": list(self.position),
            "heading": self.heading,
            "cardinal": self.cardinal,
            "view": self.view,
            "depth": list(self.depth),
            "semantic": [[c, i] for c, i in self.semantic],
            "landmarks": [lm.to_dict() for lm in self.landmarks],
            "instruction": self.instruction,
            "messages": list(self.messages),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Observation":
        return cls(
            tuple(doc["position"]),
            doc["heading"],
            doc["cardinal"],
            doc["view"],
            tuple(doc["depth"]),
            tuple((c, i) for c, i in doc["semantic"]),
            tuple(Landmark(lm["id"], lm["bearing"], lm["range"]) for lm in doc["landmarks"]),
            doc.get("instruction"),
            tuple(doc.get("messages", ())),
        )


def ray_offsets(num_rays: int = NUM_RAYS, fan: float = FAN_DEGREES) -> list[float]:
    """Ray bearings relative to the heading, centered on the fan."""
    step = fan / num_rays
    half = fan / 2.0
    return [-half + (i + 0.5) * step for i in range(num_rays)]


def scan_environment(world, observer_id: str, origin: Vec2, heading: float, view: str = "level"):
    """Cast the ray fan; returns (depth, semantic) tuples of length NUM_RAYS."""
    window_margin = MAX_RANGE + 1.0
    window = Aabb.from_center(origin, window_margin, window_margin)
    statics = list(world.static_obstacles_in(window))
    discs = [
        (aid, kind, pos, radius)
        for aid, kind, pos, radius in world.dynamic_discs()
        if aid != observer_id and abs(pos.x - origin.x) <= window_margin and abs(pos.y - origin.y) <= window_margin
    ]
    depth: list[float] = []
    semantic: list[tuple[str, Optional[str]]] = []
    for offset in ray_offsets():
        direction = heading_vector(normalize_heading(heading + offset))
        best_d, best_cls, best_id = MAX_RANGE, "sky", None
        for eid, cls, box in statics:
            t = ray_aabb_distance(origin, direction, box)
            if t is not None and t < best_d:
                best_d, best_cls, best_id = t, cls, eid
        for aid, kind, pos, radius in discs:
            t = ray_disc_distance(origin, direction, pos, radius)
            if t is not None and t < best_d:
                best_d, best_cls, best_id = t, kind, aid
        if view == "up":
            if best_cls != "building" or best_d > LOOK_UP_BUILDING_RANGE:
                best_d, best_cls, best_id = MAX_RANGE, "sky", None
        elif view == "down":
            d = min(best_d, LOOK_DOWN_RANGE)
            point = Vec2(origin.x + direction[0] * d, origin.y + direction[1] * d)
            best_d, best_cls, best_id = d, world.city_map.ground_class(point), None
        depth.append(best_d)
        semantic.append((best_cls, best_id))
    return tuple(depth), tuple(semantic)


def landmarks_from_scan(depth, semantic) -> tuple[Landmark, ...]:
    """Visible buildings with the bearing and range of their nearest-hit ray."""
    offsets = ray_offsets()
    best: dict[str, tuple[float, float]] = {}
    for i, (cls, eid) in enumerate(semantic):
        if cls == "building" and eid is not None:
            if eid not in best or depth[i] < best[eid][0]:
                best[eid] = (depth[i], offsets[i])
    return tuple(
        Landmark(eid, bearing, dist) for eid, (dist, bearing) in sorted(best.items(), key=lambda kv: int(kv[0][1:]))
    )


def observe(world, agent_id: str) -> Observation:
    """Snapshot observation for a robot at its current pose and view mode."""
    robot = world.robot(agent_id)
    depth, semantic = scan_environment(world, agent_id, robot.position, robot.heading, robot.view)
    landmarks = landmarks_from_scan(depth, semantic)
    return Observation(
        position=(robot.position.x, robot.position.y),
        heading=robot.heading,
        cardinal=robot.pose.cardinal,
        view=robot.view,
        depth=depth,
        semantic=semantic,
        landmarks=landmarks,
        instruction=robot.instruction_payload,
        messages=tuple(robot.inbox),
    )


def visibility_check(world, agent_id: str, target_id: str) -> bool:
    """True iff a level-view scan ray from the observer hits the target robot."""
    robot = world.robot(agent_id)
    world.robot(target_id)  # raises UnknownAgent for bad ids
    _depth, semantic = scan_environment(world, agent_id, robot.position, robot.heading, view="level")
    return any(cls == "robot" and eid == target_id for cls, eid in semantic)


CONTACT_BACKOFF = 1e-6  # keeps a stopped disc strictly short of tangency


def plan_translation(world, agent_id: str, action_kind: str) -> tuple[Vec2, Optional[str], float]:
    """Resolve a translation's endpoint against static obstacles.

    Returns (end_position, blocking_entity_id, travel_distance); the disc stops
    a hair short of contact when blocked so follow-up moves stay well-posed.
    """
    robot = world.robot(agent_id)
    direction_heading = normalize_heading(robot.heading + TRANSLATIONS[action_kind])
    direction = heading_vector(direction_heading)
    span = TRANSLATION_DISTANCE + ROBOT_RADIUS + 1.0
    window = Aabb.from_center(robot.position, span, span)
    best_t: float = TRANSLATION_DISTANCE
    blocker: Optional[str] = None
    for eid, cls, box in world.static_obstacles_in(window):
        t = ray_aabb_distance(robot.position, direction, box.inflated(ROBOT_RADIUS))
        if t is not None and t < best_t:
            best_t, blocker = t, eid
    if blocker is not None:
        best_t = max(0.0, best_t - CONTACT_BACKOFF)
    end = Vec2(robot.position.x + direction[0] * best_t, robot.position.y + direction[1] * best_t)
    return end, blocker, best_t


@dataclass
class BufferSlot:
    pending: Optional[RobotAction] = None
    available: bool = True
    latest_observation: Optional[Observation] = None


@dataclass
class ControlBuffer:
    """Centralized mediator: accepts actions from available agents at poll ticks."""

    poll_interval: float = 0.01
    slots: dict[str, BufferSlot] = field(default_factory=dict)

    def register(self, agent_id: str) -> None:
        self.slots[agent_id] = BufferSlot()

    def submit(self, agent_id: str, action: RobotAction) -> None:
        if agent_id not in self.slots:
            raise UnknownAgent(agent_id)
        slot = self.slots[agent_id]
        if not slot.available or slot.pending is not None:
            raise AgentBusy(agent_id)
        slot.pending = action

    def is_available(self, agent_id: str) -> bool:
        if agent_id not in self.slots:
            raise UnknownAgent(agent_id)
        return self.slots[agent_id].available


def buffer_tick(buffer: ControlBuffer, world) -> None:
    """One poll: finish elapsed actions, then start pending ones concurrently."""
    for agent_id in sorted(buffer.slots):
        if world.execution_elapsed(agent_id):
            world.finish_action(agent_id)
            buffer.slots[agent_id].available = True
            buffer.slots[agent_id].latest_observation = world.robot(agent_id).last_observation
    for agent_id in sorted(buffer.slots):
        slot = buffer.slots[agent_id]
        if slot.pending is not None and slot.available:
            action = slot.pending
            slot.pending = None
            slot.available = False
            world.begin_action(agent_id, action)
