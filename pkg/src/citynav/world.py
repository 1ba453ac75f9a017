"""World state and the deterministic fixed-timestep loop.

Sim time is tracked in integer units of 1/300 s so the 1/60 s world tick and the
0.01 s control-buffer poll interleave exactly, with no float drift. At a shared
boundary the world tick runs first, then the buffer poll.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import rng as rngmod
from .agents import (
    ROBOT_RADIUS,
    TRANSLATIONS,
    ControlBuffer,
    Observation,
    RobotAction,
    SafetyEvent,
    UnknownAgent,
    buffer_tick,
    observe,
    plan_translation,
)
from .geometry import Aabb, Pose, QuadTree, Vec2, heading_between, heading_vector, normalize_heading, turn_heading
from .procgen import CityMap
from .traffic import (
    GateKeeper,
    PedestrianAgent,
    RouteFollower,
    SimClock,
    TrafficLight,
    VehicleAgent,
    light_state_at,
    pedestrian_step,
    phase_grants,
    vehicle_control_step,
)
from .waypoints import WaypointGraph, build_centerline_graph, build_waypoint_graph, sample_route

UNITS_PER_SECOND = 300
WORLD_TICK_UNITS = 5  # 1/60 s
BUFFER_TICK_UNITS = 3  # 0.01 s
TRANSLATION_SPEED = 2.5  # m/s: 5 m over 2.0 s

ROUTE_HOPS = 40
_CONTACT_EPS = 1e-9


@dataclass
class Execution:
    action: RobotAction
    start_units: int
    duration_units: int
    start_position: Vec2
    start_heading: float
    end_position: Vec2
    end_heading: float
    direction: Optional[tuple[float, float]] = None
    travel_distance: float = 0.0
    blocker: Optional[str] = None
    blocker_emitted: bool = False
    events: list = field(default_factory=list)


@dataclass
class RobotState:
    id: str
    position: Vec2
    heading: float
    view: str = "level"
    instruction_payload: Optional[dict] = None
    inbox: list = field(default_factory=list)
    execution: Optional[Execution] = None
    last_observation: Optional[Observation] = None
    contact_static: set = field(default_factory=set)
    contact_dynamic: set = field(default_factory=set)
    inside_bands: set = field(default_factory=set)

    @property
    def pose(self) -> Pose:
        return Pose(self.position, self.heading)


class World:
    """A city map plus everything that moves in it."""

    def __init__(self, city_map: CityMap, with_traffic: bool = True):
        self.city_map = city_map
        self.sidewalk_graph: WaypointGraph = build_waypoint_graph(city_map)
        self.centerline_graph: WaypointGraph = build_centerline_graph(city_map)
        self.units = 0
        self.dt = 1.0 / 60.0
        self._initial_lights = self._init_lights()
        self._light_cache: dict[str, tuple[int, TrafficLight]] = {}
        self.gates = GateKeeper(self.light_state)
        self.vehicles: list[VehicleAgent] = []
        self.pedestrians: list[PedestrianAgent] = []
        self._agent_rand: dict[str, object] = {}
        if with_traffic:
            self._spawn_traffic()
        self.robots: dict[str, RobotState] = {}
        self.buffer = ControlBuffer()
        self.tick_events: list = []
        self.safety_events: list[SafetyEvent] = []
        self.action_log: list[dict] = []
        self.transcript: list[dict] = []
        self.completion_listeners: list[Callable] = []
        self._bands = self._build_crosswalk_bands()
        self._bands_tree = QuadTree(self.city_map.bounds.inflated(50.0))
        for i, (_bid, box, _iid) in enumerate(self._bands):
            self._bands_tree.insert(i, box)

    # -- construction -----------------------------------------------------------

    def _init_lights(self) -> dict[str, TrafficLight]:
        lights = {}
        for inter in self.city_map.intersections:
            if inter.signal_id is None:
                continue
            rand = rngmod.stream(self.city_map.spec.seed, "lights", int(inter.id[1:]))
            phase = "NS_green" if rand.random() < 0.5 else "EW_green"
            offset = rand.uniform(1.0, 30.0)
            lights[inter.id] = TrafficLight(inter.id, phase, offset, 30.0, offset)
        return lights

    def _spawn_traffic(self) -> None:
        for spawn in self.city_map.traffic:
            rand = rngmod.stream(spawn.seed, "route")
            if spawn.kind == "vehicle":
                graph = self.centerline_graph
                if len(graph) == 0:
                    continue
                start = rand.randrange(len(graph))
                route = sample_route(graph, start, ROUTE_HOPS, rand)
                pos = graph.position(route[0])
                heading = heading_between(pos, graph.position(route[1])) if len(route) > 1 else 0.0
                agent = VehicleAgent(spawn.id, pos, heading)
                agent.follower.route = route
                self.vehicles.append(agent)
            else:
                graph = self.sidewalk_graph
                if len(graph) == 0:
                    continue
                start = rand.randrange(len(graph))
                route = sample_route(graph, start, ROUTE_HOPS, rand)
                pos = graph.position(route[0])
                heading = heading_between(pos, graph.position(route[1])) if len(route) > 1 else 0.0
                agent = PedestrianAgent(spawn.id, pos, heading)
                agent.follower.route = route
                self.pedestrians.append(agent)
            self._agent_rand[spawn.id] = rand
        self.vehicles.sort(key=lambda a: int(a.id[1:]))
        self.pedestrians.sort(key=lambda a: int(a.id[1:]))

    def _build_crosswalk_bands(self) -> list[tuple[str, Aabb, str]]:
        spec = self.city_map.spec
        half_road = spec.road_width / 2.0
        corner = spec.corner_offset
        stripe = spec.sidewalk_width / 2.0
        bands = []
        for inter in self.city_map.intersections:
            if inter.signal_id is None:
                continue
            c = inter.center
            arm_dirs = set()
            for sid in inter.arms:
                road = self.city_map.road(sid)
                a_id, _b_id = road.endpoints
                if road.axis == "NS":
                    arm_dirs.add("N" if inter.id == a_id else "S")
                else:
                    arm_dirs.add("E" if inter.id == a_id else "W")
            for d in sorted(arm_dirs):
                if d == "N":
                    box = Aabb.from_bounds(c.x - half_road, c.y + corner - stripe, c.x + half_road, c.y + corner + stripe)
                elif d == "S":
                    box = Aabb.from_bounds(c.x - half_road, c.y - corner - stripe, c.x + half_road, c.y - corner + stripe)
                elif d == "E":
                    box = Aabb.from_bounds(c.x + corner - stripe, c.y - half_road, c.x + corner + stripe, c.y + half_road)
                else:
                    box = Aabb.from_bounds(c.x - corner - stripe, c.y - half_road, c.x - corner + stripe, c.y + half_road)
                bands.append((f"{inter.id}:{d}", box, inter.id))
        return bands

    # -- lights -----------------------------------------------------------------

    def light_state(self, intersection_id: str) -> Optional[TrafficLight]:
        """Current signal state, lazily computed in closed form and tick-memoized."""
        initial = self._initial_lights.get(intersection_id)
        if initial is None:
            return None
        cached = self._light_cache.get(intersection_id)
        if cached is not None and cached[0] == self.units:
            return cached[1]
        state = light_state_at(initial, self.sim_time)
        self._light_cache[intersection_id] = (self.units, state)
        return state

    def all_light_states(self) -> dict[str, TrafficLight]:
        return {iid: self.light_state(iid) for iid in sorted(self._initial_lights)}

    # -- clock ------------------------------------------------------------------

    @property
    def sim_time(self) -> float:
        return self.units / UNITS_PER_SECOND

    @property
    def tick_index(self) -> int:
        return self.units // WORLD_TICK_UNITS

    @property
    def clock(self) -> SimClock:
        return SimClock(self.tick_index, self.dt)

    def advance_to_units(self, target: int) -> None:
        while self.units < target:
            next_tick = (self.units // WORLD_TICK_UNITS + 1) * WORLD_TICK_UNITS
            next_poll = (self.units // BUFFER_TICK_UNITS + 1) * BUFFER_TICK_UNITS
            boundary = min(next_tick, next_poll)
            if boundary > target:
                self.units = target
                return
            self.units = boundary
            if boundary == next_tick:
                self._world_tick()
            if boundary == next_poll:
                buffer_tick(self.buffer, self)

    def advance_seconds(self, seconds: float) -> None:
        self.advance_to_units(self.units + round(seconds * UNITS_PER_SECOND))

    def tick(self) -> list:
        """Advance exactly one world tick; returns that tick's event list."""
        self.advance_to_units((self.units // WORLD_TICK_UNITS + 1) * WORLD_TICK_UNITS)
        return self.tick_events

    def run_ticks(self, n: int) -> None:
        for _ in range(n):
            self.tick()

    # -- per-tick work ------------------------------------------------------------

    def _world_tick(self) -> None:
        events: list = []
        for vehicle in self.vehicles:
            if vehicle.follower.finished:
                self._resample_route(vehicle, self.centerline_graph)
                events.append(("route_complete", vehicle.id))
            vehicle_control_step(vehicle, self.centerline_graph, self.gates, self.dt, events)
        for ped in self.pedestrians:
            if ped.follower.finished:
                self._resample_route(ped, self.sidewalk_graph)
                events.append(("route_complete", ped.id))
            pedestrian_step(ped, self.sidewalk_graph, self.gates, self.dt, events)
        for agent_id in sorted(self.robots):
            robot = self.robots[agent_id]
            self._interpolate_robot(robot)
            self._detect_robot_events(robot)
        self.tick_events = events

    def _resample_route(self, agent, graph: WaypointGraph) -> None:
        rand = self._agent_rand[agent.id]
        endpoint = agent.follower.route[-1] if agent.follower.route else 0
        agent.follower = RouteFollower(route=sample_route(graph, endpoint, ROUTE_HOPS, rand))

    # -- robots -------------------------------------------------------------------

    def spawn_robot(self, agent_id: str, pose: Pose) -> RobotState:
        if agent_id in self.robots:
            raise ValueError(f"robot {agent_id!r} already exists")
        robot = RobotState(agent_id, pose.position, pose.heading)
        self.robots[agent_id] = robot
        self.buffer.register(agent_id)
        robot.last_observation = observe(self, agent_id)
        return robot

    def robot(self, agent_id: str) -> RobotState:
        try:
            return self.robots[agent_id]
        except KeyError:
            raise UnknownAgent(agent_id) from None

    def dynamic_discs(self):
        for v in self.vehicles:
            yield (v.id, "vehicle", v.position, v.radius)
        for p in self.pedestrians:
            yield (p.id, "pedestrian", p.position, p.radius)
        for rid in sorted(self.robots):
            r = self.robots[rid]
            yield (rid, "robot", r.position, ROBOT_RADIUS)

    def static_obstacles_in(self, window: Aabb):
        for eid in self.city_map.index.query(window):
            if eid.startswith("b"):
                yield (eid, "building", self.city_map.building(eid).footprint)
            elif eid.startswith("e"):
                el = self.city_map.element(eid)
                yield (eid, "tree" if el.element_class == "tree" else "element", el.footprint)

    def bands_near(self, window: Aabb):
        """Crosswalk bands whose boxes intersect the window."""
        for i in self._bands_tree.query(window):
            yield self._bands[i]

    def submit_action(self, agent_id: str, action: RobotAction) -> None:
        """Queue an action for the next buffer poll; raises AgentBusy when occupied."""
        self.robot(agent_id)
        self.buffer.submit(agent_id, action)  # validates availability first
        self.transcript.append({"units": self.units, "agent": agent_id, "action": action.to_dict()})

    def begin_action(self, agent_id: str, action: RobotAction) -> None:
        robot = self.robot(agent_id)
        duration_units = round(action.duration * UNITS_PER_SECOND)
        start_pos, start_heading = robot.position, robot.heading
        end_pos, end_heading = start_pos, start_heading
        direction = None
        travel = 0.0
        blocker = None
        if action.kind in ("move_forward", "move_backward", "move_left", "move_right"):
            end_pos, blocker, travel = plan_translation(self, agent_id, action.kind)
            direction = heading_vector(normalize_heading(robot.heading + TRANSLATIONS[action.kind]))
        elif action.kind in ("turn_left", "turn_right"):
            end_heading = turn_heading(robot.heading, action.kind)
        robot.execution = Execution(
            action=action,
            start_units=self.units,
            duration_units=duration_units,
            start_position=start_pos,
            start_heading=start_heading,
            end_position=end_pos,
            end_heading=end_heading,
            direction=direction,
            travel_distance=travel,
            blocker=blocker,
        )

    def execution_elapsed(self, agent_id: str) -> bool:
        ex = self.robot(agent_id).execution
        return ex is not None and self.units >= ex.start_units + ex.duration_units

    def _interpolate_robot(self, robot: RobotState) -> None:
        ex = robot.execution
        if ex is None or ex.direction is None:
            return
        elapsed = (self.units - ex.start_units) / UNITS_PER_SECOND
        dist = min(ex.travel_distance, TRANSLATION_SPEED * elapsed)
        robot.position = Vec2(
            ex.start_position.x + ex.direction[0] * dist,
            ex.start_position.y + ex.direction[1] * dist,
        )
        if ex.blocker is not None and not ex.blocker_emitted and dist >= ex.travel_distance:
            event = SafetyEvent(
                "static_collision", self.tick_index, robot.id, ex.blocker, self.city_map.entity_class(ex.blocker)
            )
            ex.events.append(event)
            self.safety_events.append(event)
            ex.blocker_emitted = True

    def finish_action(self, agent_id: str) -> dict:
        robot = self.robot(agent_id)
        ex = robot.execution
        if ex is None:
            raise RuntimeError(f"no action executing for {agent_id}")
        robot.position = ex.end_position
        robot.heading = ex.end_heading
        action = ex.action
        if action.kind == "look":
            robot.view = action.view
        elif action.kind == "send_message":
            for other_id in sorted(self.robots):
                if other_id != agent_id:
                    self.robots[other_id].inbox.append(action.text)
        if ex.blocker is not None and not ex.blocker_emitted:
            event = SafetyEvent(
                "static_collision", self.tick_index, agent_id, ex.blocker, self.city_map.entity_class(ex.blocker)
            )
            ex.events.append(event)
            self.safety_events.append(event)
            ex.blocker_emitted = True
        outcome = {
            "position": [robot.position.x, robot.position.y],
            "heading": robot.heading,
            "duration": action.duration,
            "events": [e.to_dict() for e in ex.events],
        }
        robot.execution = None
        record = {
            "tick": self.tick_index,
            "agent": agent_id,
            "action": action.to_dict(),
            "outcome": outcome,
            "events": outcome["events"],
            "status": "ok",
        }
        for listener in self.completion_listeners:
            status = listener(agent_id, action, outcome)
            if status:
                record["status"] = status
        robot.last_observation = observe(self, agent_id)
        robot.inbox.clear()
        self.action_log.append(record)
        return outcome

    # -- robot safety events --------------------------------------------------------

    def _detect_robot_events(self, robot: RobotState) -> None:
        pos = robot.position
        window = Aabb.from_center(pos, ROBOT_RADIUS + 3.0, ROBOT_RADIUS + 3.0)
        static_now = set()
        for eid, cls, box in self.static_obstacles_in(window):
            if box.distance_to_point(pos) < ROBOT_RADIUS - _CONTACT_EPS:
                static_now.add(eid)
                if eid not in robot.contact_static:
                    event = SafetyEvent("static_collision", self.tick_index, robot.id, eid, cls)
                    self.safety_events.append(event)
                    if robot.execution is not None:
                        robot.execution.events.append(event)
        robot.contact_static = static_now
        dynamic_now = set()
        for aid, kind, apos, radius in self.dynamic_discs():
            if kind == "robot":
                continue
            if pos.euclidean_to(apos) < ROBOT_RADIUS + radius - _CONTACT_EPS:
                dynamic_now.add(aid)
                if aid not in robot.contact_dynamic:
                    event = SafetyEvent("dynamic_collision", self.tick_index, robot.id, aid, kind)
                    self.safety_events.append(event)
                    if robot.execution is not None:
                        robot.execution.events.append(event)
        robot.contact_dynamic = dynamic_now
        axis = "NS" if robot.pose.cardinal in ("N", "S") else "EW"
        inside_now = set()
        for band_id, box, iid in self.bands_near(Aabb.from_center(pos, 0.5, 0.5)):
            if box.contains_point(pos):
                inside_now.add(band_id)
                if band_id not in robot.inside_bands:
                    light = self.light_state(iid)
                    if not phase_grants(light.phase, axis):
                        event = SafetyEvent("red_light_violation", self.tick_index, robot.id, iid, "signal")
                        self.safety_events.append(event)
                        if robot.execution is not None:
                            robot.execution.events.append(event)
        robot.inside_bands = inside_now

    # -- hashing ---------------------------------------------------------------------

    def state_digest(self) -> str:
        doc = {
            "units": self.units,
            "lights": [
                [iid, l.phase, l.remaining] for iid, l in self.all_light_states().items()
            ],
            "vehicles": [
                [v.id, v.position.x, v.position.y, v.heading, v.speed, v.follower.progress] for v in self.vehicles
            ],
            "pedestrians": [
                [p.id, p.position.x, p.position.y, p.heading, p.follower.progress] for p in self.pedestrians
            ],
            "robots": [
                [r.id, r.position.x, r.position.y, r.heading, r.view] for r in map(self.robots.get, sorted(self.robots))
            ],
        }
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def tick_world(world: World, dt: float) -> list:
    """Advance one fixed world tick; dt must equal the world's configured dt."""
    if abs(dt - world.dt) > 1e-12:
        raise ValueError(f"dt {dt} does not match world dt {world.dt}")
    return world.tick()


def detect_events(world: World, since_tick: int = 0) -> list[SafetyEvent]:
    """Safety events recorded at or after the given tick."""
    return [e for e in world.safety_events if e.tick >= since_tick]
