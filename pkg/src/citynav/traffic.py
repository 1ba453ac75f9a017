"""Rule-based background traffic: signal phases, PID-driven vehicles, pedestrians.

Agents follow sampled waypoint routes on a fixed timestep. At signalized
intersections they enter a gated edge only when their travel axis is green with
more than 15 seconds remaining; otherwise they hold position at the stop point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .geometry import Vec2, angle_diff, heading_between, heading_vector, normalize_heading
from .waypoints import WaypointGraph

_EPS = 1e-9

PROCEED_MIN_REMAINING = 15.0  # seconds of green required to start a crossing
DEFAULT_GREEN_DURATION = 30.0

VEHICLE_ACCEL_MIN = -6.0
VEHICLE_ACCEL_MAX = 3.0
VEHICLE_MAX_SPEED = 15.0
VEHICLE_TARGET_SPEED = 8.0
VEHICLE_MAX_TURN_RATE = 120.0  # deg/s
VEHICLE_ARRIVAL_RADIUS = 1.0
VEHICLE_TURN_SLOWDOWN = 1.5  # m/s cap while far off heading

PEDESTRIAN_WALK_SPEED = 1.4
PEDESTRIAN_MAX_TURN_RATE = 120.0
PEDESTRIAN_ARRIVAL_RADIUS = 0.5

SPEED_GAINS = (0.8, 0.1, 0.05)
HEADING_GAINS = (2.0, 0.0, 0.2)


@dataclass(frozen=True)
class SimClock:
    tick: int = 0
    dt: float = 1.0 / 60.0

    @property
    def time(self) -> float:
        return self.tick * self.dt

    def advanced(self) -> "SimClock":
        return SimClock(self.tick + 1, self.dt)


@dataclass(frozen=True)
class TrafficLight:
    intersection_id: str
    phase: str  # "NS_green" | "EW_green"
    remaining: float
    green_duration: float = DEFAULT_GREEN_DURATION
    offset: float = 0.0


def advance_traffic_light(light: TrafficLight, dt: float) -> TrafficLight:
    """Count the phase down by dt; flip and reset on reaching zero."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    remaining = light.remaining - dt
    if remaining <= _EPS:
        flipped = "EW_green" if light.phase == "NS_green" else "NS_green"
        return replace(light, phase=flipped, remaining=light.green_duration)
    return replace(light, remaining=remaining)


def light_state_at(light: TrafficLight, elapsed: float) -> TrafficLight:
    """Closed-form phase state after `elapsed` seconds, matching repeated stepping."""
    if elapsed < 0:
        raise ValueError("elapsed must be >= 0")
    if elapsed < light.remaining - _EPS:
        phase, remaining = light.phase, light.remaining - elapsed
    else:
        over = elapsed - light.remaining
        flips = 1 + int((over + _EPS) // light.green_duration)
        into_phase = over - (flips - 1) * light.green_duration
        if into_phase >= light.green_duration - _EPS:
            flips += 1
            into_phase = 0.0
        phase = light.phase
        if flips % 2 == 1:
            phase = "EW_green" if phase == "NS_green" else "NS_green"
        remaining = light.green_duration - into_phase
    return TrafficLight(light.intersection_id, phase, remaining, light.green_duration, light.offset)


def phase_grants(phase: str, axis: str) -> bool:
    return (phase == "NS_green") == (axis == "NS")


def signal_gate(light: TrafficLight, approach_axis: str) -> str:
    """'proceed' only on a green for the axis with > 15 s remaining, else 'wait'."""
    if phase_grants(light.phase, approach_axis) and light.remaining > PROCEED_MIN_REMAINING:
        return "proceed"
    return "wait"


@dataclass
class PidState:
    integral: float = 0.0
    prev_error: Optional[float] = None


def pid_step(state: PidState, error: float, gains, dt: float, out_min: float, out_max: float) -> float:
    """One PID update with conditional-integration anti-windup; mutates state."""
    kp, ki, kd = gains
    derivative = 0.0 if state.prev_error is None else (error - state.prev_error) / dt
    unsaturated = kp * error + ki * state.integral + kd * derivative
    pushing_past_limit = (unsaturated > out_max and error > 0) or (unsaturated < out_min and error < 0)
    if not pushing_past_limit:
        state.integral += error * dt
    state.prev_error = error
    out = kp * error + ki * state.integral + kd * derivative
    return max(out_min, min(out_max, out))


@dataclass
class RouteFollower:
    """Shared route-progress state for background agents."""

    route: list = field(default_factory=list)
    progress: int = 0  # index of the last reached route node
    entered_edge: int = -1  # progress index whose outgoing gated edge was approved

    @property
    def finished(self) -> bool:
        return self.progress >= len(self.route) - 1

    def target(self) -> Optional[int]:
        if self.finished:
            return None
        return self.route[self.progress + 1]


@dataclass
class VehicleAgent:
    id: str
    position: Vec2
    heading: float
    speed: float = 0.0
    target_speed: float = VEHICLE_TARGET_SPEED
    follower: RouteFollower = field(default_factory=RouteFollower)
    pid_speed: PidState = field(default_factory=PidState)
    pid_heading: PidState = field(default_factory=PidState)
    waiting: bool = False

    kind = "vehicle"
    radius = 2.0
    arrival_radius = VEHICLE_ARRIVAL_RADIUS


@dataclass
class PedestrianAgent:
    id: str
    position: Vec2
    heading: float
    walk_speed: float = PEDESTRIAN_WALK_SPEED
    max_turn_rate: float = PEDESTRIAN_MAX_TURN_RATE
    follower: RouteFollower = field(default_factory=RouteFollower)
    waiting: bool = False

    kind = "pedestrian"
    radius = 0.3
    arrival_radius = PEDESTRIAN_ARRIVAL_RADIUS


class GateKeeper:
    """Resolves gate verdicts against the live signal states and counts entries.

    `lights` is either a dict of intersection id -> TrafficLight or a callable
    with the same lookup semantics (lazily computed states).
    """

    def __init__(self, lights):
        self._lookup = lights.get if hasattr(lights, "get") else lights
        self.entries = 0
        self.violations = 0

    def light_for(self, intersection_id: str) -> Optional[TrafficLight]:
        return self._lookup(intersection_id)

    def verdict(self, gate, moving_to: int) -> str:
        if gate is None:
            return "proceed"
        if gate.toward is not None and gate.toward != moving_to:
            return "proceed"
        light = self.light_for(gate.intersection_id)
        if light is None:
            return "proceed"
        return signal_gate(light, gate.travel_axis)

    def record_entry(self, gate, moving_to: int) -> None:
        if gate is None:
            return
        if gate.toward is not None and gate.toward != moving_to:
            return
        if self.light_for(gate.intersection_id) is None:
            return
        self.entries += 1
        if self.verdict(gate, moving_to) == "wait":
            self.violations += 1


def _advance_follower(agent, graph: WaypointGraph, gates: GateKeeper, events: list) -> Optional[Vec2]:
    """Consume reached waypoints and return the current target position.

    Gated edges are approved exactly once, at the stop node, before any motion
    onto them; returns None while the agent must hold or when the route is done.
    """
    f = agent.follower
    while not f.finished:
        nxt = f.target()
        current = f.route[f.progress]
        edge = graph.edge_between(current, nxt)
        if edge is not None and edge.gate is not None and f.entered_edge != f.progress:
            verdict = gates.verdict(edge.gate, nxt)
            if verdict == "wait":
                if not agent.waiting:
                    events.append(("gate_wait", agent.id, edge.gate.intersection_id))
                agent.waiting = True
                return None
            gates.record_entry(edge.gate, nxt)
            f.entered_edge = f.progress
        if agent.position.euclidean_to(graph.position(nxt)) <= agent.arrival_radius:
            f.progress += 1
            continue
        agent.waiting = False
        return graph.position(nxt)
    return None


def _braking_cap(agent, graph: WaypointGraph, gates: GateKeeper) -> float:
    """Speed cap approaching a red gate one edge ahead; inf when unconstrained."""
    f = agent.follower
    if f.finished or f.progress + 2 >= len(f.route):
        return math.inf
    stop_node = f.route[f.progress + 1]
    edge = graph.edge_between(stop_node, f.route[f.progress + 2])
    if edge is None or edge.gate is None or f.entered_edge > f.progress:
        return math.inf
    if gates.verdict(edge.gate, f.route[f.progress + 2]) == "proceed":
        return math.inf
    dist = agent.position.euclidean_to(graph.position(stop_node))
    return math.sqrt(2.0 * 4.0 * max(0.0, dist - 0.3))


def vehicle_control_step(
    vehicle: VehicleAgent, graph: WaypointGraph, gates: GateKeeper, dt: float, events: Optional[list] = None
) -> VehicleAgent:
    """PID speed/heading step toward the next waypoint; holds at red gates."""
    if events is None:
        events = []
    target = _advance_follower(vehicle, graph, gates, events)
    if target is None:
        # Held at a stop point or out of route: bleed speed within the accel bound.
        vehicle.speed = max(0.0, vehicle.speed + VEHICLE_ACCEL_MIN * dt)
        vehicle.pid_speed = PidState()
        vehicle.pid_heading = PidState()
        return vehicle
    heading_error = angle_diff(vehicle.heading, heading_between(vehicle.position, target))
    turn = pid_step(vehicle.pid_heading, heading_error, HEADING_GAINS, dt, -VEHICLE_MAX_TURN_RATE, VEHICLE_MAX_TURN_RATE)
    vehicle.heading = normalize_heading(vehicle.heading + turn * dt)
    goal_speed = vehicle.target_speed if abs(heading_error) <= 30.0 else min(vehicle.target_speed, VEHICLE_TURN_SLOWDOWN)
    goal_speed = min(goal_speed, _braking_cap(vehicle, graph, gates))
    accel = pid_step(vehicle.pid_speed, goal_speed - vehicle.speed, SPEED_GAINS, dt, VEHICLE_ACCEL_MIN, VEHICLE_ACCEL_MAX)
    vehicle.speed = max(0.0, min(VEHICLE_MAX_SPEED, vehicle.speed + accel * dt))
    dx, dy = heading_vector(vehicle.heading)
    vehicle.position = Vec2(vehicle.position.x + dx * vehicle.speed * dt, vehicle.position.y + dy * vehicle.speed * dt)
    return vehicle


def pedestrian_step(
    pedestrian: PedestrianAgent, graph: WaypointGraph, gates: GateKeeper, dt: float, events: Optional[list] = None
) -> PedestrianAgent:
    """Turn-rate-limited walk toward the next waypoint; holds at red gates."""
    if events is None:
        events = []
    target = _advance_follower(pedestrian, graph, gates, events)
    if target is None:
        return pedestrian
    desired = heading_between(pedestrian.position, target)
    delta = angle_diff(pedestrian.heading, desired)
    max_step = pedestrian.max_turn_rate * dt
    delta = max(-max_step, min(max_step, delta))
    pedestrian.heading = normalize_heading(pedestrian.heading + delta)
    dx, dy = heading_vector(pedestrian.heading)
    step = min(pedestrian.walk_speed * dt, pedestrian.position.euclidean_to(target))
    pedestrian.position = Vec2(pedestrian.position.x + dx * step, pedestrian.position.y + dy * step)
    return pedestrian
