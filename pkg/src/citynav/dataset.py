"""Oracle rollouts and training-data export with per-step supervision signals.

Each exported step pairs the observation and active instruction with the action
the oracle took, plus three supervision targets: Manhattan distance to the hint
capture pose, the hint's cardinal orientation, and the remaining action sequence
to the subtask goal (a full-task suffix is stored alongside).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .agents import RobotAction, landmarks_from_scan, scan_environment
from .geometry import Aabb, Vec2, angle_diff, cardinal_of, heading_vector
from .mapio import canonical_json, map_hash
from .metrics import EpisodeResult
from .procgen import CitySpec, generate_city
from .rng import stream
from .session import MMNavSession, run_episode
from .tasks.mmnav import MMNavTask, NoValidPair, StaticWorldView, generate_mmnav_task
from .traffic import phase_grants
from .world import World

DATASET_SCHEMA = "citynav-dataset/1"
STEP_METERS = 5.0
ORACLE_WAIT_BUDGET = 400  # stay actions allowed while red lights clear


class OracleBlocked(Exception):
    """Dynamics kept the oracle from completing within its wait budget."""


def plan_oracle_actions(task: MMNavTask) -> list[tuple[RobotAction, int]]:
    """Discrete action plan (action, subtask_index) reaching every subtask goal.

    Forward steps are exact 5 m moves; counts are rounded so the landing point
    stays within half a step of each goal, inside the checker tolerance.
    """
    plan: list[tuple[RobotAction, int]] = []
    position = task.start.position
    heading = task.start.heading
    for idx, subtask in enumerate(task.subtasks):
        goal = subtask.goal
        dx, dy = heading_vector(heading)
        along = (goal.position.x - position.x) * dx + (goal.position.y - position.y) * dy
        steps = round(along / STEP_METERS)
        for _ in range(max(0, steps)):
            plan.append((RobotAction("move_forward"), idx))
        position = Vec2(position.x + dx * STEP_METERS * max(0, steps), position.y + dy * STEP_METERS * max(0, steps))
        diff = angle_diff(heading, goal.heading)
        if abs(diff) > 1e-9:
            if abs(abs(diff) - 180.0) < 1e-9:
                plan.append((RobotAction("turn_right"), idx))
                plan.append((RobotAction("turn_right"), idx))
            elif diff > 0:
                plan.append((RobotAction("turn_right"), idx))
            else:
                plan.append((RobotAction("turn_left"), idx))
            heading = goal.heading
        plan.append((RobotAction("evaluate"), idx))
    return plan


class OraclePolicy:
    """Replays a plan through the buffer, inserting stays while lights are red.

    Signal waits apply on hard tasks only; the easy setting has no traffic and
    no signal-compliance metric.
    """

    def __init__(
        self,
        world: World,
        task: MMNavTask,
        agent_id: str = "robot0",
        wait_budget: int = ORACLE_WAIT_BUDGET,
        obey_signals: Optional[bool] = None,
    ):
        self.world = world
        self.agent_id = agent_id
        self.plan = plan_oracle_actions(task)
        self.cursor = 0
        self.waits = 0
        self.wait_budget = wait_budget
        self.obey_signals = task.difficulty == "hard" if obey_signals is None else obey_signals
        self.on_submit = None  # hook(observation, action, plan_index, is_wait)

    def remaining(self, subtask_index: Optional[int] = None) -> list[RobotAction]:
        """Planned suffix from the cursor, optionally scoped to one subtask."""
        tail = self.plan[self.cursor:]
        if subtask_index is not None:
            tail = [pair for pair in tail if pair[1] == subtask_index]
        return [action for action, _ in tail]

    def _red_light_ahead(self) -> bool:
        if not self.obey_signals:
            return False
        robot = self.world.robot(self.agent_id)
        dx, dy = heading_vector(robot.heading)
        start, end = robot.position, Vec2(robot.position.x + dx * STEP_METERS, robot.position.y + dy * STEP_METERS)
        axis = "NS" if robot.pose.cardinal in ("N", "S") else "EW"
        window = Aabb.from_bounds(min(start.x, end.x), min(start.y, end.y), max(start.x, end.x), max(start.y, end.y))
        for band_id, box, iid in self.world.bands_near(window.inflated(1.0)):
            if band_id in robot.inside_bands or box.contains_point(start):
                continue
            if not _segment_enters_box(start, end, box):
                continue
            light = self.world.light_state(iid)
            if not (phase_grants(light.phase, axis) and light.remaining > 15.0):
                return True
        return False

    def __call__(self, observation) -> Optional[RobotAction]:
        if self.cursor >= len(self.plan):
            return None
        action, idx = self.plan[self.cursor]
        if action.kind == "move_forward" and self._red_light_ahead():
            self.waits += 1
            if self.waits > self.wait_budget:
                raise OracleBlocked(f"{self.agent_id} exceeded {self.wait_budget} red-light waits")
            action = RobotAction("stay")
            if self.on_submit is not None:
                self.on_submit(observation, action, idx, True)
            return action
        if self.on_submit is not None:
            self.on_submit(observation, action, idx, False)
        self.cursor += 1
        return action


def _segment_enters_box(a: Vec2, b: Vec2, box) -> bool:
    # Axis-aligned motion: sample the far endpoint and the box-edge crossing.
    if box.contains_point(b):
        return True
    steps = 8
    for i in range(1, steps):
        t = i / steps
        p = Vec2(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
        if box.contains_point(p):
            return True
    return False


@dataclass
class StepRecord:
    task_id: str
    step: int
    observation: dict
    instruction: Optional[dict]
    action: dict
    hint_distance: float
    hint_orientation: str
    remaining_actions: list
    full_remaining_actions: list

    def to_dict(self) -> dict:
        return {
            "task": self.task_id,
            "step": self.step,
            "observation": self.observation,
            "instruction": self.instruction,
            "action": self.action,
            "supervision": {
                "hint_distance": self.hint_distance,
                "hint_orientation": self.hint_orientation,
                "remaining_actions": self.remaining_actions,
                "full_remaining_actions": self.full_remaining_actions,
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "StepRecord":
        sup = doc["supervision"]
        return cls(
            doc["task"],
            doc["step"],
            doc["observation"],
            doc["instruction"],
            doc["action"],
            sup["hint_distance"],
            sup["hint_orientation"],
            sup["remaining_actions"],
            sup["full_remaining_actions"],
        )


def annotate_step(robot_position: Vec2, subtask, remaining: list[RobotAction]) -> tuple[float, str, list]:
    """Supervision triple for the active subtask at the current state."""
    capture = Vec2(*subtask.hint.position)
    distance = robot_position.manhattan_to(capture)
    orientation = cardinal_of(subtask.hint.heading)
    return distance, orientation, [a.to_dict() for a in remaining]


def rollout_oracle(
    city_map, task: MMNavTask, agent_id: str = "robot0", record_steps: bool = True
) -> tuple[list[RobotAction], list[StepRecord], EpisodeResult]:
    """Closed-loop oracle run; fails loudly if the episode does not succeed."""
    world = World(city_map, with_traffic=task.difficulty == "hard")
    session = MMNavSession(world, task, agent_id, action_budget=10_000)
    policy = OraclePolicy(world, task, agent_id)
    records: list[StepRecord] = []
    actions_taken: list[RobotAction] = []

    def on_submit(observation, action, subtask_index, is_wait):
        actions_taken.append(action)
        if not record_steps:
            return
        subtask = task.subtasks[subtask_index]
        # Remaining sequences start with the action being taken so a replay from
        # the recorded (pre-action) state reaches the goal. The cursor has not
        # advanced yet, so the planned suffix still includes the current action.
        prefix = [action] if is_wait else []
        remaining = prefix + policy.remaining(subtask_index)
        full = prefix + policy.remaining()
        if [a.kind for a in remaining] == ["evaluate"]:
            remaining = []  # already at the goal pose; nothing left to do
        if [a.kind for a in full] == ["evaluate"]:
            full = []
        robot = world.robot(agent_id)
        distance, orientation, remaining_dicts = annotate_step(robot.position, subtask, remaining)
        records.append(
            StepRecord(
                task.task_id,
                len(records),
                observation.to_dict() if observation is not None else {},
                robot.instruction_payload,
                action.to_dict(),
                distance,
                orientation,
                remaining_dicts,
                [a.to_dict() for a in full],
            )
        )

    policy.on_submit = on_submit
    result = run_episode(world, session, {agent_id: policy}, max_sim_seconds=7200.0)
    if not result.success:
        raise OracleBlocked(f"oracle episode for {task.task_id} ended {session.status}")
    return actions_taken, records, result


def export_dataset(
    out_dir,
    n_maps: int = 100,
    tasks_per_map: int = 2,
    seed: int = 1,
    area_km2: float = 2.0,
    min_path: float = 520.0,
    max_path: float = 900.0,
) -> dict:
    """Generate training maps and oracle trajectories; returns the manifest.

    Writes records.jsonl plus the maps/ and tasks/ the records came from, so the
    dataset is self-contained for the replay validator.
    """
    from .mapio import save_map

    out = Path(out_dir)
    (out / "maps").mkdir(parents=True, exist_ok=True)
    (out / "tasks").mkdir(parents=True, exist_ok=True)
    records_path = out / "records.jsonl"
    trajectories = 0
    steps = 0
    with records_path.open("w", encoding="utf-8") as fh:
        for m in range(n_maps):
            spec = CitySpec(
                seed=stream(seed, "dataset-map", m).getrandbits(63),
                target_area_km2=area_km2,
                catalog_split="train",
            ).without_dynamics()
            city_map = generate_city(spec)
            mhash = map_hash(city_map)
            save_map(city_map, out / "maps" / f"m{m}.json")
            task_rand = stream(seed, "dataset-tasks", m)
            made = 0
            attempt = 0
            while made < tasks_per_map and attempt < tasks_per_map * 4:
                attempt += 1
                try:
                    task = generate_mmnav_task(
                        city_map,
                        task_rand,
                        difficulty="easy",
                        map_hash=mhash,
                        task_id=f"m{m}t{made}",
                        min_path=min_path,
                        max_path=max_path,
                    )
                    _actions, records, _result = rollout_oracle(city_map, task)
                except (NoValidPair, OracleBlocked):
                    continue
                (out / "tasks" / f"{task.task_id}.json").write_text(
                    canonical_json(task.to_dict()) + "\n", encoding="utf-8"
                )
                for record in records:
                    fh.write(canonical_json(record.to_dict()) + "\n")
                steps += len(records)
                trajectories += 1
                made += 1
    manifest = {
        "schema": DATASET_SCHEMA,
        "maps": n_maps,
        "trajectories": trajectories,
        "steps": steps,
        "catalog_split": "train",
        "seed": seed,
    }
    (out / "manifest.json").write_text(canonical_json(manifest) + "\n", encoding="utf-8")
    return manifest


def load_dataset_tasks(dataset_dir) -> dict:
    """task_id -> (CityMap, MMNavTask) for every task in an exported dataset."""
    from .mapio import load_map

    out = Path(dataset_dir)
    maps_by_hash = {}
    for map_path in sorted((out / "maps").glob("*.json")):
        city_map = load_map(map_path)
        maps_by_hash[map_hash(city_map)] = city_map
    tasks = {}
    for task_path in sorted((out / "tasks").glob("*.json")):
        task = MMNavTask.from_dict(json.loads(task_path.read_text(encoding="utf-8")))
        tasks[task.task_id] = (maps_by_hash[task.map_hash], task)
    return tasks


def validate_dataset(dataset_dir) -> dict:
    """Re-check StepRecord invariants for every record in an exported dataset.

    Remaining-action suffixes replay kinematically from the recorded state and
    must land inside the subtask goal tolerance (with the goal landmark visible
    for reach subtasks); stored supervision values are recomputed from state.
    """
    out = Path(dataset_dir)
    tasks = load_dataset_tasks(out)
    checked = 0
    failures = []
    final_pose_ok: dict[tuple, bool] = {}
    with (out / "records.jsonl").open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = StepRecord.from_dict(json.loads(line))
            checked += 1
            if record.task_id not in tasks:
                failures.append((record.task_id, record.step, "unknown task"))
                continue
            city_map, task = tasks[record.task_id]
            payload = record.instruction
            if payload is None or "subtask_index" not in payload:
                failures.append((record.task_id, record.step, "missing instruction payload"))
                continue
            subtask = task.subtasks[payload["subtask_index"]]
            pos = Vec2(*record.observation["position"])
            heading = record.observation["heading"]
            distance, orientation, _ = annotate_step(pos, subtask, [])
            if abs(distance - record.hint_distance) > 1e-6 or orientation != record.hint_orientation:
                failures.append((record.task_id, record.step, "supervision mismatch"))
                continue
            end_pos, end_heading = _kinematic_replay(pos, heading, record.remaining_actions)
            if end_pos.manhattan_to(subtask.goal.position) > subtask.position_tolerance or (
                abs(angle_diff(end_heading, subtask.goal.heading)) > subtask.heading_tolerance
            ):
                failures.append((record.task_id, record.step, "replay missed goal"))
                continue
            if subtask.category == "reach_destination":
                key = (record.task_id, payload["subtask_index"], end_pos.x, end_pos.y, end_heading)
                if key not in final_pose_ok:
                    view = StaticWorldView(city_map)
                    depth, semantic = scan_environment(view, "", end_pos, end_heading, view="level")
                    visible = {lm.building_id for lm in landmarks_from_scan(depth, semantic)}
                    final_pose_ok[key] = subtask.landmark_id in visible
                if not final_pose_ok[key]:
                    failures.append((record.task_id, record.step, "goal landmark not visible"))
    return {"checked": checked, "failures": failures, "tasks": len(tasks)}


def _kinematic_replay(position: Vec2, heading: float, action_dicts: list) -> tuple[Vec2, float]:
    from .geometry import turn_heading

    for doc in action_dicts:
        kind = doc["kind"]
        if kind == "move_forward":
            dx, dy = heading_vector(heading)
            position = Vec2(position.x + dx * STEP_METERS, position.y + dy * STEP_METERS)
        elif kind in ("turn_left", "turn_right"):
            heading = turn_heading(heading, kind)
    return position, heading
