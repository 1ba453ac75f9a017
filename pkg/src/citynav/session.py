"""Episode state machines over a world, a closed-loop runner, and transcript replay.

Sessions subscribe to action completions: they judge evaluate/check actions,
advance instruction payloads, and produce EpisodeResult records for the metrics
module. The engine side never interprets inter-robot message text.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable, Optional

from .agents import RobotAction, observe
from .metrics import EpisodeResult
from .tasks.mmnav import MMNavTask, check_subtask_success
from .tasks.mrs import MRSTask, check_meetup
from .world import BUFFER_TICK_UNITS, UNITS_PER_SECOND, World

MMNAV_ACTION_BUDGET = 500


def _subtask_payload(task: MMNavTask, index: int) -> dict:
    st = task.subtasks[index]
    return {
        "benchmark": "mmnav",
        "subtask_index": index,
        "subtasks_total": len(task.subtasks),
        "category": st.category,
        "instruction": st.instruction,
        "hint": st.hint.to_dict(),
    }


class MMNavSession:
    """Single-robot instruction following; wrong evaluate ends the episode."""

    def __init__(self, world: World, task: MMNavTask, agent_id: str = "robot0", action_budget: int = MMNAV_ACTION_BUDGET):
        self.world = world
        self.task = task
        self.agent_id = agent_id
        self.action_budget = action_budget
        self.status = "running"
        self.subtask_index = 0
        self.completed = 0
        self.steps = 0
        robot = world.spawn_robot(agent_id, task.start)
        self.d0 = robot.position.manhattan_to(task.final_goal.position)
        self._events_start = len(world.safety_events)
        robot.instruction_payload = _subtask_payload(task, 0)
        robot.last_observation = observe(world, agent_id)
        world.completion_listeners.append(self._on_complete)

    def _on_complete(self, agent_id: str, action: RobotAction, outcome: dict) -> Optional[str]:
        if agent_id != self.agent_id or self.status != "running":
            return None
        self.steps += 1
        robot = self.world.robot(agent_id)
        if action.kind == "evaluate":
            subtask = self.task.subtasks[self.subtask_index]
            if check_subtask_success(self.world, agent_id, subtask):
                self.completed += 1
                self.subtask_index += 1
                if self.subtask_index >= len(self.task.subtasks):
                    self.status = "success"
                    robot.instruction_payload = None
                    return "episode_success"
                robot.instruction_payload = _subtask_payload(self.task, self.subtask_index)
                return "subtask_complete"
            self.status = "failed"
            robot.instruction_payload = None
            return "episode_failed"
        if self.steps >= self.action_budget:
            self.status = "failed"
            return "budget_exhausted"
        return None

    def result(self) -> EpisodeResult:
        robot = self.world.robot(self.agent_id)
        events = self.world.safety_events[self._events_start:]
        mine = [e for e in events if e.agent_id == self.agent_id]
        return EpisodeResult(
            task_id=self.task.task_id,
            benchmark="mmnav",
            success=self.status == "success",
            subtasks_total=len(self.task.subtasks),
            subtasks_completed=self.completed,
            d0=self.d0,
            dT=robot.position.manhattan_to(self.task.final_goal.position),
            static_collisions=sum(1 for e in mine if e.kind == "static_collision"),
            dynamic_collisions=sum(1 for e in mine if e.kind == "dynamic_collision"),
            red_light_violations=sum(1 for e in mine if e.kind == "red_light_violation"),
            steps=self.steps,
        )


class MRSSession:
    """Two-robot rendezvous; a successful check_task_complete ends the episode."""

    MAIN = "main"
    FOLLOWER = "follower"

    def __init__(self, world: World, task: MRSTask, step_budget: Optional[int] = None):
        self.world = world
        self.task = task
        self.step_budget = step_budget if step_budget is not None else task.step_budget
        self.status = "running"
        self.steps = 0
        self.met = False
        main = world.spawn_robot(self.MAIN, task.spawn_main)
        follower = world.spawn_robot(self.FOLLOWER, task.spawn_follower)
        self.D0 = main.position.manhattan_to(follower.position)
        main.instruction_payload = {
            "benchmark": "mrs",
            "role": "main",
            "instruction": "Locate the other robot and meet it; confirm with check_task_complete when you see it.",
            "memory": task.memory.to_dict(),
        }
        follower.instruction_payload = {
            "benchmark": "mrs",
            "role": "follower",
            "instruction": "You are new to this city. Communicate and meet the other robot; confirm with check_task_complete.",
        }
        main.last_observation = observe(world, self.MAIN)
        follower.last_observation = observe(world, self.FOLLOWER)
        world.completion_listeners.append(self._on_complete)

    def _other(self, agent_id: str) -> str:
        return self.FOLLOWER if agent_id == self.MAIN else self.MAIN

    def _on_complete(self, agent_id: str, action: RobotAction, outcome: dict) -> Optional[str]:
        if agent_id not in (self.MAIN, self.FOLLOWER) or self.status != "running":
            return None
        self.steps += 1
        if action.kind == "check_task_complete":
            if check_meetup(self.world, agent_id, self._other(agent_id)):
                self.met = True
                self.status = "success"
                return "episode_success"
            if self.steps >= self.step_budget:
                self.status = "failed"
                return "budget_exhausted"
            return "check_failed"
        if self.steps >= self.step_budget:
            self.status = "failed"
            return "budget_exhausted"
        return None

    def result(self) -> EpisodeResult:
        main = self.world.robot(self.MAIN)
        follower = self.world.robot(self.FOLLOWER)
        return EpisodeResult(
            task_id=self.task.task_id,
            benchmark="mrs",
            success=self.status == "success",
            D0=self.D0,
            DT=main.position.manhattan_to(follower.position),
            met=self.met,
            steps=self.steps,
        )


def run_episode(world: World, session, policies: dict[str, Callable], max_sim_seconds: float = 3600.0) -> EpisodeResult:
    """Drive policies through the buffer until the episode resolves.

    A policy is a callable observation -> RobotAction | None (None = stay idle
    this poll). Advancement jumps to the next action completion to keep long
    episodes cheap.
    """
    deadline_units = world.units + round(max_sim_seconds * UNITS_PER_SECOND)
    while session.status == "running" and world.units < deadline_units:
        for agent_id in sorted(policies):
            slot = world.buffer.slots[agent_id]
            if slot.available and slot.pending is None:
                robot = world.robot(agent_id)
                obs = robot.last_observation
                action = policies[agent_id](obs)
                if action is not None:
                    world.submit_action(agent_id, action)
        next_done = None
        for agent_id in sorted(policies):
            ex = world.robot(agent_id).execution
            pending = world.buffer.slots[agent_id].pending
            if ex is not None:
                done = ex.start_units + ex.duration_units
                next_done = done if next_done is None else min(next_done, done)
            elif pending is not None:
                next_done = world.units + BUFFER_TICK_UNITS if next_done is None else next_done
        if next_done is None:
            world.advance_to_units(world.units + BUFFER_TICK_UNITS)
        else:
            target = -(-next_done // BUFFER_TICK_UNITS) * BUFFER_TICK_UNITS
            world.advance_to_units(max(target, world.units + BUFFER_TICK_UNITS))
    return session.result()


# -- transcripts -------------------------------------------------------------------


def transcript_lines(world: World) -> list[str]:
    return [json.dumps(entry, sort_keys=True, separators=(",", ":")) for entry in world.transcript]


def save_transcript(world: World, path) -> None:
    Path(path).write_text("\n".join(transcript_lines(world)) + "\n", encoding="utf-8")


def load_transcript(path) -> list[dict]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [json.loads(line) for line in lines if line.strip()]


_LONGEST_ACTION_UNITS = 600  # 2.0 s translations


def replay_transcript(world: World, entries: list[dict]) -> None:
    """Re-submit a recorded transcript at its recorded sim times; deterministic."""
    for entry in sorted(entries, key=lambda e: e["units"]):
        if entry["units"] > world.units:
            world.advance_to_units(entry["units"])
        world.submit_action(entry["agent"], RobotAction.from_dict(entry["action"]))
    world.advance_to_units(world.units + _LONGEST_ACTION_UNITS + 2 * BUFFER_TICK_UNITS)


def action_log_lines(world: World, results: Optional[list[EpisodeResult]] = None) -> list[str]:
    lines = [json.dumps(rec, sort_keys=True, separators=(",", ":")) for rec in world.action_log]
    for result in results or []:
        lines.append(json.dumps({"episode_result": result.to_dict()}, sort_keys=True, separators=(",", ":")))
    return lines


def save_action_log(world: World, path, results: Optional[list[EpisodeResult]] = None) -> None:
    Path(path).write_text("\n".join(action_log_lines(world, results)) + "\n", encoding="utf-8")


def load_episode_results(path) -> list[EpisodeResult]:
    results = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        if "episode_result" in doc:
            results.append(EpisodeResult.from_dict(doc["episode_result"]))
    return results
