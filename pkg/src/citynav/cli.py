"""Operator CLI: map generation, task generation, simulation, serving, datasets, eval."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import load_config
from .dataset import export_dataset, rollout_oracle, validate_dataset
from .mapio import load_map, map_hash, save_map, serialize_map
from .metrics import aggregate_report
from .procgen import CitySpec, SpecInfeasible, generate_city
from .rng import stream
from .session import (
    MMNavSession,
    MRSSession,
    load_episode_results,
    load_transcript,
    replay_transcript,
    save_action_log,
)
from .tasks.mmnav import MMNavTask, NoValidPair, generate_mmnav_task
from .tasks.mrs import InsufficientLandmarks, MRSTask, generate_mrs_task
from .waypoints import build_waypoint_graph
from .world import World


def _cmd_generate(args) -> int:
    spec = CitySpec(seed=args.seed, target_area_km2=args.area, catalog_split=args.catalog_split)
    if args.easy:
        spec = spec.without_dynamics()
    try:
        city_map = generate_city(spec)
    except SpecInfeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    save_map(city_map, args.out)
    print(f"wrote {args.out} ({len(city_map.roads)} roads, {len(city_map.buildings)} buildings, hash {map_hash(city_map)[:12]})")
    return 0


def _cmd_gen_tasks(args) -> int:
    city_map = load_map(args.map)
    mhash = map_hash(city_map)
    rand = stream(args.seed, "gen-tasks")
    graph = build_waypoint_graph(city_map)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = 0
    for i in range(args.count):
        try:
            if args.benchmark == "mmnav":
                task = generate_mmnav_task(
                    city_map, rand, difficulty=args.difficulty, graph=graph, map_hash=mhash, task_id=f"{args.benchmark}{i}"
                )
            else:
                task = generate_mrs_task(city_map, rand, graph=graph, map_hash=mhash, task_id=f"{args.benchmark}{i}")
        except (NoValidPair, InsufficientLandmarks, ValueError) as exc:
            print(f"error: task {i}: {exc}", file=sys.stderr)
            return 2
        path = out_dir / f"{args.benchmark}_{i}.json"
        path.write_text(json.dumps(task.to_dict(), sort_keys=True) + "\n", encoding="utf-8")
        written += 1
    print(f"wrote {written} {args.benchmark} task(s) to {out_dir}")
    return 0


def _cmd_simulate(args) -> int:
    city_map = load_map(args.map)
    world = World(city_map, with_traffic=True)
    dump = open(args.dump, "w", encoding="utf-8") if args.dump else None
    for _ in range(args.ticks):
        world.tick()
        if dump is not None:
            tick = world.tick_index
            for aid, kind, pos, _r in world.dynamic_discs():
                if kind == "robot":
                    continue
                agent = next(a for a in (world.vehicles + world.pedestrians) if a.id == aid)
                speed = getattr(agent, "speed", getattr(agent, "walk_speed", 0.0))
                dump.write(
                    json.dumps(
                        {"tick": tick, "id": aid, "kind": kind, "x": pos.x, "y": pos.y, "heading": agent.heading, "speed": speed},
                        sort_keys=True,
                    )
                    + "\n"
                )
    if dump is not None:
        dump.close()
    print(
        f"ran {args.ticks} ticks: {len(world.vehicles)} vehicles, {len(world.pedestrians)} pedestrians, "
        f"gate entries {world.gates.entries}, violations {world.gates.violations}, state {world.state_digest()[:12]}"
    )
    return 0


def _cmd_serve(args) -> int:
    from .server import EnvServer

    overrides = {"host": args.host, "port": args.port, "mode": args.mode, "map_path": args.map, "task_path": args.task}
    config = load_config(args.config, overrides)
    try:
        server = EnvServer(config)
    except OSError as exc:
        print(f"error: cannot bind {config.host}:{config.port}: {exc}", file=sys.stderr)
        return 2
    print(f"serving on {config.host}:{config.port} mode={config.mode} map={config.map_path}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


def _cmd_rollout_oracle(args) -> int:
    city_map = load_map(args.map)
    task = MMNavTask.from_dict(json.loads(Path(args.task).read_text(encoding="utf-8")))
    actions, records, result = rollout_oracle(city_map, task)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
    print(f"oracle finished {task.task_id}: {len(actions)} actions, success={result.success}")
    return 0


def _cmd_export_dataset(args) -> int:
    manifest = export_dataset(
        args.out, n_maps=args.maps, tasks_per_map=args.tasks_per_map, seed=args.seed, area_km2=args.area
    )
    print(json.dumps(manifest, sort_keys=True))
    return 0


def _cmd_eval(args) -> int:
    results = []
    for path in args.logs:
        results.extend(load_episode_results(path))
    if not results:
        print("error: no episode results found in the given logs", file=sys.stderr)
        return 2
    report = aggregate_report(results)
    print(report.to_table())
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(report.to_dict(), sort_keys=True) + "\n", encoding="utf-8")
    return 0


def _cmd_validate(args) -> int:
    path = Path(args.path)
    doc_kind = args.kind
    try:
        if doc_kind == "map":
            city_map = load_map(path)
            round_trip = serialize_map(city_map)
            assert round_trip == path.read_text(encoding="utf-8"), "map file is not canonical"
            print(f"map ok: {len(city_map.roads)} roads, hash {map_hash(city_map)[:12]}")
        elif doc_kind == "task":
            doc = json.loads(path.read_text(encoding="utf-8"))
            task = MMNavTask.from_dict(doc) if doc.get("benchmark") == "mmnav" else MRSTask.from_dict(doc)
            print(f"task ok: {task.task_id} ({doc.get('benchmark')})")
        else:
            summary = validate_dataset(path)
            if summary["failures"]:
                print(f"dataset invalid: {len(summary['failures'])} failing records", file=sys.stderr)
                return 2
            print(f"dataset ok: {summary['checked']} records")
    except (ValueError, KeyError, AssertionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def _cmd_replay(args) -> int:
    city_map = load_map(args.map)
    entries = load_transcript(args.transcript)
    task = None
    if args.task:
        doc = json.loads(Path(args.task).read_text(encoding="utf-8"))
        task = MMNavTask.from_dict(doc) if doc.get("benchmark") == "mmnav" else MRSTask.from_dict(doc)
    world = World(city_map, with_traffic=bool(city_map.traffic))
    results = []
    if task is None:
        for entry in entries:
            if entry["agent"] not in world.robots:
                from .geometry import Pose, Vec2

                world.spawn_robot(entry["agent"], Pose(Vec2(0.0, 0.0), 0.0))
    else:
        session = MMNavSession(world, task) if isinstance(task, MMNavTask) else MRSSession(world, task)
    replay_transcript(world, entries)
    if task is not None:
        results = [session.result()]
    if args.log:
        save_action_log(world, args.log, results)
    poses = {rid: [world.robots[rid].position.x, world.robots[rid].position.y, world.robots[rid].heading] for rid in sorted(world.robots)}
    print(json.dumps({"final_poses": poses, "log_records": len(world.action_log)}, sort_keys=True))
    return 0


def _cmd_info(args) -> int:
    config = load_config(args.config, {})
    print(json.dumps({"version": __version__, "defaults": config.to_dict()}, sort_keys=True, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="citynav", description="Headless urban navigation simulation engine")
    parser.add_argument("--version", action="version", version=f"citynav {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a city map from a spec")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--area", type=float, default=2.0, help="target area in km^2")
    p.add_argument("--catalog-split", default="all", choices=["all", "train", "test"])
    p.add_argument("--easy", action="store_true", help="no street elements or traffic")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("gen-tasks", help="generate benchmark tasks for a map")
    p.add_argument("--map", required=True)
    p.add_argument("--benchmark", required=True, choices=["mmnav", "mrs"])
    p.add_argument("--difficulty", default="easy", choices=["easy", "hard"])
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_tasks)

    p = sub.add_parser("simulate", help="run headless background traffic")
    p.add_argument("--map", required=True)
    p.add_argument("--ticks", type=int, default=600)
    p.add_argument("--dump", help="write per-tick agent records to this JSONL file")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("serve", help="serve the environment over TCP")
    p.add_argument("--map")
    p.add_argument("--task")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--mode", choices=["fast", "realtime"])
    p.add_argument("--config")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("rollout-oracle", help="run the oracle planner on a task")
    p.add_argument("--map", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--out", help="write step records to this JSONL file")
    p.set_defaults(func=_cmd_rollout_oracle)

    p = sub.add_parser("export-dataset", help="export oracle trajectories as training data")
    p.add_argument("--out", required=True)
    p.add_argument("--maps", type=int, default=100)
    p.add_argument("--tasks-per-map", type=int, default=2)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--area", type=float, default=2.0)
    p.set_defaults(func=_cmd_export_dataset)

    p = sub.add_parser("eval", help="aggregate episode logs into a metrics report")
    p.add_argument("logs", nargs="+")
    p.add_argument("--json-out")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("validate", help="validate a map file, task file, or dataset directory")
    p.add_argument("kind", choices=["map", "task", "dataset"])
    p.add_argument("path", help="file path (map/task) or exported dataset directory")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("replay", help="replay a recorded action transcript")
    p.add_argument("--map", required=True)
    p.add_argument("--transcript", required=True)
    p.add_argument("--task", help="task file; provides robot spawn poses and enables episode scoring")
    p.add_argument("--log", help="write the episode log here")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("info", help="print engine defaults")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_info)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
