"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run order goes cheap to expensive; the dataset-scale criterion builds the full
default export and is the long pole (a few minutes).
"""

import math
import random
import sys
import time

import pytest
from statsmodels.stats.proportion import proportion_confint

from citynav.agents import RobotAction
from citynav.dataset import OraclePolicy, export_dataset, validate_dataset
from citynav.geometry import Pose, Vec2, angle_diff, heading_between
from citynav.mapio import serialize_map
from citynav.metrics import distance_progress, subtask_success_rate, task_progress, wilson_interval
from citynav.procgen import CitySpec, generate_city
from citynav.rng import stream
from citynav.session import MMNavSession, MRSSession, run_episode
from citynav.tasks.mmnav import generate_mmnav_task
from citynav.tasks.mrs import generate_mrs_task
from citynav.waypoints import WAYPOINT_INTERVAL, astar_path, build_waypoint_graph, path_cost
from citynav.world import World
from helpers import dijkstra_cost, graph_connected, pairwise_overlaps, random_lattice_graph


_CAPTURE = None


@pytest.fixture(autouse=True)
def _uncaptured_reports(capfd):
    global _CAPTURE
    _CAPTURE = capfd
    yield
    _CAPTURE = None


def report(number: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE {number:02d} {name}: {status}"
    if detail:
        line += f"  ({detail})"
    if _CAPTURE is not None:
        with _CAPTURE.disabled():
            print(line, file=sys.__stdout__, flush=True)
    else:
        print(line, flush=True)
    assert ok, line


def random_city_spec(rand) -> CitySpec:
    return CitySpec(
        seed=rand.getrandbits(63),
        target_area_km2=rand.uniform(0.15, 0.45),
        initial_roads=rand.randint(1, 4),
        max_depth=rand.randint(6, 24),
        branch_probability=rand.uniform(0.0, 0.8),
        element_density=rand.uniform(0.0, 2.5),
        vehicles=rand.randint(0, 12),
        pedestrians=rand.randint(0, 12),
    )


def test_criterion_1_determinism_suite():
    start = time.monotonic()
    rand = random.Random(20260811)
    ok = True
    for _ in range(20):
        spec = random_city_spec(rand)
        if serialize_map(generate_city(spec)) != serialize_map(generate_city(spec)):
            ok = False
            break
    digest_a = digest_b = None
    if ok:
        traffic_spec = CitySpec(seed=424242, target_area_km2=0.3, vehicles=25, pedestrians=25)
        w1 = World(generate_city(traffic_spec), with_traffic=True)
        w1.run_ticks(1000)
        w2 = World(generate_city(traffic_spec), with_traffic=True)
        w2.run_ticks(1000)
        digest_a, digest_b = w1.state_digest(), w2.state_digest()
        ok = digest_a == digest_b
    elapsed = time.monotonic() - start
    report(1, "determinism suite", ok and elapsed < 120.0, f"{elapsed:.1f} s")


def test_criterion_2_waypoint_geometry():
    rand = random.Random(7)
    ok = True
    detail = ""
    for i in range(20):
        spec = random_city_spec(rand)
        city = generate_city(spec)
        graph = build_waypoint_graph(city)
        for e in graph.edges:
            if e.kind == "chain" and not (0.0 < e.length <= WAYPOINT_INTERVAL + 1e-9):
                ok, detail = False, f"map {i}: edge length {e.length}"
                break
        corner_counts = {}
        for n in graph.nodes:
            if n.kind == "intersection":
                corner_counts.setdefault(n.parent, set()).add(n.corner)
        for inter in city.intersections:
            if len(inter.arms) == 4 and corner_counts.get(inter.id) != {0, 1, 2, 3}:
                ok, detail = False, f"map {i}: intersection {inter.id} corners"
        # at most one sub-interval edge per chain: verified per road side line
        for road in city.roads:
            a, b = road.centerline
            for side in (1, -1):
                shorts = 0
                for e in graph.edges:
                    if e.kind != "chain":
                        continue
                    pu, pv = graph.nodes[e.u].position, graph.nodes[e.v].position
                    if road.axis == "NS":
                        line = a.x + side * road.sidewalk_offset
                        on_line = abs(pu.x - line) < 1e-6 and abs(pv.x - line) < 1e-6
                        in_span = a.y - 1e-6 <= min(pu.y, pv.y) and max(pu.y, pv.y) <= b.y + 1e-6
                    else:
                        line = a.y + side * road.sidewalk_offset
                        on_line = abs(pu.y - line) < 1e-6 and abs(pv.y - line) < 1e-6
                        in_span = a.x - 1e-6 <= min(pu.x, pv.x) and max(pu.x, pv.x) <= b.x + 1e-6
                    if on_line and in_span and e.length < WAYPOINT_INTERVAL - 1e-9:
                        shorts += 1
                if shorts > 1:
                    ok, detail = False, f"map {i}: road {road.id} side {side} has {shorts} short edges"
        if not ok:
            break
    report(2, "waypoint geometry (17 m chains, 4 corners)", ok, detail)


def test_criterion_3_astar_matches_dijkstra():
    start = time.monotonic()
    rand = random.Random(99)
    checked = 0
    ok = True
    for _ in range(50):
        graph = random_lattice_graph(rand, max_nodes=200)
        for _ in range(4):
            a, b = rand.randrange(len(graph)), rand.randrange(len(graph))
            expected = dijkstra_cost(graph, a, b)
            if math.isinf(expected):
                continue
            cost = path_cost(graph, astar_path(graph, a, b))
            checked += 1
            if abs(cost - expected) > 1e-9:
                ok = False
                break
        if not ok:
            break
    elapsed = time.monotonic() - start
    report(3, "A* equals Dijkstra on 50 random graphs", ok and elapsed < 10.0, f"{checked} pairs, {elapsed:.1f} s")


def test_criterion_4_signal_compliance():
    spec = CitySpec(seed=11711, target_area_km2=0.5, vehicles=50, pedestrians=100)
    world = World(generate_city(spec), with_traffic=True)
    world.run_ticks(10_000)
    ok = world.gates.violations == 0 and world.gates.entries > 0
    report(4, "signal compliance over 10k ticks", ok, f"{world.gates.entries} gated entries, {world.gates.violations} violations")


def test_criterion_5_geometric_soundness():
    rand = random.Random(555)
    ok = True
    detail = ""
    for i in range(100):
        spec = random_city_spec(rand)
        city = generate_city(spec)
        boxes = [b.footprint for b in city.buildings]
        if pairwise_overlaps(boxes) != 0:
            ok, detail = False, f"map {i}: building overlap"
            break
        corridors = [city.road_corridor(r, include_sidewalk=True) for r in city.roads]
        if any(b.overlaps(c) for b in boxes for c in corridors):
            ok, detail = False, f"map {i}: building-road overlap"
            break
        if not graph_connected(build_waypoint_graph(city)):
            ok, detail = False, f"map {i}: disconnected graph"
            break
        if any(len(inter.arms) > 4 for inter in city.intersections):
            ok, detail = False, f"map {i}: >4 arms"
            break
    report(5, "geometric soundness over 100 maps", ok, detail)


def test_criterion_6_metric_formulas():
    ok = (
        subtask_success_rate(1, 4) == 0.25
        and distance_progress(200, 50) == 0.75
        and distance_progress(100, 150) == 0.0
        and task_progress(576, 0) == 1.0
        and task_progress(576, 700) == 0.0
    )
    rand = random.Random(42)
    worst = 0.0
    for _ in range(100):
        n = rand.randint(1, 400)
        k = rand.randint(0, n)
        low, high = wilson_interval(k, n, 0.95)
        ref_low, ref_high = proportion_confint(k, n, alpha=0.05, method="wilson")
        worst = max(worst, abs(low - ref_low), abs(high - ref_high))
    ok = ok and worst <= 1e-9
    report(6, "metric formulas and Wilson reference", ok, f"max interval deviation {worst:.2e}")


# -- criterion 7 helpers -------------------------------------------------------


class RandomMMNavPolicy:
    KINDS = ("move_forward", "move_backward", "move_left", "move_right", "turn_left", "turn_right", "stay", "evaluate")

    def __init__(self, seed):
        self.rand = random.Random(seed)

    def __call__(self, obs):
        return RobotAction(self.rand.choice(self.KINDS))


class RandomMRSPolicy:
    KINDS = (
        "move_forward",
        "move_backward",
        "move_left",
        "move_right",
        "turn_left",
        "turn_right",
        "stay",
        "check_task_complete",
    )

    def __init__(self, seed):
        self.rand = random.Random(seed)

    def __call__(self, obs):
        return RobotAction(self.rand.choice(self.KINDS))


class MrsMainOracle:
    """Ground-truth localization: walk the A* path to the follower, then close in."""

    def __init__(self, world, graph, start_node, goal_node, follower_id="follower"):
        self.world = world
        self.follower_id = follower_id
        path = astar_path(graph, start_node, goal_node)
        positions = [graph.position(n) for n in path]
        self.actions = self._path_to_actions(positions, world.robot("main").heading)
        self.cursor = 0
        self.closing = False

    @staticmethod
    def _rotations(current, target):
        diff = angle_diff(current, target)
        if abs(diff) < 1e-9:
            return []
        if abs(abs(diff) - 180.0) < 1e-9:
            return [RobotAction("turn_right"), RobotAction("turn_right")]
        return [RobotAction("turn_right" if diff > 0 else "turn_left")]

    def _path_to_actions(self, positions, start_heading):
        actions = []
        heading = start_heading
        pos = positions[0]
        i = 0
        while i < len(positions) - 1:
            # extend a collinear stretch
            j = i + 1
            stretch_heading = heading_between(positions[i], positions[j])
            while j + 1 < len(positions) and heading_between(positions[j], positions[j + 1]) == stretch_heading:
                j += 1
            target = positions[j]
            for rot in self._rotations(heading, stretch_heading):
                actions.append(rot)
            heading = stretch_heading
            from citynav.geometry import heading_vector

            dx, dy = heading_vector(heading)
            along = (target.x - pos.x) * dx + (target.y - pos.y) * dy
            steps = round(along / 5.0)
            actions.extend(RobotAction("move_forward") for _ in range(max(0, steps)))
            pos = Vec2(pos.x + dx * 5.0 * max(0, steps), pos.y + dy * 5.0 * max(0, steps))
            i = j
        return actions

    def __call__(self, obs):
        if self.cursor < len(self.actions):
            action = self.actions[self.cursor]
            self.cursor += 1
            return action
        # Closing loop: face the follower (ground truth) and confirm; walk the
        # residual offset if the check keeps failing.
        me = self.world.robot("main")
        other = self.world.robot(self.follower_id)
        delta = other.position - me.position
        distance = abs(delta.x) + abs(delta.y)
        bearing = heading_between(me.position, other.position)
        facing = float((round(bearing / 90.0) % 4) * 90)
        rotations = self._rotations(me.heading, facing)
        if rotations:
            return rotations[0]
        if distance > 60.0:
            return RobotAction("move_forward")
        return RobotAction("check_task_complete")


def test_criterion_7_closed_loop_benchmarks():
    ok = True
    details = []
    # --- MMNav oracle on 20 easy tasks
    results = []
    for i in range(20):
        spec = CitySpec(seed=9000 + i, target_area_km2=0.5).without_dynamics()
        city = generate_city(spec)
        task = generate_mmnav_task(city, stream(9000, "accept-mmnav", i), difficulty="easy", task_id=f"a7-{i}")
        world = World(city, with_traffic=False)
        session = MMNavSession(world, task)
        result = run_episode(world, session, {"robot0": OraclePolicy(world, task)})
        results.append((task, result))
    sr = sum(r.success for _t, r in results) / len(results)
    ssr = sum(subtask_success_rate(r.subtasks_completed, r.subtasks_total) for _t, r in results) / len(results)
    dp_exact = all(r.dT <= t.subtasks[-1].position_tolerance for t, r in results)
    ok &= sr == 1.0 and ssr == 1.0 and dp_exact
    details.append(f"oracle SR {100*sr:.0f}%, SSR {100*ssr:.0f}%, dT<=tol {dp_exact}")
    # --- random agent on the same tasks: SR must be 0
    random_sr = 0
    for i, (task, _r) in enumerate(results):
        spec = CitySpec(seed=9000 + i, target_area_km2=0.5).without_dynamics()
        city = generate_city(spec)
        world = World(city, with_traffic=False)
        session = MMNavSession(world, task, action_budget=120)
        result = run_episode(world, session, {"robot0": RandomMMNavPolicy(i)}, max_sim_seconds=600.0)
        random_sr += result.success
    ok &= random_sr == 0
    details.append(f"random SR {random_sr}/20")
    # --- MRS oracle pair on 20 tasks
    met_count = 0
    for i in range(20):
        spec = CitySpec(seed=9500 + i, target_area_km2=0.5).without_dynamics()
        city = generate_city(spec)
        graph = build_waypoint_graph(city)
        task = generate_mrs_task(city, stream(9500, "accept-mrs", i), graph=graph, task_id=f"a7m-{i}")
        world = World(city, with_traffic=False)
        session = MRSSession(world, task)
        start_node = graph.nearest_node(task.spawn_main.position)
        goal_node = graph.nearest_node(task.spawn_follower.position)
        main_policy = MrsMainOracle(world, graph, start_node, goal_node)
        follower_policy = lambda obs: None
        result = run_episode(world, session, {"main": main_policy, "follower": follower_policy}, max_sim_seconds=1800.0)
        met_count += result.met
    ok &= met_count == 20
    details.append(f"MRS oracle CSR {met_count}/20")
    # --- random MRS pairs: CSR <= 5%
    random_met = 0
    for i in range(20):
        spec = CitySpec(seed=9500 + i, target_area_km2=0.5).without_dynamics()
        city = generate_city(spec)
        task = generate_mrs_task(city, stream(9500, "accept-mrs", i), task_id=f"a7mr-{i}")
        world = World(city, with_traffic=False)
        session = MRSSession(world, task, step_budget=200)
        result = run_episode(
            world, session, {"main": RandomMRSPolicy(i), "follower": RandomMRSPolicy(1000 + i)}, max_sim_seconds=900.0
        )
        random_met += result.met
    ok &= random_met <= 1  # <= 5% of 20
    details.append(f"random CSR {random_met}/20")
    report(7, "closed-loop benchmark consistency", ok, "; ".join(details))


def test_criterion_8_desk_scale_calibration():
    ok = True
    details = []
    maps = []
    for k in range(4):
        spec = CitySpec(seed=8800 + k).without_dynamics()  # default 2 km^2 config
        city = generate_city(spec)
        maps.append(city)
        area = city.bounds.area / 1e6
        if not 1.6 <= area <= 2.4:
            ok = False
            details.append(f"map {k} area {area:.2f}")
    counts = []
    lengths = []
    for k, city in enumerate(maps):
        graph = build_waypoint_graph(city)
        rand = stream(880, "calib", k)
        for i in range(25):
            task = generate_mmnav_task(city, rand, difficulty="easy", graph=graph, task_id=f"c8-{k}-{i}")
            counts.append(len(task.subtasks))
            lengths.append(task.oracle_length)
    mean_len = sum(lengths) / len(lengths)
    ok &= all(c in (2, 3, 4) for c in counts)
    ok &= 250.0 <= mean_len <= 750.0
    details.append(f"instructions {sorted(set(counts))}, mean path {mean_len:.0f} m")
    spawn_distances = []
    for k, city in enumerate(maps):
        graph = build_waypoint_graph(city)
        rand = stream(881, "calib-mrs", k)
        for i in range(25):
            task = generate_mrs_task(city, rand, graph=graph, task_id=f"c8m-{k}-{i}")
            spawn_distances.append(task.oracle_distance)
    mean_spawn = sum(spawn_distances) / len(spawn_distances)
    ok &= 300.0 <= mean_spawn <= 900.0
    details.append(f"mean MRS spawn distance {mean_spawn:.0f} m")
    report(8, "desk-scale calibration", ok, "; ".join(details))


def test_criterion_9_dataset_scale(tmp_path_factory):
    start = time.monotonic()
    out = tmp_path_factory.mktemp("swr-export")
    manifest = export_dataset(out, n_maps=100, tasks_per_map=2, seed=20260811)
    ok = manifest["steps"] >= 20_000 and manifest["trajectories"] == 200
    detail = f"{manifest['trajectories']} trajectories, {manifest['steps']} steps"
    if ok:
        summary = validate_dataset(out)
        ok = summary["failures"] == [] and summary["checked"] == manifest["steps"]
        detail += f", validated {summary['checked']}"
    if ok:
        from citynav.assets import catalog_tags
        from citynav.mapio import load_map

        test_only = set(catalog_tags("test"))
        for map_path in (out / "maps").glob("*.json"):
            city = load_map(map_path)
            if any(b.asset_tag in test_only for b in city.buildings):
                ok = False
                detail += f"; test tag in {map_path.name}"
                break
    elapsed = time.monotonic() - start
    ok = ok and elapsed < 1800.0
    report(9, "dataset scale (SWR-20k style)", ok, f"{detail}, {elapsed:.0f} s")


def test_criterion_10_throughput():
    spec = CitySpec(seed=606060, target_area_km2=2.0, vehicles=100, pedestrians=200)
    city = generate_city(spec)
    world = World(city, with_traffic=True)
    margin = 30.0
    world.spawn_robot("r0", Pose(Vec2(8.0, margin), 0.0))
    world.spawn_robot("r1", Pose(Vec2(-8.0, -margin), 180.0))
    world.run_ticks(60)  # warm-up
    n = 600
    start = time.perf_counter()
    world.run_ticks(n)
    elapsed = time.perf_counter() - start
    rate = n / elapsed
    report(10, "tick throughput (100 veh + 200 ped + 2 robots)", rate >= 60.0, f"{rate:.0f} ticks/s")
