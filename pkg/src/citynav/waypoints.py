"""City-wide waypoint graphs: sidewalk graph for walkers, centerline graph for vehicles.

Sidewalk graph layout per road segment side: a chain of waypoints every 17 m
linking the corner waypoints of the two end intersections, with crosswalk edges
joining corner pairs across each intersection arm. Corner pairs on armless
intersection sides get plain wrap links so sidewalks stay connected around dead
ends and T-junctions.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Optional

from .geometry import Vec2, angle_diff, heading_between

WAYPOINT_INTERVAL = 17.0

# Corner indices: NE, SE, SW, NW.
NE, SE, SW, NW = 0, 1, 2, 3

# Flanking corners and pedestrian travel axis for a crosswalk over an arm
# leaving the intersection in each compass direction.
_ARM_CORNERS = {"N": (NW, NE), "S": (SW, SE), "E": (NE, SE), "W": (NW, SW)}
_ARM_CROSS_AXIS = {"N": "EW", "S": "EW", "E": "NS", "W": "NS"}

DEFAULT_ROUTE_WEIGHTS = {"straight": 0.5, "left": 0.25, "right": 0.25, "reverse": 0.0}


class NoPath(Exception):
    """Goal waypoint is unreachable from the start."""


@dataclass(frozen=True)
class Waypoint:
    id: int
    kind: str  # "road" | "intersection" | "center"
    position: Vec2
    parent: str  # owning road or intersection id
    corner: Optional[int] = None  # 0-3 for intersection corners


@dataclass(frozen=True)
class Gate:
    """Signal gate on an edge: crossing needs green for `travel_axis`.

    `toward` restricts gating to motion into that node (vehicle approach edges);
    None gates both directions (pedestrian crosswalks).
    """

    intersection_id: str
    travel_axis: str
    toward: Optional[int] = None


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    length: float
    kind: str  # "chain" | "crosswalk" | "corner" | "drive"
    gate: Optional[Gate] = None


class WaypointGraph:
    def __init__(self, nodes: list[Waypoint], edges: list[Edge]):
        self.nodes = nodes
        self.edges = edges
        self.adjacency: dict[int, list[tuple[int, Edge]]] = {n.id: [] for n in nodes}
        for e in edges:
            self.adjacency[e.u].append((e.v, e))
            self.adjacency[e.v].append((e.u, e))
        for nid in self.adjacency:
            self.adjacency[nid].sort(key=lambda pair: pair[0])

    def __len__(self) -> int:
        return len(self.nodes)

    def position(self, node_id: int) -> Vec2:
        return self.nodes[node_id].position

    def neighbors(self, node_id: int) -> list[tuple[int, Edge]]:
        return self.adjacency[node_id]

    def nearest_node(self, p: Vec2, kind: Optional[str] = None) -> int:
        best, best_d = None, math.inf
        for n in self.nodes:
            if kind is not None and n.kind != kind:
                continue
            d = n.position.euclidean_to(p)
            if d < best_d:
                best, best_d = n.id, d
        if best is None:
            raise ValueError("graph has no nodes of requested kind")
        return best

    def edge_between(self, u: int, v: int) -> Optional[Edge]:
        for nb, e in self.adjacency[u]:
            if nb == v:
                return e
        return None


def _chain_nodes(
    nodes: list[Waypoint],
    edges: list[Edge],
    start_node: int,
    end_node: int,
    parent: str,
    kind: str,
    interval: float = WAYPOINT_INTERVAL,
) -> None:
    """Append interval-spaced waypoints between two existing nodes.

    The sub-interval remainder edge, if any, lands at the `end_node` side; callers
    pass the end nearest the higher intersection id there.
    """
    a = nodes[start_node].position
    b = nodes[end_node].position
    length = a.euclidean_to(b)
    if length <= interval:
        edges.append(Edge(start_node, end_node, length, kind))
        return
    n_full = int(length // interval)
    if n_full * interval == length:
        n_full -= 1  # exact multiple: the last full interval reaches end_node
    ux, uy = (b.x - a.x) / length, (b.y - a.y) / length
    prev = start_node
    for k in range(1, n_full + 1):
        p = Vec2(a.x + ux * interval * k, a.y + uy * interval * k)
        node = Waypoint(len(nodes), "road" if kind == "chain" else "center", p, parent)
        nodes.append(node)
        edges.append(Edge(prev, node.id, interval, kind))
        prev = node.id
    edges.append(Edge(prev, end_node, length - n_full * interval, kind))


def _arm_direction(road, intersection_id: str) -> str:
    a_id, b_id = road.endpoints
    if road.axis == "NS":
        return "N" if intersection_id == a_id else "S"
    return "E" if intersection_id == a_id else "W"


def build_waypoint_graph(city_map) -> WaypointGraph:
    """Sidewalk waypoint graph over the whole map."""
    nodes: list[Waypoint] = []
    edges: list[Edge] = []
    corner_node: dict[tuple[str, int], int] = {}
    for inter in city_map.intersections:
        for idx, p in enumerate(inter.corner_points):
            node = Waypoint(len(nodes), "intersection", p, inter.id, corner=idx)
            nodes.append(node)
            corner_node[(inter.id, idx)] = node.id

    def inum(iid: str) -> int:
        return int(iid[1:])

    for road in city_map.roads:
        a_id, b_id = road.endpoints
        if road.axis == "NS":
            side_corners = {1: (NE, SE), -1: (NW, SW)}  # (corner at a, corner at b)
        else:
            side_corners = {1: (NE, NW), -1: (SE, SW)}
        for side in (1, -1):
            ca, cb = side_corners[side]
            start = corner_node[(a_id, ca)]
            end = corner_node[(b_id, cb)]
            if inum(a_id) > inum(b_id):
                start, end = end, start
            _chain_nodes(nodes, edges, start, end, road.id, "chain")

    for inter in city_map.intersections:
        arm_dirs = {_arm_direction(city_map.road(sid), inter.id) for sid in inter.arms}
        for direction in "NESW":
            c1, c2 = _ARM_CORNERS[direction]
            u, v = corner_node[(inter.id, c1)], corner_node[(inter.id, c2)]
            length = nodes[u].position.euclidean_to(nodes[v].position)
            if direction in arm_dirs:
                gate = Gate(inter.id, _ARM_CROSS_AXIS[direction]) if inter.signal_id else None
                edges.append(Edge(u, v, length, "crosswalk", gate))
            else:
                edges.append(Edge(u, v, length, "corner"))
    return WaypointGraph(nodes, edges)


def build_centerline_graph(city_map) -> WaypointGraph:
    """Road-centerline graph for vehicles; edges into intersections are gated."""
    nodes: list[Waypoint] = []
    edges: list[Edge] = []
    center_node: dict[str, int] = {}
    for inter in city_map.intersections:
        node = Waypoint(len(nodes), "center", inter.center, inter.id)
        nodes.append(node)
        center_node[inter.id] = node.id

    def inum(iid: str) -> int:
        return int(iid[1:])

    for road in city_map.roads:
        a_id, b_id = road.endpoints
        start, end = center_node[a_id], center_node[b_id]
        if inum(a_id) > inum(b_id):
            start, end = end, start
        _chain_nodes(nodes, edges, start, end, road.id, "drive")
    # Gate each drive edge that touches a signalized intersection center, in the
    # direction of that center only (the stop-line rule).
    signalized = {center_node[i.id]: i.id for i in city_map.intersections if i.signal_id}
    final: list[Edge] = []
    for e in edges:
        gate = None
        a, b = nodes[e.u].position, nodes[e.v].position
        axis = "NS" if abs(b.y - a.y) > abs(b.x - a.x) else "EW"
        for endpoint in (e.u, e.v):
            if endpoint in signalized:
                gate = Gate(signalized[endpoint], axis, toward=endpoint)
                break
        final.append(Edge(e.u, e.v, e.length, e.kind, gate))
    return WaypointGraph(nodes, final)


def astar_path(graph: WaypointGraph, start: int, goal: int) -> list[int]:
    """Shortest waypoint path by summed edge length; Manhattan heuristic.

    All edges are axis-aligned, so the Manhattan distance to the goal never
    overestimates the remaining cost. Ties break toward smaller node ids.
    """
    if start == goal:
        return [start]
    goal_pos = graph.position(goal)

    def h(nid: int) -> float:
        return graph.position(nid).manhattan_to(goal_pos)

    open_heap: list[tuple[float, int]] = [(h(start), start)]
    g_cost: dict[int, float] = {start: 0.0}
    parent: dict[int, int] = {}
    closed: set[int] = set()
    while open_heap:
        f, node = heapq.heappop(open_heap)
        if node in closed:
            continue
        if node == goal:
            path = [node]
            while path[-1] != start:
                path.append(parent[path[-1]])
            path.reverse()
            return path
        closed.add(node)
        base = g_cost[node]
        for nb, edge in graph.neighbors(node):
            if nb in closed:
                continue
            tentative = base + edge.length
            if tentative < g_cost.get(nb, math.inf):
                g_cost[nb] = tentative
                parent[nb] = node
                heapq.heappush(open_heap, (tentative + h(nb), nb))
    raise NoPath(f"no path from {start} to {goal}")


def path_cost(graph: WaypointGraph, path: list[int]) -> float:
    total = 0.0
    for u, v in zip(path, path[1:]):
        edge = graph.edge_between(u, v)
        if edge is None:
            raise ValueError(f"path nodes {u}->{v} share no edge")
        total += edge.length
    return total


def _classify_turn(incoming: float, outgoing: float) -> str:
    d = angle_diff(incoming, outgoing)
    if abs(d) < 45.0:
        return "straight"
    if abs(d) > 135.0:
        return "reverse"
    return "right" if d > 0 else "left"


def sample_route(
    graph: WaypointGraph,
    start: int,
    hops: int,
    rand,
    weights: Optional[dict] = None,
) -> list[int]:
    """Random walk preferring straight travel; never backtracks unless forced."""
    if hops < 0:
        raise ValueError("hops must be >= 0")
    w = dict(DEFAULT_ROUTE_WEIGHTS)
    if weights:
        w.update(weights)
    route = [start]
    prev: Optional[int] = None
    current = start
    for _ in range(hops):
        options = graph.neighbors(current)
        if not options:
            break
        if prev is None:
            nxt = options[rand.randrange(len(options))][0]
        else:
            incoming = heading_between(graph.position(prev), graph.position(current))
            buckets: dict[str, list[int]] = {}
            for nb, _edge in options:
                out = heading_between(graph.position(current), graph.position(nb))
                buckets.setdefault(_classify_turn(incoming, out), []).append(nb)
            choices = {k: v for k, v in buckets.items() if k != "reverse"}
            if not choices:
                choices = buckets  # reversing is the only option
            total = sum(w.get(k, 0.0) for k in choices)
            if total <= 0.0:
                picked = sorted(choices)[rand.randrange(len(choices))]
            else:
                roll = rand.random() * total
                acc = 0.0
                picked = None
                for k in sorted(choices):
                    acc += w.get(k, 0.0)
                    if roll < acc:
                        picked = k
                        break
                if picked is None:
                    picked = sorted(choices)[-1]
            group = choices[picked]
            nxt = group[rand.randrange(len(group))] if len(group) > 1 else group[0]
        prev, current = current, nxt
        route.append(current)
    return route
