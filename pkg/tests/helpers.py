"""Shared test fixtures and independent oracle implementations.

The oracles here (brute-force box scan, Dijkstra, pairwise overlap checks) stay
deliberately separate from the library code paths they verify.
"""

from __future__ import annotations

import heapq
import math

from citynav.geometry import Aabb, Vec2
from citynav.procgen import CityMap, CitySpec, Intersection, RoadSegment


def brute_force_query(entries, window: Aabb) -> set:
    """Reference for quadtree queries: scan every entry for intersection."""
    return {eid for eid, box in entries if box.intersects(window)}


def dijkstra_cost(graph, start: int, goal: int) -> float:
    """Reference shortest-path cost; returns inf when unreachable."""
    dist = {start: 0.0}
    heap = [(0.0, start)]
    done = set()
    while heap:
        d, node = heapq.heappop(heap)
        if node in done:
            continue
        if node == goal:
            return d
        done.add(node)
        for nb, edge in graph.neighbors(node):
            nd = d + edge.length
            if nd < dist.get(nb, math.inf):
                dist[nb] = nd
                heapq.heappush(heap, (nd, nb))
    return math.inf


def pairwise_overlaps(boxes: list) -> int:
    """Count strictly-overlapping pairs by exhaustive comparison."""
    count = 0
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if boxes[i].overlaps(boxes[j]):
                count += 1
    return count


def segments_cross(a1: Vec2, a2: Vec2, b1: Vec2, b2: Vec2) -> bool:
    """True if two axis-aligned segments cross through each other's interiors."""

    def orient(p, q, r):
        v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
        return 0 if v == 0 else (1 if v > 0 else -1)

    o1, o2 = orient(a1, a2, b1), orient(a1, a2, b2)
    o3, o4 = orient(b1, b2, a1), orient(b1, b2, a2)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def single_segment_map(length: float = 100.0, axis: str = "EW", spec: CitySpec | None = None) -> CityMap:
    """A map with one isolated road segment and dead ends at both endpoints."""
    spec = spec or CitySpec(seed=1, element_density=0.0, vehicles=0, pedestrians=0)
    w = spec.corner_offset
    if axis == "EW":
        a, b = Vec2(0.0, 0.0), Vec2(length, 0.0)
    else:
        a, b = Vec2(0.0, 0.0), Vec2(0.0, length)
    road = RoadSegment("r0", ("i0", "i1"), axis, (a, b), spec.road_width, (spec.road_width + spec.sidewalk_width) / 2)

    def corners(c: Vec2):
        return [Vec2(c.x + w, c.y + w), Vec2(c.x + w, c.y - w), Vec2(c.x - w, c.y - w), Vec2(c.x - w, c.y + w)]

    inters = [Intersection("i0", a, ["r0"], corners(a)), Intersection("i1", b, ["r0"], corners(b))]
    return CityMap(spec, [road], inters, [], [], [])


def graph_connected(graph) -> bool:
    if len(graph.nodes) == 0:
        return True
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v, _e in graph.neighbors(u):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(graph.nodes)


def random_lattice_graph(rand, max_nodes: int = 200):
    """Random axis-aligned waypoint graph: jittered grid, random edge subset.

    Edge lengths equal the Euclidean (= Manhattan) distance between endpoints,
    so the A* heuristic stays admissible, as on real maps.
    """
    from citynav.waypoints import Edge, Waypoint, WaypointGraph

    cols = rand.randint(3, 13)
    rows = rand.randint(3, max(3, min(13, max_nodes // cols)))
    xs = [0.0]
    for _ in range(cols - 1):
        xs.append(xs[-1] + rand.uniform(5.0, 40.0))
    ys = [0.0]
    for _ in range(rows - 1):
        ys.append(ys[-1] + rand.uniform(5.0, 40.0))
    nodes = []
    for j in range(rows):
        for i in range(cols):
            nodes.append(Waypoint(len(nodes), "road", Vec2(xs[i], ys[j]), "r0"))
    edges = []

    def nid(i, j):
        return j * cols + i

    for j in range(rows):
        for i in range(cols):
            if i + 1 < cols and rand.random() < 0.75:
                u, v = nid(i, j), nid(i + 1, j)
                edges.append(Edge(u, v, nodes[u].position.euclidean_to(nodes[v].position), "chain"))
            if j + 1 < rows and rand.random() < 0.75:
                u, v = nid(i, j), nid(i, j + 1)
                edges.append(Edge(u, v, nodes[u].position.euclidean_to(nodes[v].position), "chain"))
    return WaypointGraph(nodes, edges)
