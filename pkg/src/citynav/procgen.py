"""Seeded four-stage city generation: roads, buildings, street elements, traffic spawns.

Roads grow on a Manhattan lattice from a priority queue keyed by (depth, seeded
tiebreak). Buildings pack segment sides with collision-aware sampling plus greedy
gap filling. Street elements land in contextual zones (curbside sidewalk strip or
the building setback strip). The traffic stage emits spawn records that the
simulator turns into vehicles and pedestrians.

Everything is a pure function of the CitySpec: one spec, one byte-identical map.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from . import rng as rngmod
from .assets import CATALOG, catalog_tags
from .geometry import Aabb, QuadTree, Vec2


class SpecInfeasible(Exception):
    """The requested area cannot host even a single road block."""


DEFAULT_ELEMENT_MIX = {"tree": 0.40, "cone": 0.15, "bench": 0.20, "parked_vehicle": 0.15, "barrier": 0.10}

# Element footprints as (length along road, depth across) and the zone band they
# occupy. Sizes keep the walking line down the sidewalk center clear and leave the
# mandatory >= 1.2 m passage.
ELEMENT_SHAPES = {
    "tree": (1.0, 1.0, "sidewalk"),
    "cone": (0.4, 0.4, "sidewalk"),
    "barrier": (1.5, 0.5, "sidewalk"),
    "bench": (1.8, 0.6, "building-adjacent"),
    "parked_vehicle": (4.5, 1.8, "building-adjacent"),
}

MIN_SIDEWALK_PASSAGE = 1.2


@dataclass(frozen=True)
class CitySpec:
    """Input knobs for city generation; every default is overridable."""

    seed: int = 0
    target_area_km2: float = 2.0
    # road stage
    initial_roads: int = 4
    max_depth: int = 32
    branch_probability: float = 0.35
    segment_length: Optional[float] = None  # None: one block per growth step
    block_size: float = 120.0
    road_width: float = 12.0
    sidewalk_width: float = 4.0
    snap_tolerance: float = 3.0
    min_intersection_spacing: float = 40.0
    # building stage
    setback: float = 2.0
    min_footprint: float = 15.0
    max_footprint: float = 35.0
    fill_gap_threshold: float = 12.0
    building_gap_max: float = 6.0
    catalog_split: str = "all"
    # street element stage
    element_density: float = 1.0  # items per 100 m of sidewalk band
    element_mix: dict = field(default_factory=lambda: dict(DEFAULT_ELEMENT_MIX))
    # traffic stage
    vehicles: int = 20
    pedestrians: int = 40

    def validate(self) -> None:
        if self.target_area_km2 <= 0:
            raise ValueError("target_area_km2 must be positive")
        for name in ("initial_roads", "max_depth", "vehicles", "pedestrians"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.branch_probability <= 1.0:
            raise ValueError("branch_probability must be in [0, 1]")
        if self.initial_roads < 1:
            raise ValueError("initial_roads must be >= 1")
        for name in ("block_size", "road_width", "sidewalk_width", "min_footprint", "max_footprint"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.segment_length is not None and self.segment_length <= 0:
            raise ValueError("segment_length must be positive")
        if self.min_footprint > self.max_footprint:
            raise ValueError("min_footprint must not exceed max_footprint")
        if self.element_density < 0:
            raise ValueError("element_density must be >= 0")
        if any(w < 0 for w in self.element_mix.values()):
            raise ValueError("element_mix weights must be >= 0")
        unknown = set(self.element_mix) - set(ELEMENT_SHAPES)
        if unknown:
            raise ValueError(f"unknown element classes: {sorted(unknown)}")
        if self.catalog_split not in ("all", "train", "test"):
            raise ValueError(f"unknown catalog_split: {self.catalog_split!r}")
        sidewalk_classes = [c for c, (_, d, z) in ELEMENT_SHAPES.items() if z == "sidewalk"]
        worst = max(ELEMENT_SHAPES[c][1] for c in sidewalk_classes)
        if self.sidewalk_width - worst < MIN_SIDEWALK_PASSAGE:
            raise ValueError("sidewalk_width too narrow for accessible element placement")

    @property
    def pitch(self) -> float:
        return self.segment_length if self.segment_length is not None else self.block_size

    @property
    def corner_offset(self) -> float:
        """Distance from an intersection center to a corner waypoint, per axis."""
        return (self.road_width + self.sidewalk_width) / 2.0

    def without_dynamics(self) -> "CitySpec":
        """Easy-difficulty variant: no street elements, no background traffic."""
        return replace(self, element_density=0.0, vehicles=0, pedestrians=0)


@dataclass(frozen=True)
class RoadSegment:
    id: str
    endpoints: tuple[str, str]  # intersection ids, ascending axis order
    axis: str  # "NS" or "EW"
    centerline: tuple[Vec2, Vec2]
    width: float
    sidewalk_offset: float  # centerline to sidewalk center, per side

    @property
    def length(self) -> float:
        a, b = self.centerline
        return abs(b.x - a.x) + abs(b.y - a.y)


@dataclass
class Intersection:
    id: str
    center: Vec2
    arms: list  # incident segment ids
    corner_points: list  # 4 Vec2: NE, SE, SW, NW
    signal_id: Optional[str] = None


@dataclass(frozen=True)
class BuildingInstance:
    id: str
    asset_tag: str
    footprint: Aabb
    front_door: Vec2
    facing_road: str

    @property
    def asset(self):
        return CATALOG[self.asset_tag]


@dataclass(frozen=True)
class StreetElement:
    id: str
    element_class: str
    footprint: Aabb
    zone: str  # "sidewalk" or "building-adjacent"


@dataclass(frozen=True)
class TrafficSpawn:
    id: str
    kind: str  # "vehicle" or "pedestrian"
    seed: int


_DIRS = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}
_LEFT = {"N": "W", "W": "S", "S": "E", "E": "N"}
_RIGHT = {"N": "E", "E": "S", "S": "W", "W": "N"}


class CityMap:
    """Immutable generated world: roads, intersections, buildings, elements, index."""

    def __init__(self, spec, roads, intersections, buildings, elements, traffic):
        self.spec = spec
        self.roads: list[RoadSegment] = roads
        self.intersections: list[Intersection] = intersections
        self.buildings: list[BuildingInstance] = buildings
        self.elements: list[StreetElement] = elements
        self.traffic: list[TrafficSpawn] = traffic
        self._roads_by_id = {r.id: r for r in roads}
        self._intersections_by_id = {i.id: i for i in intersections}
        self._buildings_by_id = {b.id: b for b in buildings}
        self._elements_by_id = {e.id: e for e in elements}
        self.bounds = self._compute_bounds()
        self.index = self._build_index()

    # -- lookups -------------------------------------------------------------

    def road(self, rid: str) -> RoadSegment:
        return self._roads_by_id[rid]

    def intersection(self, iid: str) -> Intersection:
        return self._intersections_by_id[iid]

    def building(self, bid: str) -> BuildingInstance:
        return self._buildings_by_id[bid]

    def element(self, eid: str) -> StreetElement:
        return self._elements_by_id[eid]

    # -- geometry helpers ------------------------------------------------------

    def road_corridor(self, road: RoadSegment, include_sidewalk: bool = False) -> Aabb:
        half = road.width / 2.0 + (self.spec.sidewalk_width if include_sidewalk else 0.0)
        a, b = road.centerline
        if road.axis == "NS":
            return Aabb.from_bounds(a.x - half, a.y, a.x + half, b.y)
        return Aabb.from_bounds(a.x, a.y - half, b.x, a.y + half)

    def sidewalk_band(self, road: RoadSegment, side: int) -> Aabb:
        """Sidewalk strip of a road side; side is +1 (N/E of centerline) or -1."""
        inner = road.width / 2.0
        outer = inner + self.spec.sidewalk_width
        a, b = road.centerline
        if road.axis == "NS":
            x0, x1 = (a.x + inner, a.x + outer) if side > 0 else (a.x - outer, a.x - inner)
            return Aabb.from_bounds(x0, a.y, x1, b.y)
        y0, y1 = (a.y + inner, a.y + outer) if side > 0 else (a.y - outer, a.y - inner)
        return Aabb.from_bounds(a.x, y0, b.x, y1)

    def ground_class(self, p: Vec2) -> str:
        """'driveway' on a road corridor, 'sidewalk' everywhere else walkable."""
        for rid in self.index.query(Aabb.from_center(p, 0.01, 0.01)):
            if rid.startswith("r") and self.road_corridor(self.road(rid)).contains_point(p):
                return "driveway"
        return "sidewalk"

    def static_obstacles(self):
        """(id, class, box) triples for everything that blocks motion and rays."""
        for b in self.buildings:
            yield (b.id, "building", b.footprint)
        for e in self.elements:
            yield (e.id, "tree" if e.element_class == "tree" else "element", e.footprint)

    def entity_class(self, entity_id: str) -> str:
        if entity_id.startswith("b"):
            return "building"
        if entity_id.startswith("e"):
            el = self._elements_by_id[entity_id]
            return "tree" if el.element_class == "tree" else "element"
        if entity_id.startswith("r"):
            return "road"
        raise KeyError(entity_id)

    def _compute_bounds(self) -> Aabb:
        boxes = [self.road_corridor(r, include_sidewalk=True) for r in self.roads]
        boxes += [b.footprint for b in self.buildings]
        boxes += [e.footprint for e in self.elements]
        if not boxes:
            raise SpecInfeasible("empty map")
        acc = boxes[0]
        for box in boxes[1:]:
            acc = acc.union(box)
        return acc

    def _build_index(self) -> QuadTree:
        tree = QuadTree(self.bounds.inflated(1.0))
        for r in self.roads:
            tree.insert(r.id, self.road_corridor(r))
        for b in self.buildings:
            tree.insert(b.id, b.footprint)
        for e in self.elements:
            tree.insert(e.id, e.footprint)
        return tree


# -- stage 1: roads ------------------------------------------------------------


def _point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> float:
    vx, vy = b.x - a.x, b.y - a.y
    wx, wy = p.x - a.x, p.y - a.y
    seg_len_sq = vx * vx + vy * vy
    t = 0.0 if seg_len_sq == 0 else max(0.0, min(1.0, (wx * vx + wy * vy) / seg_len_sq))
    return math.hypot(wx - t * vx, wy - t * vy)


class _RoadBuilder:
    def __init__(self, spec: CitySpec, rand):
        self.spec = spec
        self.rand = rand
        self.pitch = spec.pitch
        side = math.sqrt(spec.target_area_km2 * 1e6)
        if side < spec.block_size:
            raise SpecInfeasible(
                f"target area {spec.target_area_km2} km2 cannot host one {spec.block_size} m block"
            )
        self.half_extent = max(self.pitch, round(side / (2.0 * self.pitch)) * self.pitch)
        self.nodes: dict[tuple[int, int], str] = {}
        self.node_pos: dict[str, Vec2] = {}
        self.edges: set[tuple[tuple[int, int], tuple[int, int]]] = set()
        self.segments: list[tuple[str, tuple[int, int], tuple[int, int]]] = []
        self.arms: dict[str, list] = {}
        self._heap: list = []
        self._push_seq = 0

    def _node_at(self, cell: tuple[int, int]) -> str:
        if cell in self.nodes:
            return self.nodes[cell]
        nid = f"i{len(self.nodes)}"
        self.nodes[cell] = nid
        self.node_pos[nid] = Vec2(cell[0] * self.pitch, cell[1] * self.pitch)
        self.arms[nid] = []
        return nid

    def _snap(self, cell: tuple[int, int]) -> tuple[int, int]:
        # Road-end attachment: adopt an existing intersection within tolerance.
        if cell in self.nodes:
            return cell
        target = Vec2(cell[0] * self.pitch, cell[1] * self.pitch)
        best, best_d = None, self.spec.snap_tolerance
        for other, nid in self.nodes.items():
            d = self.node_pos[nid].euclidean_to(target)
            if d <= best_d:
                best, best_d = other, d
        return best if best is not None else cell

    def _spacing_ok(self, a_cell, b_cell) -> bool:
        # Intersection checking: reject segments whose midline passes too close
        # to an intersection that is not one of its own endpoints.
        a = Vec2(a_cell[0] * self.pitch, a_cell[1] * self.pitch)
        b = Vec2(b_cell[0] * self.pitch, b_cell[1] * self.pitch)
        for cell, nid in self.nodes.items():
            if cell == a_cell or cell == b_cell:
                continue
            if _point_segment_distance(self.node_pos[nid], a, b) < self.spec.min_intersection_spacing:
                return False
        return True

    def _push(self, depth: int, cell: tuple[int, int], direction: str) -> None:
        if depth > self.spec.max_depth:
            return
        self._push_seq += 1
        heapq.heappush(self._heap, (depth, self.rand.getrandbits(32), self._push_seq, cell, direction))

    def _try_segment(self, from_cell: tuple[int, int], direction: str) -> Optional[tuple[int, int]]:
        dx, dy = _DIRS[direction]
        raw_target = (from_cell[0] + dx, from_cell[1] + dy)
        target = self._snap(raw_target)
        tx, ty = target[0] * self.pitch, target[1] * self.pitch
        if abs(tx) > self.half_extent or abs(ty) > self.half_extent:
            return None
        edge = tuple(sorted((from_cell, target)))
        if from_cell == target or edge in self.edges:
            return None
        if not self._spacing_ok(from_cell, target):
            return None
        existed = target in self.nodes
        a_id = self.nodes[from_cell]
        if len(self.arms[a_id]) >= 4:
            return None
        if existed and len(self.arms[self.nodes[target]]) >= 4:
            return None
        b_id = self._node_at(target)
        sid = f"r{len(self.segments)}"
        self.segments.append((sid, from_cell, target))
        self.edges.add(edge)
        self.arms[a_id].append(sid)
        self.arms[b_id].append(sid)
        return None if existed else target

    def build(self):
        spec = self.spec
        origin = (0, 0)
        self._node_at(origin)
        directions = list("NESW")
        self.rand.shuffle(directions)
        frontier: list[tuple[tuple[int, int], str]] = []
        placed = 0
        arm_ends = {}
        for k in range(spec.initial_roads):
            d = directions[k % 4]
            start = arm_ends.get(d, origin)
            new_end = self._try_segment(start, d)
            if new_end is not None:
                arm_ends[d] = new_end
                frontier.append((new_end, d))
                placed += 1
        if placed == 0:
            raise SpecInfeasible("no initial road could be placed inside the target area")
        for cell, d in frontier:
            self._expand(cell, d, depth=1)
        while self._heap:
            _depth, _tie, _seq, cell, direction = heapq.heappop(self._heap)
            new_end = self._try_segment(cell, direction)
            if new_end is not None:
                self._expand(new_end, direction, depth=_depth + 1)
        return self._finish()

    def _expand(self, cell: tuple[int, int], direction: str, depth: int) -> None:
        # Straight growth is always proposed; side branches each roll the dice.
        self._push(depth, cell, direction)
        if self.rand.random() < self.spec.branch_probability:
            self._push(depth, cell, _LEFT[direction])
        if self.rand.random() < self.spec.branch_probability:
            self._push(depth, cell, _RIGHT[direction])

    def _finish(self):
        spec = self.spec
        w = spec.corner_offset
        intersections = []
        for cell, nid in self.nodes.items():
            c = self.node_pos[nid]
            corners = [
                Vec2(c.x + w, c.y + w),  # NE
                Vec2(c.x + w, c.y - w),  # SE
                Vec2(c.x - w, c.y - w),  # SW
                Vec2(c.x - w, c.y + w),  # NW
            ]
            intersections.append(Intersection(nid, c, list(self.arms[nid]), corners))
        roads = []
        for sid, a_cell, b_cell in self.segments:
            a_id, b_id = self.nodes[a_cell], self.nodes[b_cell]
            a, b = self.node_pos[a_id], self.node_pos[b_id]
            axis = "NS" if a_cell[0] == b_cell[0] else "EW"
            if (axis == "NS" and a.y > b.y) or (axis == "EW" and a.x > b.x):
                a, b, a_id, b_id = b, a, b_id, a_id
            roads.append(
                RoadSegment(sid, (a_id, b_id), axis, (a, b), spec.road_width, (spec.road_width + spec.sidewalk_width) / 2.0)
            )
        # Signals at 3- and 4-way intersections, numbered in id order.
        n_signals = 0
        for inter in sorted(intersections, key=lambda i: int(i.id[1:])):
            if len(inter.arms) >= 3:
                inter.signal_id = f"s{n_signals}"
                n_signals += 1
        intersections.sort(key=lambda i: int(i.id[1:]))
        return roads, intersections


def generate_roads(spec: CitySpec, rand=None):
    """Grow the axis-aligned road network; returns (roads, intersections)."""
    spec.validate()
    if rand is None:
        rand = rngmod.stream(spec.seed, "roads")
    return _RoadBuilder(spec, rand).build()


# -- stage 2: buildings ----------------------------------------------------------


def _perpendicular_arm(inter: Intersection, axis: str, roads_by_id) -> bool:
    return any(roads_by_id[sid].axis != axis for sid in inter.arms)


def _end_clearance(inter: Intersection, axis: str, spec: CitySpec, roads_by_id) -> float:
    # Keep footprints out of the crossing road's corridor at intersections.
    if _perpendicular_arm(inter, axis, roads_by_id):
        return spec.road_width / 2.0 + spec.sidewalk_width
    return 0.0


def _side_span(road: RoadSegment, spec: CitySpec, inters_by_id, roads_by_id) -> tuple[float, float]:
    # Usable run of a segment side: crossing-road clearance plus a setback
    # margin at each end.
    a_id, b_id = road.endpoints
    a, b = road.centerline
    lo = (a.y if road.axis == "NS" else a.x) + _end_clearance(inters_by_id[a_id], road.axis, spec, roads_by_id) + spec.setback
    hi = (b.y if road.axis == "NS" else b.x) - _end_clearance(inters_by_id[b_id], road.axis, spec, roads_by_id) - spec.setback
    return lo, hi


def _strip_box(road: RoadSegment, side: int, lo: float, hi: float, inner: float, outer: float) -> Aabb:
    a, _ = road.centerline
    if road.axis == "NS":
        x0, x1 = (a.x + inner, a.x + outer) if side > 0 else (a.x - outer, a.x - inner)
        return Aabb.from_bounds(x0, lo, x1, hi)
    y0, y1 = (a.y + inner, a.y + outer) if side > 0 else (a.y - outer, a.y - inner)
    return Aabb.from_bounds(lo, y0, hi, y1)


def place_buildings(roads, intersections, spec: CitySpec, rand=None):
    """Pack building footprints along both sides of every segment."""
    if rand is None:
        rand = rngmod.stream(spec.seed, "buildings")
    roads_by_id = {r.id: r for r in roads}
    inters_by_id = {i.id: i for i in intersections}
    half_corridor = spec.road_width / 2.0 + spec.sidewalk_width

    def corridor_box(r: RoadSegment) -> Aabb:
        a, b = r.centerline
        if r.axis == "NS":
            return Aabb.from_bounds(a.x - half_corridor, a.y, a.x + half_corridor, b.y)
        return Aabb.from_bounds(a.x, a.y - half_corridor, b.x, a.y + half_corridor)

    boxes: dict[str, Aabb] = {r.id: corridor_box(r) for r in roads}
    extent = max((max(abs(p.x), abs(p.y)) for r in roads for p in r.centerline), default=spec.block_size)
    pad = extent + 2.0 * spec.max_footprint + half_corridor + spec.setback
    index = QuadTree(Aabb.from_bounds(-pad, -pad, pad, pad))
    for rid, box in boxes.items():
        index.insert(rid, box)

    tags = catalog_tags(spec.catalog_split)
    front = half_corridor + spec.setback
    door_offset = spec.road_width / 2.0 + spec.sidewalk_width / 2.0
    buildings: list[BuildingInstance] = []

    def try_place(road: RoadSegment, side: int, lo: float, width: float) -> bool:
        depth = rand.uniform(spec.min_footprint, spec.max_footprint)
        box = _strip_box(road, side, lo, lo + width, front, front + depth)
        if any(boxes[hid].overlaps(box) for hid in index.query(box)):
            return False
        bid = f"b{len(buildings)}"
        a, _ = road.centerline
        mid = lo + width / 2.0
        if road.axis == "NS":
            door = Vec2(a.x + side * door_offset, mid)
        else:
            door = Vec2(mid, a.y + side * door_offset)
        buildings.append(BuildingInstance(bid, rand.choice(tags), box, door, road.id))
        boxes[bid] = box
        index.insert(bid, box)
        return True

    for road in sorted(roads, key=lambda r: int(r.id[1:])):
        lo_all, hi_all = _side_span(road, spec, inters_by_id, roads_by_id)
        for side in (1, -1):
            if hi_all - lo_all < spec.min_footprint:
                continue
            cursor = lo_all
            while cursor + spec.min_footprint <= hi_all:
                width = rand.uniform(spec.min_footprint, spec.max_footprint)
                width = min(width, hi_all - cursor)
                if try_place(road, side, cursor, width):
                    cursor += width + rand.uniform(0.0, spec.building_gap_max)
                else:
                    cursor += max(2.5, width / 2.0)
            # Greedy fill of the tail gap near the road end.
            tail = hi_all - cursor
            if tail >= spec.fill_gap_threshold:
                width = min(spec.max_footprint, tail)
                if width >= spec.min_footprint:
                    try_place(road, side, hi_all - width, width)
    return buildings


# -- stage 3: street elements -----------------------------------------------------


def place_street_elements(roads, intersections, buildings, spec: CitySpec, rand=None):
    """Scatter contextual street furniture along sidewalk bands.

    Per-class counts are density x total sidewalk length (floored); each item
    lands on a band position drawn uniformly over the combined band length.
    """
    if rand is None:
        rand = rngmod.stream(spec.seed, "elements")
    roads_by_id = {r.id: r for r in roads}
    inters_by_id = {i.id: i for i in intersections}
    total_mix = sum(spec.element_mix.values())
    if spec.element_density <= 0 or total_mix <= 0:
        return []
    bands: list[tuple[RoadSegment, int, float, float]] = []
    total_length = 0.0
    for road in sorted(roads, key=lambda r: int(r.id[1:])):
        lo, hi = _side_span(road, spec, inters_by_id, roads_by_id)
        if hi - lo <= 0:
            continue
        for side in (1, -1):
            bands.append((road, side, lo, hi))
            total_length += hi - lo
    if not bands:
        return []
    densities = {
        cls: spec.element_density * w / total_mix for cls, w in sorted(spec.element_mix.items()) if w > 0
    }
    building_boxes = [b.footprint for b in buildings]
    elements: list[StreetElement] = []
    inner_curb = spec.road_width / 2.0
    strip_inner = inner_curb + spec.sidewalk_width
    for cls, density in densities.items():
        count = int(density * total_length / 100.0)
        length, depth, zone = ELEMENT_SHAPES[cls]
        if zone == "building-adjacent" and depth > spec.setback:
            continue  # no room in the setback strip
        for _ in range(count):
            offset = rand.uniform(0.0, total_length)
            for road, side, lo, hi in bands:
                band_len = hi - lo
                if offset <= band_len:
                    break
                offset -= band_len
            pos = min(lo + offset, max(lo, hi - length))
            if zone == "sidewalk":
                box = _strip_box(road, side, pos, pos + length, inner_curb, inner_curb + depth)
            else:
                box = _strip_box(road, side, pos, pos + length, strip_inner, strip_inner + depth)
            if any(box.overlaps(b) for b in building_boxes):
                continue
            elements.append(StreetElement(f"e{len(elements)}", cls, box, zone))
    return elements


# -- stage 4: traffic population ----------------------------------------------------


def populate_traffic(spec: CitySpec, rand=None):
    """Spawn records for background agents; routes are sampled by the simulator."""
    if rand is None:
        rand = rngmod.stream(spec.seed, "traffic")
    spawns = []
    for i in range(spec.vehicles):
        spawns.append(TrafficSpawn(f"v{i}", "vehicle", rand.getrandbits(63)))
    for i in range(spec.pedestrians):
        spawns.append(TrafficSpawn(f"p{i}", "pedestrian", rand.getrandbits(63)))
    return spawns


def generate_city(spec: CitySpec) -> CityMap:
    """Run all four stages in order and assemble the indexed map."""
    spec.validate()
    roads, intersections = generate_roads(spec, rngmod.stream(spec.seed, "roads"))
    buildings = place_buildings(roads, intersections, spec, rngmod.stream(spec.seed, "buildings"))
    elements = place_street_elements(roads, intersections, buildings, spec, rngmod.stream(spec.seed, "elements"))
    traffic = populate_traffic(spec, rngmod.stream(spec.seed, "traffic"))
    return CityMap(spec, roads, intersections, buildings, elements, traffic)
