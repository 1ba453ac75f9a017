"""2-D geometry primitives: vectors, compass poses, AABBs, a quadtree index, and ray casting.

World coordinates are meters, x east-positive, y north-positive. Headings are
compass degrees: 0 = North, clockwise positive, normalized to [0, 360).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

CARDINALS = ("N", "E", "S", "W")

# Unit vectors for the four cardinal headings (compass convention).
_CARDINAL_VECTORS = {"N": (0.0, 1.0), "E": (1.0, 0.0), "S": (0.0, -1.0), "W": (-1.0, 0.0)}


def normalize_heading(h: float) -> float:
    """Map any angle in degrees onto [0, 360)."""
    h = math.fmod(h, 360.0)
    if h < 0:
        h += 360.0
    return 0.0 if h == 360.0 else h


def cardinal_of(heading: float) -> str:
    """Nearest cardinal (N/E/S/W) for a compass heading in degrees."""
    return CARDINALS[int(round(normalize_heading(heading) / 90.0)) % 4]


def heading_vector(heading: float) -> tuple[float, float]:
    """Unit direction (dx, dy) for a compass heading in degrees."""
    c = normalize_heading(heading)
    exact = _CARDINAL_VECTORS.get(cardinal_of(c)) if c % 90.0 == 0.0 else None
    if exact is not None:
        return exact
    r = math.radians(c)
    return (math.sin(r), math.cos(r))


def heading_between(a: "Vec2", b: "Vec2") -> float:
    """Compass heading in degrees of the direction from a to b."""
    return normalize_heading(math.degrees(math.atan2(b.x - a.x, b.y - a.y)))


def angle_diff(a: float, b: float) -> float:
    """Signed smallest rotation from heading a to heading b, in (-180, 180]."""
    d = math.fmod(b - a, 360.0)
    if d > 180.0:
        d -= 360.0
    elif d <= -180.0:
        d += 360.0
    return d


def turn_heading(h: float, action: str) -> float:
    """Apply a discrete 90-degree turn; action is 'turn_left' or 'turn_right'."""
    if action == "turn_left":
        return normalize_heading(h - 90.0)
    if action == "turn_right":
        return normalize_heading(h + 90.0)
    raise ValueError(f"not a turn action: {action!r}")


@dataclass(frozen=True)
class Vec2:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite Vec2 components: ({self.x}, {self.y})")

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def scaled(self, k: float) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    def manhattan_to(self, other: "Vec2") -> float:
        return abs(self.x - other.x) + abs(self.y - other.y)

    def euclidean_to(self, other: "Vec2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Pose:
    position: Vec2
    heading: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "heading", normalize_heading(self.heading))

    @property
    def cardinal(self) -> str:
        return cardinal_of(self.heading)


@dataclass(frozen=True)
class Aabb:
    min: Vec2
    max: Vec2

    def __post_init__(self) -> None:
        if self.min.x > self.max.x or self.min.y > self.max.y:
            raise ValueError(f"inverted Aabb: {self.min} > {self.max}")

    @classmethod
    def from_bounds(cls, x0: float, y0: float, x1: float, y1: float) -> "Aabb":
        return cls(Vec2(min(x0, x1), min(y0, y1)), Vec2(max(x0, x1), max(y0, y1)))

    @classmethod
    def from_center(cls, center: Vec2, half_w: float, half_h: float) -> "Aabb":
        return cls(Vec2(center.x - half_w, center.y - half_h), Vec2(center.x + half_w, center.y + half_h))

    @property
    def center(self) -> Vec2:
        return Vec2((self.min.x + self.max.x) / 2.0, (self.min.y + self.max.y) / 2.0)

    @property
    def width(self) -> float:
        return self.max.x - self.min.x

    @property
    def height(self) -> float:
        return self.max.y - self.min.y

    @property
    def area(self) -> float:
        return self.width * self.height

    def intersects(self, other: "Aabb") -> bool:
        return not (
            other.min.x > self.max.x
            or other.max.x < self.min.x
            or other.min.y > self.max.y
            or other.max.y < self.min.y
        )

    def overlaps(self, other: "Aabb") -> bool:
        """Strict interior overlap; shared edges do not count."""
        return (
            other.min.x < self.max.x
            and other.max.x > self.min.x
            and other.min.y < self.max.y
            and other.max.y > self.min.y
        )

    def contains_point(self, p: Vec2) -> bool:
        return self.min.x <= p.x <= self.max.x and self.min.y <= p.y <= self.max.y

    def contains_box(self, other: "Aabb") -> bool:
        return (
            self.min.x <= other.min.x
            and self.min.y <= other.min.y
            and self.max.x >= other.max.x
            and self.max.y >= other.max.y
        )

    def union(self, other: "Aabb") -> "Aabb":
        return Aabb(
            Vec2(min(self.min.x, other.min.x), min(self.min.y, other.min.y)),
            Vec2(max(self.max.x, other.max.x), max(self.max.y, other.max.y)),
        )

    def inflated(self, margin: float) -> "Aabb":
        return Aabb(Vec2(self.min.x - margin, self.min.y - margin), Vec2(self.max.x + margin, self.max.y + margin))

    def distance_to_point(self, p: Vec2) -> float:
        dx = max(self.min.x - p.x, 0.0, p.x - self.max.x)
        dy = max(self.min.y - p.y, 0.0, p.y - self.max.y)
        return math.hypot(dx, dy)


class _QuadNode:
    __slots__ = ("region", "depth", "entries", "children")

    def __init__(self, region: Aabb, depth: int):
        self.region = region
        self.depth = depth
        self.entries: list[tuple[object, Aabb]] = []
        self.children: Optional[list["_QuadNode"]] = None

    def split(self) -> None:
        c = self.region.center
        r, d = self.region, self.depth + 1
        self.children = [
            _QuadNode(Aabb(Vec2(r.min.x, c.y), Vec2(c.x, r.max.y)), d),  # NW
            _QuadNode(Aabb(c, r.max), d),  # NE
            _QuadNode(Aabb(r.min, c), d),  # SW
            _QuadNode(Aabb(Vec2(c.x, r.min.y), Vec2(r.max.x, c.y)), d),  # SE
        ]


class QuadTree:
    """Loose quadtree over (entity-id, Aabb) entries.

    Entries live at the deepest node whose region fully contains their box, so a
    query window intersection scan over visited nodes is exhaustive. Query results
    are deterministic for a fixed insertion sequence.
    """

    def __init__(self, region: Aabb, capacity: int = 8, max_depth: int = 10):
        if capacity < 1 or max_depth < 0:
            raise ValueError("capacity must be >= 1 and max_depth >= 0")
        self._root = _QuadNode(region, 0)
        self.capacity = capacity
        self.max_depth = max_depth
        self._count = 0

    def __len__(self) -> int:
        return self._count

    @property
    def region(self) -> Aabb:
        return self._root.region

    def insert(self, entity_id, box: Aabb) -> None:
        node = self._root
        while True:
            if node.children is None:
                if len(node.entries) < self.capacity or node.depth >= self.max_depth:
                    node.entries.append((entity_id, box))
                    self._count += 1
                    return
                node.split()
                stay, node.entries = node.entries, []
                for eid, ebox in stay:
                    self._sink(node, eid, ebox)
                self._count -= len(stay)
            child = self._containing_child(node, box)
            if child is None:
                node.entries.append((entity_id, box))
                self._count += 1
                return
            node = child

    def _sink(self, node: _QuadNode, entity_id, box: Aabb) -> None:
        child = self._containing_child(node, box)
        if child is not None and child.children is None and child.depth < self.max_depth:
            child.entries.append((entity_id, box))
        elif child is not None:
            self.insert_at(child, entity_id, box)
        else:
            node.entries.append((entity_id, box))
        self._count += 1

    def insert_at(self, node: _QuadNode, entity_id, box: Aabb) -> None:
        node.entries.append((entity_id, box))

    @staticmethod
    def _containing_child(node: _QuadNode, box: Aabb):
        if node.children is None:
            return None
        for child in node.children:
            if child.region.contains_box(box):
                return child
        return None

    def query(self, window: Aabb) -> list:
        """Entity ids whose boxes intersect the window (closed-boundary test).

        The root's own entries are scanned unconditionally: boxes that stick out
        of the root region live there, and pruning them by region would lose them.
        """
        out = []
        stack: list[tuple[_QuadNode, bool]] = [(self._root, True)]
        while stack:
            node, is_root = stack.pop()
            if not is_root and not node.region.intersects(window):
                continue
            for eid, box in node.entries:
                if box.intersects(window):
                    out.append(eid)
            if node.children is not None:
                stack.extend((child, False) for child in reversed(node.children))
        return out

    def items(self) -> Iterator[tuple[object, Aabb]]:
        stack = [self._root]
        while stack:
            node = stack.pop()
            yield from node.entries
            if node.children is not None:
                stack.extend(reversed(node.children))


def ray_aabb_distance(origin: Vec2, direction: tuple[float, float], box: Aabb) -> Optional[float]:
    """Distance along the ray to the box, or None if the ray misses it.

    Standard slab test; a ray starting inside the box hits at distance 0.
    """
    dx, dy = direction
    tmin, tmax = 0.0, math.inf
    for o, d, lo, hi in ((origin.x, dx, box.min.x, box.max.x), (origin.y, dy, box.min.y, box.max.y)):
        if d == 0.0:
            if o < lo or o > hi:
                return None
        else:
            t1 = (lo - o) / d
            t2 = (hi - o) / d
            if t1 > t2:
                t1, t2 = t2, t1
            tmin = max(tmin, t1)
            tmax = min(tmax, t2)
            if tmin > tmax:
                return None
    return tmin


def ray_disc_distance(origin: Vec2, direction: tuple[float, float], center: Vec2, radius: float) -> Optional[float]:
    """Distance along the ray to a disc's boundary, or None on a miss."""
    ox, oy = center.x - origin.x, center.y - origin.y
    dx, dy = direction
    proj = ox * dx + oy * dy
    perp_sq = (ox * ox + oy * oy) - proj * proj
    if perp_sq > radius * radius:
        return None
    back = math.sqrt(radius * radius - perp_sq)
    t = proj - back
    if t < 0.0:
        if proj + back < 0.0:
            return None
        t = 0.0  # origin inside the disc
    return t


@dataclass(frozen=True)
class RayHit:
    distance: float
    entity_class: str
    entity_id: object


def raycast(
    entities,
    origin: Vec2,
    heading: float,
    max_range: float,
) -> Optional[RayHit]:
    """Nearest entity hit along a compass-heading ray, or None within max_range.

    `entities` is an iterable of (entity_id, entity_class, Aabb). Ties on distance
    break toward the earlier entity in iteration order.
    """
    if max_range <= 0:
        raise ValueError("max_range must be positive")
    direction = heading_vector(heading)
    best: Optional[RayHit] = None
    for eid, cls, box in entities:
        t = ray_aabb_distance(origin, direction, box)
        if t is not None and t <= max_range and (best is None or t < best.distance):
            best = RayHit(t, cls, eid)
    return best
