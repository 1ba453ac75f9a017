"""Canonical map file schema and round-trip-exact serialization helpers."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from pathlib import Path

from .geometry import Aabb, Vec2
from .procgen import (
    BuildingInstance,
    CityMap,
    CitySpec,
    Intersection,
    RoadSegment,
    StreetElement,
    TrafficSpawn,
)

MAP_SCHEMA = "citynav-map/1"


def canonical_json(obj) -> str:
    """Key-sorted, compact JSON; floats keep their shortest exact repr."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _vec(v: Vec2) -> list:
    return [v.x, v.y]


def _box(b: Aabb) -> list:
    return [b.min.x, b.min.y, b.max.x, b.max.y]


def map_to_dict(city_map: CityMap) -> dict:
    return {
        "schema": MAP_SCHEMA,
        "spec": asdict(city_map.spec),
        "roads": [
            {
                "id": r.id,
                "endpoints": list(r.endpoints),
                "axis": r.axis,
                "centerline": [_vec(r.centerline[0]), _vec(r.centerline[1])],
                "width": r.width,
                "sidewalk_offset": r.sidewalk_offset,
            }
            for r in city_map.roads
        ],
        "intersections": [
            {
                "id": i.id,
                "center": _vec(i.center),
                "arms": list(i.arms),
                "signal": i.signal_id,
            }
            for i in city_map.intersections
        ],
        "buildings": [
            {
                "id": b.id,
                "tag": b.asset_tag,
                "box": _box(b.footprint),
                "door": _vec(b.front_door),
                "road": b.facing_road,
            }
            for b in city_map.buildings
        ],
        "elements": [
            {"id": e.id, "class": e.element_class, "box": _box(e.footprint), "zone": e.zone}
            for e in city_map.elements
        ],
        "traffic": [{"id": t.id, "kind": t.kind, "seed": t.seed} for t in city_map.traffic],
    }


def serialize_map(city_map: CityMap) -> str:
    return canonical_json(map_to_dict(city_map)) + "\n"


def map_hash(city_map: CityMap) -> str:
    return sha256_hex(serialize_map(city_map))


def map_from_dict(doc: dict) -> CityMap:
    if doc.get("schema") != MAP_SCHEMA:
        raise ValueError(f"unsupported map schema: {doc.get('schema')!r}")
    spec = CitySpec(**doc["spec"])
    w = spec.corner_offset
    roads = [
        RoadSegment(
            r["id"],
            tuple(r["endpoints"]),
            r["axis"],
            (Vec2(*r["centerline"][0]), Vec2(*r["centerline"][1])),
            r["width"],
            r["sidewalk_offset"],
        )
        for r in doc["roads"]
    ]
    intersections = []
    for i in doc["intersections"]:
        c = Vec2(*i["center"])
        corners = [Vec2(c.x + w, c.y + w), Vec2(c.x + w, c.y - w), Vec2(c.x - w, c.y - w), Vec2(c.x - w, c.y + w)]
        intersections.append(Intersection(i["id"], c, list(i["arms"]), corners, i["signal"]))
    buildings = [
        BuildingInstance(
            b["id"],
            b["tag"],
            Aabb(Vec2(b["box"][0], b["box"][1]), Vec2(b["box"][2], b["box"][3])),
            Vec2(*b["door"]),
            b["road"],
        )
        for b in doc["buildings"]
    ]
    elements = [
        StreetElement(
            e["id"],
            e["class"],
            Aabb(Vec2(e["box"][0], e["box"][1]), Vec2(e["box"][2], e["box"][3])),
            e["zone"],
        )
        for e in doc["elements"]
    ]
    traffic = [TrafficSpawn(t["id"], t["kind"], t["seed"]) for t in doc["traffic"]]
    return CityMap(spec, roads, intersections, buildings, elements, traffic)


def save_map(city_map: CityMap, path) -> None:
    Path(path).write_text(serialize_map(city_map), encoding="utf-8")


def load_map(path) -> CityMap:
    return map_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
