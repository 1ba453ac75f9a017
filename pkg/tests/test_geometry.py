import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citynav.geometry import (
    Aabb,
    Pose,
    QuadTree,
    RayHit,
    Vec2,
    angle_diff,
    cardinal_of,
    heading_between,
    heading_vector,
    normalize_heading,
    ray_disc_distance,
    raycast,
    turn_heading,
)
from helpers import brute_force_query


def boxes_strategy():
    coord = st.floats(min_value=-500, max_value=500, allow_nan=False, allow_infinity=False)
    size = st.floats(min_value=0.1, max_value=80, allow_nan=False, allow_infinity=False)
    return st.tuples(coord, coord, size, size).map(lambda t: Aabb.from_bounds(t[0], t[1], t[0] + t[2], t[1] + t[3]))


class TestVecPose:
    def test_vec_rejects_nan(self):
        with pytest.raises(ValueError):
            Vec2(float("nan"), 0.0)

    def test_manhattan(self):
        assert Vec2(1, 2).manhattan_to(Vec2(4, -2)) == 7

    def test_pose_normalizes_heading(self):
        assert Pose(Vec2(0, 0), 450.0).heading == 90.0

    @pytest.mark.parametrize(
        "heading,card", [(0, "N"), (44, "N"), (46, "E"), (90, "E"), (180, "S"), (270, "W"), (359, "N")]
    )
    def test_cardinals(self, heading, card):
        assert cardinal_of(heading) == card

    def test_heading_vectors_exact_on_cardinals(self):
        assert heading_vector(0.0) == (0.0, 1.0)
        assert heading_vector(90.0) == (1.0, 0.0)
        assert heading_vector(180.0) == (0.0, -1.0)
        assert heading_vector(270.0) == (-1.0, 0.0)

    def test_heading_between(self):
        assert heading_between(Vec2(0, 0), Vec2(0, 10)) == 0.0
        assert heading_between(Vec2(0, 0), Vec2(10, 0)) == 90.0


class TestTurnHeading:
    def test_right_from_north(self):
        assert turn_heading(0.0, "turn_right") == 90.0

    def test_left_from_north_wraps(self):
        assert turn_heading(0.0, "turn_left") == 270.0

    def test_right_from_west_wraps(self):
        assert turn_heading(270.0, "turn_right") == 0.0

    @given(st.floats(min_value=0, max_value=359.999, allow_nan=False))
    def test_opposite_turns_cancel(self, h):
        h = normalize_heading(h)
        assert math.isclose(turn_heading(turn_heading(h, "turn_left"), "turn_right"), h, abs_tol=1e-9)
        assert math.isclose(turn_heading(turn_heading(h, "turn_right"), "turn_left"), h, abs_tol=1e-9)


class TestAngleDiff:
    def test_signed_range(self):
        assert angle_diff(0, 90) == 90
        assert angle_diff(90, 0) == -90
        assert angle_diff(0, 180) == 180
        assert angle_diff(350, 10) == 20


class TestQuadTree:
    def test_empty_query(self):
        tree = QuadTree(Aabb.from_bounds(-100, -100, 100, 100))
        assert tree.query(Aabb.from_bounds(-50, -50, 50, 50)) == []

    def test_single_entry_self_window(self):
        tree = QuadTree(Aabb.from_bounds(-100, -100, 100, 100))
        box = Aabb.from_bounds(1, 1, 5, 5)
        tree.insert("a", box)
        assert tree.query(box) == ["a"]

    def test_matches_brute_force_on_random_boxes(self):
        rand = random.Random(7)
        region = Aabb.from_bounds(-520, -520, 520, 520)
        tree = QuadTree(region)
        entries = []
        for i in range(1000):
            x, y = rand.uniform(-500, 500), rand.uniform(-500, 500)
            w, h = rand.uniform(0.1, 60), rand.uniform(0.1, 60)
            box = Aabb.from_bounds(x, y, x + w, y + h)
            entries.append((i, box))
            tree.insert(i, box)
        for _ in range(100):
            x, y = rand.uniform(-520, 440), rand.uniform(-520, 440)
            window = Aabb.from_bounds(x, y, x + rand.uniform(1, 200), y + rand.uniform(1, 200))
            assert set(tree.query(window)) == brute_force_query(entries, window)

    def test_entries_outside_root_region_still_found(self):
        tree = QuadTree(Aabb.from_bounds(0, 0, 10, 10))
        outside = Aabb.from_bounds(50, 50, 60, 60)
        straddling = Aabb.from_bounds(-5, -5, 5, 5)
        tree.insert("out", outside)
        tree.insert("straddle", straddling)
        assert set(tree.query(Aabb.from_bounds(55, 55, 58, 58))) == {"out"}
        assert set(tree.query(Aabb.from_bounds(-4, -4, -1, -1))) == {"straddle"}

    def test_deterministic_order_for_fixed_insertions(self):
        def build():
            tree = QuadTree(Aabb.from_bounds(0, 0, 100, 100))
            for i in range(50):
                tree.insert(i, Aabb.from_bounds(i, i, i + 3, i + 3))
            return tree.query(Aabb.from_bounds(0, 0, 100, 100))

        assert build() == build()

    @settings(max_examples=40, deadline=None)
    @given(st.lists(boxes_strategy(), min_size=0, max_size=60), boxes_strategy())
    def test_query_equals_scan_property(self, boxes, window):
        tree = QuadTree(Aabb.from_bounds(-700, -700, 700, 700))
        entries = list(enumerate(boxes))
        for i, box in entries:
            tree.insert(i, box)
        assert set(tree.query(window)) == brute_force_query(entries, window)


class TestRaycast:
    def test_empty_world_misses(self):
        assert raycast([], Vec2(0, 0), 0.0, 100.0) is None

    def test_box_due_north(self):
        # 10x10 box centered 20 m north: near face at y=15.
        box = Aabb.from_center(Vec2(0, 20), 5, 5)
        hit = raycast([("b1", "building", box)], Vec2(0, 0), 0.0, 100.0)
        assert hit == RayHit(15.0, "building", "b1")

    def test_nearest_of_two_collinear(self):
        near = Aabb.from_center(Vec2(0, 15), 2, 2)
        far = Aabb.from_center(Vec2(0, 30), 2, 2)
        hit = raycast([("far", "building", far), ("near", "building", near)], Vec2(0, 0), 0.0, 100.0)
        assert hit.entity_id == "near"
        assert hit.distance == 13.0

    def test_range_limit(self):
        box = Aabb.from_center(Vec2(0, 20), 1, 1)
        assert raycast([("b", "building", box)], Vec2(0, 0), 0.0, 10.0) is None

    def test_shrinking_range_keeps_hit(self):
        box = Aabb.from_center(Vec2(0, 20), 5, 5)
        entities = [("b", "building", box)]
        long_hit = raycast(entities, Vec2(0, 0), 0.0, 200.0)
        short_hit = raycast(entities, Vec2(0, 0), 0.0, long_hit.distance + 1.0)
        assert long_hit == short_hit

    def test_rejects_nonpositive_range(self):
        with pytest.raises(ValueError):
            raycast([], Vec2(0, 0), 0.0, 0.0)


class TestRayDisc:
    def test_head_on(self):
        assert ray_disc_distance(Vec2(0, 0), (0.0, 1.0), Vec2(0, 10), 2.0) == pytest.approx(8.0)

    def test_miss_lateral(self):
        assert ray_disc_distance(Vec2(0, 0), (0.0, 1.0), Vec2(5, 10), 2.0) is None

    def test_behind_misses(self):
        assert ray_disc_distance(Vec2(0, 0), (0.0, 1.0), Vec2(0, -10), 2.0) is None

    def test_origin_inside(self):
        assert ray_disc_distance(Vec2(0, 0), (0.0, 1.0), Vec2(0, 0.5), 2.0) == 0.0
