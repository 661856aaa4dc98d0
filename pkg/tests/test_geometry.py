import io
import unittest

import numpy as np

from coordination_milp.support.geometry import (
    CollisionPolygon,
    CollisionSamples,
    ConflictKind,
    Direction,
    GeometryError,
    PathGeometry,
    UnsupportedOperationError,
    arc_pose,
    bounding_polygon,
    compute_collision_set,
    conflicts_between,
    contains,
    decompose,
    polygon_from_box,
    polygon_from_extents,
    robot_on_path,
    split_components,
    write_samples_csv,
)
from tests import abstract_robot

STRAIGHT = PathGeometry(((0.0, 0.0), (30.0, 0.0)))


def corners(polygon):
    return sorted((round(x, 9), round(y, 9)) for x, y in polygon.exterior.coords[:-1])


class ArcPoseTestCase(unittest.TestCase):
    def test_straight(self):
        pose = arc_pose(STRAIGHT, 7)
        self.assertEqual(sorted([(2, -1), (7, -1), (7, 1), (2, 1)]), corners(pose))

    def test_entry(self):
        pose = arc_pose(STRAIGHT, 0)
        xs = [x for x, _ in pose.exterior.coords]
        self.assertAlmostEqual(0, max(xs))
        self.assertAlmostEqual(-5, min(xs))

    def test_corner_area(self):
        path = PathGeometry(((0.0, 0.0), (10.0, 0.0), (10.0, 10.0)))
        for s in (10.0, 12.5, 15.0):
            self.assertAlmostEqual(10.0, arc_pose(path, s).area, delta=1e-9)

    def test_out_of_range(self):
        with self.assertRaises(GeometryError):
            arc_pose(STRAIGHT, -1)
        with self.assertRaises(GeometryError):
            arc_pose(STRAIGHT, STRAIGHT.s_out + 0.1)

    def test_s_out(self):
        self.assertAlmostEqual(35, STRAIGHT.s_out)

    def test_too_short(self):
        with self.assertRaises(GeometryError):
            PathGeometry(((0.0, 0.0), (3.0, 0.0))).validate()
        with self.assertRaises(GeometryError):
            PathGeometry(((0.0, 0.0), (0.0, 0.0), (10.0, 0.0))).validate()


class CollisionSetTestCase(unittest.TestCase):
    def test_parallel(self):
        a = robot_on_path("a", [(0, 0), (30, 0)])
        b = robot_on_path("b", [(0, 10), (30, 10)])
        samples = compute_collision_set(a, b, 0.5)
        self.assertEqual(0, samples.count)
        self.assertEqual([], split_components(samples))

    def test_orthogonal(self):
        a = robot_on_path("a", [(0, 0), (30, 0)])
        b = robot_on_path("b", [(15, -15), (15, 15)])
        samples = compute_collision_set(a, b, 0.5)
        pts = samples.points
        self.assertAlmostEqual(14, pts[:, 0].min())
        self.assertAlmostEqual(21, pts[:, 0].max())
        self.assertAlmostEqual(14, pts[:, 1].min())
        self.assertAlmostEqual(21, pts[:, 1].max())
        self.assertEqual(1, len(split_components(samples)))

    def test_symmetry(self):
        a = robot_on_path("a", [(0, 0), (30, 0)])
        b = robot_on_path("b", [(15, -15), (15, 5), (30, 5)])
        forward = compute_collision_set(a, b, 0.5)
        backward = compute_collision_set(b, a, 0.5)
        self.assertTrue(np.array_equal(forward.indices, backward.transpose().indices))

    def test_coincident(self):
        a = robot_on_path("a", [(0, 0), (30, 0)])
        b = robot_on_path("b", [(0, 0), (30, 0)])
        samples = compute_collision_set(a, b, 0.5)
        d = samples.points[:, 0] - samples.points[:, 1]
        self.assertTrue(np.all(np.abs(d) <= 5.5 + 1e-9))
        cells = {tuple(c) for c in samples.indices.tolist()}
        self.assertIn((0, 10), cells)
        self.assertIn((20, 10), cells)
        self.assertNotIn((0, 12), cells)

    def test_abstract_unsupported(self):
        with self.assertRaises(UnsupportedOperationError):
            compute_collision_set(abstract_robot(1), abstract_robot(2))

    def test_bounding_contains_samples(self):
        a = robot_on_path("a", [(0, 0), (30, 0)])
        b = robot_on_path("b", [(15, -15), (15, 15)])
        samples = compute_collision_set(a, b, 0.5)
        polygon = bounding_polygon(samples)
        polygon.validate()
        pts = samples.points
        self.assertTrue(np.all(contains(polygon, pts[:, 0], pts[:, 1])))

    def test_conflicts_between(self):
        a = robot_on_path("a", [(0, 0), (30, 0)])
        b = robot_on_path("b", [(15, -15), (15, 15)])
        conflicts = conflicts_between(a, b, 0.5)
        self.assertEqual(1, len(conflicts))
        self.assertEqual("a", conflicts[0].robot_i)
        self.assertEqual(ConflictKind.CROSSING, conflicts[0].forward.conflict_kind)

    def test_write_csv(self):
        samples = CollisionSamples(0.5, 10, 10, np.array([[1, 2], [3, 4]]))
        out = io.StringIO()
        write_samples_csv(samples, out)
        lines = out.getvalue().splitlines()
        self.assertEqual(["s_i,s_j", "0.500000,1.000000", "1.500000,2.000000"], lines)


class ComponentsTestCase(unittest.TestCase):
    def test_diagonal_neighbours(self):
        samples = CollisionSamples(1.0, 10, 10, np.array([[1, 1], [1, 2], [5, 5], [6, 6]]))
        components = split_components(samples)
        self.assertEqual(2, len(components))
        self.assertEqual(4, sum(c.count for c in components))


class BoundingPolygonTestCase(unittest.TestCase):
    def _rectangle_samples(self):
        xs, ys = np.meshgrid(np.arange(10, 18), np.arange(12, 20), indexing="ij")
        indices = np.column_stack([xs.ravel(), ys.ravel()])
        return CollisionSamples(1.0, 30, 30, indices)

    def test_rectangle(self):
        polygon = bounding_polygon(self._rectangle_samples(), margin=0)
        self.assertEqual(((10, 12), (17, 12), (17, 19), (10, 19)), polygon.vertices)

    def test_default_margin(self):
        polygon = bounding_polygon(self._rectangle_samples())
        e = polygon.extents
        self.assertEqual((9, 18, 11, 20), (e.xmin, e.xmax, e.ymin, e.ymax))
        self.assertEqual((-11, 7), (e.dmin, e.dmax))
        self.assertEqual(((9, 11), (18, 11), (18, 20), (9, 20)), polygon.vertices)
        self.assertEqual(ConflictKind.CROSSING, decompose(polygon, 2.0).conflict_kind)

    def test_band(self):
        indices = np.array([(x, y) for x in range(31) for y in range(31) if abs(x - y) <= 5])
        polygon = bounding_polygon(CollisionSamples(1.0, 30, 30, indices), margin=0)
        polygon.validate()
        e = polygon.extents
        self.assertEqual((-5, 5), (e.dmin, e.dmax))
        self.assertEqual(6, len(polygon.vertices))
        self.assertTrue(np.all(contains(polygon, indices[:, 0], indices[:, 1], shrink=-1e-9)))

    def test_empty(self):
        with self.assertRaises(GeometryError):
            bounding_polygon(CollisionSamples(1.0, 10, 10, np.zeros((0, 2), dtype=int)))


class DecomposeTestCase(unittest.TestCase):
    def test_crossing(self):
        zone = decompose(polygon_from_box(10, 17, 12, 19), 2.0)
        self.assertEqual(ConflictKind.CROSSING, zone.conflict_kind)
        self.assertFalse(zone.has_par)
        self.assertEqual(12, zone.s_perp_lo_j)
        self.assertEqual(17, zone.s_perp_hi_i)
        self.assertEqual(10, zone.s_perp_lo_i)
        self.assertEqual(19, zone.s_perp_hi_j)
        self.assertEqual(0, zone.offset_aij)

    def test_following(self):
        zone = decompose(polygon_from_extents(0, 30, 0, 30, -5, 5), 2.0)
        self.assertEqual(ConflictKind.FOLLOWING, zone.conflict_kind)
        self.assertFalse(zone.has_perp)
        self.assertEqual(0, zone.s_par_lo_i)
        self.assertEqual(30, zone.s_par_hi_i)
        self.assertEqual(7, zone.offset_aij)

    def test_following_excludes_band(self):
        polygon = polygon_from_extents(0, 30, 0, 30, -5, 5)
        zone = decompose(polygon, 2.0)
        s_i, s_j = np.meshgrid(np.arange(0, 30.5, 0.5), np.arange(0, 30.5, 0.5))
        s_i, s_j = s_i.ravel(), s_j.ravel()
        allowed = s_j <= s_i - zone.offset_aij
        self.assertTrue(allowed.any())
        self.assertFalse(contains(polygon, s_i[allowed], s_j[allowed], shrink=-1e-9).any())

    def test_merging(self):
        polygon = polygon_from_extents(10, 30, 12, 30, -20, 5)
        zone = decompose(polygon, 2.0)
        self.assertEqual(ConflictKind.MERGING, zone.conflict_kind)
        self.assertEqual((10, 17, 12, 30), (zone.s_perp_lo_i, zone.s_perp_hi_i, zone.s_perp_lo_j, zone.s_perp_hi_j))
        self.assertEqual((17, 30, 12, 30), (zone.s_par_lo_i, zone.s_par_hi_i, zone.s_par_lo_j, zone.s_par_hi_j))
        self.assertEqual(zone.offset_aij - 2.0, zone.s_par_lo_i - zone.s_perp_lo_j)

    def test_merge_diverge(self):
        polygon = polygon_from_extents(10, 30, 12, 30, -20, 5)
        zone = decompose(polygon, 2.0, s_out=(40.0, 40.0))
        self.assertEqual(ConflictKind.MERGE_DIVERGE, zone.conflict_kind)

    def test_translation(self):
        polygon = polygon_from_extents(10, 30, 12, 30, -20, 5)
        zone = decompose(polygon, 2.0)
        shifted = decompose(polygon.shifted(3.0), 2.0)
        for field in ("s_perp_lo_i", "s_perp_hi_i", "s_perp_lo_j", "s_perp_hi_j", "s_par_lo_i", "s_par_hi_i"):
            self.assertAlmostEqual(getattr(zone, field) + 3, getattr(shifted, field))
        self.assertAlmostEqual(zone.offset_aij, shifted.offset_aij)

    def test_reverse(self):
        zone = decompose(polygon_from_box(10, 17, 12, 19), 2.0, Direction.J_OVER_I, ("a", "b"))
        self.assertEqual(("b", "a"), (zone.robot_i, zone.robot_j))
        self.assertEqual(19, zone.s_perp_hi_i)
        self.assertEqual(10, zone.s_perp_lo_j)

    def test_invalid_edges(self):
        with self.assertRaises(GeometryError):
            decompose(CollisionPolygon(((0, 0), (10, 0), (5, 10))), 2.0)

    def test_negative_following_distance(self):
        with self.assertRaises(GeometryError):
            decompose(polygon_from_box(10, 17, 12, 19), -1.0)
