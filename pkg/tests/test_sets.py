import numpy as np
import pytest

from splitrange.cloud import Box, PointCloud
from splitrange.errors import DimensionMismatchError, EmptySampleError, UnsupportedSetError
from splitrange.sets import (EXACT, SAMPLED, BoxSet, Cylinder, ImageSet, IntersectionSet,
                             MinkowskiSet, PredicateSet, affine_intersection, intersect,
                             minkowski)

WINDOW = Box.cube(2, 5.0)


def test_ball_membership_and_projection():
    b = Cylinder.ball([3.0, 0.0], 1.0)
    assert b.contains(np.array([3.5, 0.5]))
    assert not b.contains(np.array([5.0, 0.0]))
    assert np.allclose(b.project(np.array([6.0, 0.0])), [4.0, 0.0])
    assert b.kind_tag == EXACT and b.is_bounded


def test_batch_membership_returns_array():
    b = Cylinder.ball([0.0, 0.0], 1.0)
    out = b.contains(np.array([[0.0, 0.0], [2.0, 0.0]]))
    assert out.tolist() == [True, False]


def test_affine_projection_and_basis():
    line = Cylinder.affine([1.0, 1.0], [[2.0, 0.0]])
    assert np.allclose(line.project(np.array([5.0, -3.0])), [5.0, 1.0])
    base, basis = line.affine_basis
    assert np.allclose(base, [0.0, 1.0])
    assert np.allclose(np.abs(basis), [[1.0, 0.0]])


def test_cylinder_minkowski_of_balls():
    a = Cylinder.ball([0.0, 0.0], 1.0)
    b = Cylinder.ball([3.0, 0.0], 1.0)
    d = a.minkowski(b, -1.0)
    assert np.allclose(d.center, [-3.0, 0.0]) and d.radius == 2.0 and d.rank == 0


def test_ball_plus_line_is_strip():
    s = Cylinder.ball([0.0, 0.0], 1.0).minkowski(Cylinder.affine([0.0, 2.0], [[1.0, 0.0]]), -1.0)
    assert s.contains(np.array([100.0, -2.5]))
    assert not s.contains(np.array([0.0, 0.0]))
    assert np.allclose(s.project(np.array([0.0, 0.0])), [0.0, -1.0])


def test_minkowski_collapses_whole_space():
    assert minkowski(Cylinder.ball([0, 0], 1.0), Cylinder.whole(2)).is_whole_space


def test_exact_minkowski_sample_keeps_witnesses(rng):
    a, b = Cylinder.ball([0.0, 0.0], 1.0), Cylinder.affine([0.0, 2.0], [[1.0, 0.0]])
    m = MinkowskiSet(a, b, -1.0)
    cloud = m.sample(500, WINDOW, rng)
    wa, wb = cloud.witnesses[:, 0], cloud.witnesses[:, 1]
    assert np.allclose(wa - wb, cloud.points, atol=1e-12)
    assert np.all(a.contains(wa, 1e-9)) and np.all(b.contains(wb, 1e-9))


def test_sampled_minkowski_pairs_and_dedup(rng):
    box = BoxSet([0.0, 0.0], [1.0, 1.0])
    pts = PredicateSet(2, lambda p, tol: np.ones(len(p), bool),
                       lambda n, w, r: np.array([[0.0, 0.0], [0.0, 0.0], [2.0, 0.0]]))
    m = MinkowskiSet(box, pts, 1.0)
    assert m.kind_tag == SAMPLED
    cloud = m.sample(16, WINDOW, rng)
    # the duplicated factor point yields no duplicated sums
    assert len(np.unique(cloud.points, axis=0)) == len(cloud)
    assert np.allclose(cloud.witnesses[:, 0] + cloud.witnesses[:, 1], cloud.points)


def test_affine_intersection_exact():
    u = Cylinder.affine([0.0, 0.0, 0.0], [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    v = Cylinder.affine([0.0, 0.0, 1.0], [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    m = affine_intersection(u, v)
    assert m.rank == 1 and np.allclose(np.abs(m.basis), [[0.0, 1.0, 0.0]])
    parallel = Cylinder.affine([0.0, 0.0, 1.0], [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    assert affine_intersection(u, parallel) is None


def test_intersect_shortcuts_and_dykstra():
    ball = Cylinder.ball([0.0, 0.0], 1.0)
    assert intersect(Cylinder.whole(2), ball) is ball
    lens = intersect(ball, Cylinder.ball([1.0, 0.0], 1.0))
    assert isinstance(lens, IntersectionSet)
    p = lens.project(np.array([0.5, 3.0]))
    assert np.allclose(p, [0.5, np.sqrt(0.75)], atol=1e-6)


def test_intersection_sampling_respects_all_members(rng):
    lens = IntersectionSet([Cylinder.ball([0.0, 0.0], 1.0), Cylinder.ball([1.0, 0.0], 1.0)])
    cloud = lens.sample(300, WINDOW, rng)
    assert len(cloud) > 0 and np.all(lens.contains(cloud.points, 1e-9))


def test_intersection_sampling_fails_loudly_when_empty(rng):
    far = IntersectionSet([Cylinder.ball([0.0, 0.0], 1.0), Cylinder.ball([9.0, 0.0], 1.0)])
    with pytest.raises(EmptySampleError):
        far.sample(50, WINDOW, rng)


@pytest.mark.parametrize("s", [
    Cylinder.ball([1.0, -1.0], 0.5),
    Cylinder.affine([0.0, 1.0], [[1.0, 1.0]]),
    Cylinder.whole(2),
    Cylinder.point([0.2, 0.3]),
    Cylinder([0.0, 0.0], [[1.0, 0.0]], 0.7),
    BoxSet([-1.0, -1.0], [1.0, 1.0]),
])
def test_samples_satisfy_membership(s, rng):
    cloud = s.sample(400, WINDOW, rng)
    assert np.all(s.contains(cloud.points, 1e-9))


def test_map_affine_negate_translate():
    b = Cylinder.ball([3.0, 0.0], 1.0)
    assert np.allclose(b.negate().center, [-3.0, 0.0])
    assert np.allclose(b.translate([1.0, 1.0]).center, [4.0, 1.0])
    box = BoxSet([0.0, 1.0], [2.0, 3.0]).negate()
    assert np.allclose(box.lo, [-2.0, -3.0]) and np.allclose(box.hi, [0.0, -1.0])


def test_predicate_set_map_affine():
    half = PredicateSet(2, lambda p, tol: p[:, 0] >= -tol,
                        lambda n, w, r: np.abs(w.uniform(n, r)))
    moved = half.map_affine(-1.0, [1.0, 0.0])
    assert moved.contains(np.array([0.5, 7.0]))
    assert not moved.contains(np.array([1.5, 0.0]))


def test_image_set_membership_uses_resolution():
    img = ImageSet(lambda x: x / 2.0, 2, Box.cube(2, 2.0), reference_count=500)
    assert img.contains(np.array([0.1, 0.2]))
    assert not img.contains(np.array([3.0, 3.0]))


def test_unsupported_projection():
    img = ImageSet(lambda x: x, 2, Box.cube(2, 1.0))
    with pytest.raises(UnsupportedSetError):
        img.project(np.zeros(2))


def test_dimension_checks():
    with pytest.raises(DimensionMismatchError):
        MinkowskiSet(Cylinder.whole(2), Cylinder.whole(3))
    with pytest.raises(DimensionMismatchError):
        Cylinder.ball([0.0, 0.0], 1.0).contains(np.zeros(3))


def test_point_cloud_csv_roundtrip(tmp_path, rng):
    cloud = PointCloud(rng.normal(size=(20, 3)))
    path = tmp_path / "c.csv"
    cloud.to_csv(path)
    back = PointCloud.from_csv(path)
    assert np.array_equal(back.points, cloud.points)


def test_point_cloud_rejects_non_finite():
    with pytest.raises(ValueError):
        PointCloud(np.array([[0.0, np.nan]]))
