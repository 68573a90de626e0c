import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitrange.cloud import Box, PointCloud
from splitrange.errors import DimensionMismatchError, EmptySampleError, UnsupportedSetError
from splitrange.geometry import (affine_hull, directions, hausdorff_estimate, near_equal,
                                 recession_polar, support_profile)
from splitrange.sets import BoxSet, Cylinder, PredicateSet


def _circle(n, r=1.0, c=(0.0, 0.0)):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return np.c_[np.cos(t), np.sin(t)] * r + np.asarray(c)


def test_directions_are_unit_and_seeded():
    d = directions(3, 10, seed=4)
    assert d.shape == (16, 3)
    assert np.allclose(np.linalg.norm(d, axis=1), 1.0)
    assert np.array_equal(d, directions(3, 10, seed=4))


def test_support_profile_of_square():
    sq = np.array([[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]])
    prof = support_profile(sq, n_directions=0)
    assert np.allclose(prof.values, 1.0)


def test_support_profile_clips_to_window():
    prof = support_profile(np.array([[100.0, 0.0]]), n_directions=0, window=Box.cube(2, 2.0))
    assert prof.values[0] == pytest.approx(2.0)


def test_hausdorff_of_concentric_circles():
    assert hausdorff_estimate(_circle(2000), _circle(2000, 1.5)) == pytest.approx(0.5, abs=1e-3)


def test_near_equal_same_disk_different_samples(rng):
    disk = Cylinder.ball([0.0, 0.0], 1.0)
    a = disk.sample(3000, Box.cube(2, 2.0), rng)
    b = disk.sample(3000, Box.cube(2, 2.0), rng)
    rep = near_equal(a, b)
    assert rep.verdict and rep.affine_dims == (2, 2)


def test_near_equal_disk_vs_shifted_disk():
    rep = near_equal(_circle(500), _circle(500, c=(0.3, 0.0)))
    assert not rep.verdict
    assert rep.max_support_gap == pytest.approx(0.3, abs=1e-2)


def test_affine_dimension_breaks_tie():
    # a segment and a thin rectangle have close closures but different affine hulls
    seg = np.c_[np.linspace(-1, 1, 100), np.zeros(100)]
    thin = np.r_[seg, seg + [0.0, 0.01]]
    rep = near_equal(seg, thin)
    assert rep.max_support_gap <= 0.05 and rep.affine_dims == (1, 2) and not rep.verdict


def test_nearly_convex_set_matches_its_closure(rng):
    # open disk plus one boundary point, against the closed disk
    def sampler(n, window, r):
        p = window.uniform(n, r)
        return p[np.sum(p * p, axis=1) < 1.0]

    open_disk = PredicateSet(2, lambda p, tol: np.sum(p * p, axis=1) < 1.0, sampler)
    pts = open_disk.sample(8000, Box.cube(2, 1.0), rng).points
    pts = np.r_[pts, [[1.0, 0.0]]]
    assert near_equal(pts, _circle(1000)).verdict


def test_affine_hull_of_line():
    pts = np.c_[np.arange(5.0), 2 * np.arange(5.0), np.ones(5)]
    base, basis, k = affine_hull(pts)
    assert k == 1
    assert np.allclose(np.abs(basis[0]), np.array([1.0, 2.0, 0.0]) / np.sqrt(5))


def test_affine_hull_of_point():
    assert affine_hull(np.array([[1.0, 2.0]] * 3))[2] == 0


def test_report_exports(tmp_path):
    rep = near_equal(_circle(100), _circle(100))
    d = rep.to_dict()
    assert d["verdict"] is True and d["window"] == [[-10.0] * 2, [10.0] * 2]
    path = tmp_path / "gap.csv"
    rep.export_support_csv(path)
    assert path.read_text().splitlines()[0] == "d0,d1,value_C,value_D,gap"


def test_errors():
    with pytest.raises(EmptySampleError):
        near_equal(np.zeros((0, 2)), _circle(10))
    with pytest.raises(DimensionMismatchError):
        near_equal(_circle(10), np.zeros((3, 3)))


def test_recession_polar():
    assert recession_polar(Cylinder.ball([1.0, 1.0], 2.0)).is_whole_space
    assert recession_polar(BoxSet([0.0, 0.0], [1.0, 1.0])).is_whole_space
    polar = recession_polar(Cylinder.affine([0.0, 3.0], [[1.0, 0.0]]))
    assert polar.contains(np.array([0.0, 5.0])) and not polar.contains(np.array([1.0, 0.0]))
    assert recession_polar(Cylinder.whole(2)).contains(np.zeros(2))
    with pytest.raises(UnsupportedSetError):
        recession_polar(PredicateSet(2, lambda p, t: np.ones(len(p), bool), None))


_pts = st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=30)


@settings(max_examples=40, deadline=None)
@given(a=_pts, b=_pts, shift=st.tuples(st.floats(-2, 2), st.floats(-2, 2)))
def test_support_gap_properties(a, b, shift):
    a, b = np.array(a), np.array(b)
    # symmetric, zero on itself, translation bounded by the shift length
    assert hausdorff_estimate(a, b) == pytest.approx(hausdorff_estimate(b, a))
    assert hausdorff_estimate(a, a) == 0.0
    assert hausdorff_estimate(a, a + np.array(shift)) <= np.linalg.norm(shift) + 1e-9


@settings(max_examples=30, deadline=None)
@given(a=_pts)
def test_support_of_hull_equals_support_of_cloud(a):
    a = np.array(a)
    centroid = a.mean(axis=0, keepdims=True)
    # adding convex combinations never changes the support function
    assert hausdorff_estimate(a, np.r_[a, centroid]) == pytest.approx(0.0, abs=1e-9)
