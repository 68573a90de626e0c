import numpy as np
import pytest

from splitrange.catalog import angle_pair, catalog, rotation_pair, two_balls_pair
from splitrange.errors import DimensionMismatchError, SpecError
from splitrange.operators import fne_violation, inverse, normal_cone_ball, resolvent
from splitrange.splitting import (OperatorPair, attouch_thera_dual, displacement_map, dr_iterate,
                                  dr_from_firmly_nonexpansive, dr_map, dr_map_reflected)


def test_two_forms_of_the_dr_map_agree(rng):
    x = rng.normal(size=(50, 2)) * 5
    for entry in catalog().values():
        if entry.pair.dim == 2:
            assert np.allclose(dr_map(entry.pair, x), dr_map_reflected(entry.pair, x), atol=1e-9)


def test_dr_map_single_vector_and_batch_agree():
    pair = two_balls_pair()
    x = np.array([[1.0, 2.0], [-4.0, 0.5]])
    assert np.allclose(dr_map(pair, x)[1], dr_map(pair, x[1]))


def test_rotation_dr_is_identity(rng):
    x = rng.normal(size=(20, 2))
    assert np.allclose(dr_map(rotation_pair(), x), x, atol=1e-12)


def test_dr_map_is_firmly_nonexpansive(rng):
    x, y = rng.normal(size=(200, 2)) * 5, rng.normal(size=(200, 2)) * 5
    for entry in catalog().values():
        if entry.pair.dim == 2 and "prox" not in entry.name:
            assert fne_violation(lambda p: dr_map(entry.pair, p), x, y) <= 1e-10


def test_dual_pair_shares_the_dr_operator(rng):
    x = rng.normal(size=(100, 2)) * 5
    for entry in catalog().values():
        if entry.pair.dim == 2:
            assert np.allclose(dr_map(attouch_thera_dual(entry.pair), x),
                               dr_map(entry.pair, x), atol=1e-10)


def test_inverse_b_gives_complementary_operator(rng):
    x = rng.normal(size=(100, 2)) * 5
    pair = two_balls_pair()
    other = OperatorPair(pair.A, inverse(pair.B))
    assert np.allclose(dr_map(pair, x) + dr_map(other, x), x, atol=1e-12)


def test_dr_from_fne_maps_matches_dr_map(rng):
    pair = two_balls_pair()
    t = dr_from_firmly_nonexpansive(pair.A.resolvent_map, pair.B.resolvent_map)
    x = rng.normal(size=(30, 2))
    assert np.allclose(t(x), dr_map(pair, x))


def test_displacement_map():
    pair = two_balls_pair()
    x = np.array([0.0, 0.0])
    assert np.allclose(displacement_map(pair, x), x - dr_map(pair, x))


def test_consistent_iteration_converges_to_zero_shadow():
    pair = two_balls_pair(v=(1.0, 0.0))
    trace = dr_iterate(pair, [5.0, 5.0], 1000)
    assert trace.converged
    j = trace.shadow[-1]
    assert np.linalg.norm(j) <= 1 + 1e-9 and np.linalg.norm(j - [1.0, 0.0]) <= 1 + 1e-9


def test_inconsistent_iteration_runs_to_max_iter():
    trace = dr_iterate(two_balls_pair(), [0.0, 0.0], 200)
    assert not trace.converged and trace.iterations == 200
    assert np.allclose(trace.displacement[-1], [-1.0, 0.0], atol=1e-6)
    assert len(trace.displacement_norms) == 200


def test_stride_keeps_last_iterate():
    trace = dr_iterate(two_balls_pair(), [0.0, 0.0], 100, stride=30)
    assert trace.iterations_index.tolist() == [0, 30, 60, 90, 100]
    assert trace.governing.shape == (5, 2)


def test_angle_pair_displacement_identity():
    theta = 0.7
    t1 = dr_iterate(angle_pair(theta), np.zeros(4), 100)
    t2 = dr_iterate(angle_pair(theta, swap=True), np.zeros(4), 100)
    v1, v2 = t1.displacement[-1], t2.displacement[-1]
    assert np.linalg.norm(v1) == pytest.approx(1.0, abs=1e-10)
    assert np.linalg.norm(v2) == pytest.approx(1.0, abs=1e-10)
    assert np.allclose(v1 - v2, [0, 0, 2 * np.sin(theta), 0], atol=1e-10)


def test_trace_csv(tmp_path):
    trace = dr_iterate(two_balls_pair(), [0.0, 0.0], 10)
    path = tmp_path / "t.csv"
    trace.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iter,x0,x1,shadow0,shadow1,displacement_norm"
    assert len(lines) == 12


def test_iterate_argument_checks():
    with pytest.raises(SpecError):
        dr_iterate(two_balls_pair(), [0.0, 0.0], 0)
    with pytest.raises(DimensionMismatchError):
        dr_iterate(two_balls_pair(), [0.0, 0.0, 0.0], 5)


def test_pair_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        OperatorPair(normal_cone_ball([0.0, 0.0], 1.0), normal_cone_ball([0.0], 1.0))


def test_pair_from_spec_prefixes_fields():
    good = {"A": {"kind": "ball", "center": [0, 0], "radius": 1},
            "B": {"kind": "ball", "center": [3, 0], "radius": 1}}
    pair = OperatorPair.from_spec(good)
    assert np.allclose(resolvent(pair.B, np.zeros(2)), [2.0, 0.0])
    bad = {"A": good["A"], "B": {"kind": "ball", "center": [3, 0], "radius": "x"}}
    with pytest.raises(SpecError) as info:
        OperatorPair.from_spec(bad)
    assert info.value.field == "B.radius"
    with pytest.raises(SpecError) as info:
        OperatorPair.from_spec({"A": good["A"]})
    assert info.value.field == "B"
    with pytest.raises(SpecError):
        OperatorPair.from_spec({"A": good["A"], "B": {"kind": "ball", "center": [0], "radius": 1}})
