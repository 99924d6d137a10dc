import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pixelradon.geometry import (
    AngleSet,
    DetectorGrid,
    FanGeometry,
    GeometryError,
    ImageGrid,
    angle_to_direction,
    make_angle_set,
    make_fan_geometry,
)


def test_pixel_centers_follow_one_based_formula():
    g = ImageGrid(4, 3, 0.5)
    assert g.center(1, 1) == pytest.approx((0.5 * (1 - 2.5), 0.5 * (1 - 2.0)))
    assert g.center(4, 3) == pytest.approx((0.75, 0.5))
    X, Y = g.centers()
    assert X[3, 2] == pytest.approx(0.75) and Y[3, 2] == pytest.approx(0.5)


@pytest.mark.parametrize("n,m", [(1, 1), (4, 7), (9, 2)])
def test_centers_symmetric(n, m):
    g = ImageGrid(n, m, 0.3)
    X, Y = g.centers()
    np.testing.assert_allclose(X, -X[::-1, ::-1], atol=1e-15)
    np.testing.assert_allclose(Y, -Y[::-1, ::-1], atol=1e-15)
    assert abs(g.xs.sum()) < 1e-13 and abs(g.ys.sum()) < 1e-13


def test_center_index_bounds():
    with pytest.raises(IndexError):
        ImageGrid(3, 3, 1.0).center(0, 1)


@pytest.mark.parametrize("bad", [dict(N=0, M=2, delta_x=1.0), dict(N=2, M=2, delta_x=0.0),
                                 dict(N=2, M=2, delta_x=float("nan"))])
def test_image_grid_rejects(bad):
    with pytest.raises(GeometryError):
        ImageGrid(**bad)


def test_detector_offsets():
    d = DetectorGrid(4, width=2.0)
    assert d.delta_s == 0.5
    np.testing.assert_allclose(d.offsets, [-0.75, -0.25, 0.25, 0.75])
    assert d.offset(1) == -0.75
    assert abs(DetectorGrid(17, 3.3).offsets.sum()) < 1e-13
    with pytest.raises(GeometryError):
        DetectorGrid(0)


@pytest.mark.parametrize(
    "phi,theta,perp",
    [
        (0.0, (1, 0), (0, 1)),
        (math.pi / 2, (0, 1), (-1, 0)),
        (math.pi / 4, (math.sqrt(0.5), math.sqrt(0.5)), (-math.sqrt(0.5), math.sqrt(0.5))),
    ],
)
def test_angle_to_direction(phi, theta, perp):
    t, tp = angle_to_direction(phi)
    np.testing.assert_allclose(t, theta, atol=1e-15)
    np.testing.assert_allclose(tp, perp, atol=1e-15)


def test_direction_unit_norm_random(rng):
    for phi in rng.uniform(-10, 10, 1000):
        t, tp = angle_to_direction(phi)
        assert abs(t @ t - 1) <= 1e-14
        assert abs(t @ tp) <= 1e-15


def test_full_uniform_quarter_turns():
    a = make_angle_set("full", count=4)
    np.testing.assert_allclose(a.angles, [0, math.pi / 4, math.pi / 2, 3 * math.pi / 4])
    np.testing.assert_allclose(a.weights, math.pi / 4)
    assert a.Q == 4 and len(a) == 4


def test_limited_endpoint_convention():
    a = make_angle_set("limited", angles=[0.0, 0.1, 0.3])
    np.testing.assert_allclose(a.weights, [0.05, 0.15, 0.1], atol=1e-15)
    assert a.weights.sum() == pytest.approx(0.3)


def test_sparse_unit_weights():
    a = make_angle_set("sparse", angles=[0.0, math.pi / 2])
    assert a.weights.tolist() == [1.0, 1.0]


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 400), st.sampled_from([math.pi, 2 * math.pi]), st.floats(-3, 3))
def test_full_weights_sum_to_period(count, period, start):
    a = make_angle_set("full", count=count, period=period, interval=(start, start + period))
    assert abs(a.weights.sum() - period) <= 1e-12


def test_full_nonuniform_wraparound():
    a = make_angle_set("full", angles=[0.0, 1.0, 2.0], period=math.pi)
    # neighbours of 0 are 2 - pi and 1
    assert a.weights[0] == pytest.approx((1.0 - (2.0 - math.pi)) / 2)
    assert a.weights.sum() == pytest.approx(math.pi)


@pytest.mark.parametrize("angles", [[], [0.0, 0.0], [0.3, 0.1]])
def test_angle_list_errors(angles):
    with pytest.raises(GeometryError):
        make_angle_set("sparse", angles=angles)


def test_full_set_longer_than_period_rejected():
    with pytest.raises(GeometryError):
        make_angle_set("full", angles=[0.0, 3.5], period=math.pi)


def test_angle_set_is_immutable():
    a = make_angle_set("full", count=3)
    with pytest.raises(ValueError):
        a.angles[0] = 1.0
    assert a == make_angle_set("full", count=3)
    assert hash(a) == hash(make_angle_set("full", count=3))


def test_delta_phi():
    a = make_angle_set("full", angles=[0.0, 0.5, 2.0], period=math.pi)
    assert a.delta_phi == pytest.approx(1.5)


def test_fan_geometry_examples():
    g = make_fan_geometry(3.0, 5.0, 3)
    assert g.W == pytest.approx(10 / math.sqrt(8), abs=1e-7)
    assert g.delta_xi == pytest.approx(1.1785113, abs=1e-7)
    assert make_fan_geometry(math.sqrt(2), 5.0, 1).W == pytest.approx(10.0)


@pytest.mark.parametrize("R_E,R", [(1.0, 5.0), (0.5, 5.0), (3.0, 4.0), (3.0, 3.5)])
def test_fan_geometry_rejects(R_E, R):
    with pytest.raises(GeometryError):
        make_fan_geometry(R_E, R, 4)


def test_fan_geometry_checks_width():
    with pytest.raises(GeometryError):
        FanGeometry(3.0, 5.0, DetectorGrid(4, 2.0))


def test_angle_set_validation():
    with pytest.raises(GeometryError):
        AngleSet([0.0, 1.0], [1.0], "sparse")
    with pytest.raises(GeometryError):
        AngleSet([0.0], [1.0], "bogus")
