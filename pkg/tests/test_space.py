"""Space construction, balls, measures, doubling."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from wgrkit import (
    Ball,
    FiniteMetricMeasureSpace,
    doubling_profile,
    grid_1d,
    grid_nd,
    validate_metric,
)
from wgrkit.errors import EmptyBallError, InvalidGeneratorError, TooLargeError


def test_grid_1d_cell_centers():
    sp = grid_1d(0.0, 1.0, 2)
    assert sp.coords[:, 0].tolist() == [0.25, 0.75]
    assert sp.mass.tolist() == [0.5, 0.5]


def test_grid_1d_single_cell():
    sp = grid_1d(0.0, 1.0, 1)
    assert sp.coords[:, 0].tolist() == [0.5]
    assert sp.mass.tolist() == [1.0]


def test_grid_1d_unit_cells():
    sp = grid_1d(0.0, 4.0, 4)
    assert sp.coords[:, 0].tolist() == [0.5, 1.5, 2.5, 3.5]
    assert sp.mass.tolist() == [1.0] * 4


def test_grid_1d_invalid():
    with pytest.raises(InvalidGeneratorError):
        grid_1d(0.0, 1.0, 0)
    with pytest.raises(InvalidGeneratorError):
        grid_1d(1.0, 1.0, 4)


def test_grid_nd_matches_grid_1d():
    a = grid_nd(1, 4, 1.0, "euclidean")
    b = grid_1d(0.0, 4.0, 4)
    assert np.array_equal(a.coords, b.coords)
    assert np.array_equal(a.mass, b.mass)


def test_grid_nd_2x2_chebyshev_distances():
    sp = grid_nd(2, 2, 1.0, "chebyshev")
    dists = {round(sp.distance(i, j), 12) for i in range(4) for j in range(4) if i != j}
    assert dists == {1.0}  # edges and the diagonal all at max-coordinate 1
    assert sp.n_points == 4 and sp.mass.tolist() == [1.0] * 4


def test_grid_nd_single_point():
    sp = grid_nd(2, 1, 1.0, "chebyshev")
    assert sp.n_points == 1 and sp.mass.tolist() == [1.0]


def test_grid_nd_size_cap():
    with pytest.raises(TooLargeError):
        grid_nd(4, 100, 1.0, "euclidean")


def test_ball_strictness_zero_radius():
    sp = grid_1d(0.0, 4.0, 4)
    assert sp.ball_members(1, 0.0).size == 0


def test_ball_all_points_beyond_diameter():
    sp = grid_1d(0.0, 4.0, 4)
    assert sp.ball_members(0, 3.0 + 0.5).size == 4


def test_ball_members_interval():
    sp = grid_1d(0.0, 4.0, 4)
    members = sp.ball_members(1, 1.01)  # center at coordinate 1.5
    assert sp.coords[members, 0].tolist() == [0.5, 1.5, 2.5]


def test_ball_excludes_exact_distance():
    sp = grid_1d(0.0, 8.0, 8)
    for center in range(8):
        for r in (1.0, 2.0, 3.0):
            members = set(sp.ball_members(center, r).tolist())
            for j in range(8):
                if sp.distance(center, j) == r:
                    assert j not in members


@settings(max_examples=25, deadline=None)
@given(
    center=st.integers(min_value=0, max_value=11),
    r1=st.floats(min_value=0.0, max_value=6.0),
    r2=st.floats(min_value=0.0, max_value=6.0),
)
def test_ball_monotone_in_radius(center, r1, r2):
    sp = grid_1d(0.0, 12.0, 12)
    lo, hi = sorted((r1, r2))
    assert set(sp.ball_members(center, lo).tolist()) <= set(sp.ball_members(center, hi).tolist())


def test_set_measure_empty_and_full():
    sp = grid_1d(0.0, 1.0, 2)
    assert sp.set_measure([]) == 0.0
    assert sp.set_measure([0, 1]) == 1.0
    sp2 = grid_nd(2, 2, 1.0, "chebyshev")
    assert sp2.set_measure([2]) == 1.0


def test_set_measure_additive_disjoint():
    sp = grid_1d(0.0, 7.0, 7)
    a, b = [0, 2, 4], [1, 5]
    assert sp.set_measure(a) + sp.set_measure(b) == pytest.approx(
        sp.set_measure(a + b), rel=1e-12
    )


def test_validate_metric_clean_generators():
    assert validate_metric(grid_1d(0.0, 5.0, 5)) == []
    assert validate_metric(grid_nd(2, 3, 0.5, "chebyshev")) == []


def test_validate_metric_single_point_table():
    sp = FiniteMetricMeasureSpace([1.0], distance_matrix=[[0.0]])
    assert validate_metric(sp) == []


def test_validate_metric_symmetric_pair():
    sp = FiniteMetricMeasureSpace([1.0, 1.0], distance_matrix=[[0.0, 1.0], [1.0, 0.0]])
    assert validate_metric(sp) == []


def test_validate_metric_triangle_violation():
    d = [[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]]
    sp = FiniteMetricMeasureSpace([1.0, 1.0, 1.0], distance_matrix=d)
    violations = validate_metric(sp)
    triangles = [v for v in violations if v.kind == "triangle"]
    assert triangles
    deficits = {v.deficit for v in triangles}
    assert 3.0 in deficits  # d(a,c)=5 against d(a,b)+d(b,c)=2


def test_space_requires_positive_mass():
    with pytest.raises(Exception):
        FiniteMetricMeasureSpace([1.0, 0.0], distance_matrix=[[0, 1], [1, 0]])


def test_doubling_profile_one_point():
    sp = grid_nd(1, 1, 1.0, "euclidean")
    prof = doubling_profile(sp, [Ball(0, 1.0)])
    assert prof.c_mu == 1.0 and prof.dimension_d == 0.0


def test_doubling_profile_two_point_ratio():
    sp = FiniteMetricMeasureSpace([1.0, 1.0], distance_matrix=[[0.0, 1.0], [1.0, 0.0]])
    # radius 0.75: the ball is {p0}; its double (radius 1.5) captures both
    prof = doubling_profile(sp, [Ball(0, 0.75)])
    assert prof.c_mu == 2.0
    assert prof.dimension_d == math.log2(2.0)


def test_doubling_profile_exhaustive_scan():
    sp = grid_1d(0.0, 8.0, 8)
    balls = [Ball(c, 1.5) for c in range(8)]
    prof = doubling_profile(sp, balls)
    expected = max(
        oracles.measure(sp, oracles.ball(sp, c, 3.0))
        / oracles.measure(sp, oracles.ball(sp, c, 1.5))
        for c in range(8)
    )
    assert prof.c_mu == pytest.approx(expected, rel=1e-12)


def test_doubling_profile_empty_ball_error():
    # a Ball always contains its center, so an empty ball only arises from
    # duck-typed input with radius 0
    from types import SimpleNamespace

    sp = FiniteMetricMeasureSpace([1.0, 1.0], distance_matrix=[[0.0, 5.0], [5.0, 0.0]])
    with pytest.raises(EmptyBallError):
        doubling_profile(sp, [SimpleNamespace(center=0, radius=0.0), Ball(1, 1.0)])


def test_measure_ratio_bound_closed_ball_set():
    """mu(B(x,R))/mu(B(y,r)) <= c_mu^2 (R/r)^D over a halving-closed set."""
    sp = grid_1d(0.0, 32.0, 32)
    radii = [16.0 / 2**k for k in range(6)]  # 16 .. 0.5, plus the doubles below
    ball_set = [Ball(c, r) for c in range(32) for r in radii]
    prof = doubling_profile(sp, ball_set)
    c2 = prof.c_mu**2
    for x in range(0, 32, 5):
        for big_r in radii:
            big = set(sp.ball_members(x, big_r).tolist())
            mu_big = sp.set_measure(sorted(big))
            for y in sorted(big):
                for r in radii:
                    if r > big_r:
                        continue
                    mu_small = sp.set_measure(sp.ball_members(y, r))
                    bound = c2 * (big_r / r) ** prof.dimension_d
                    assert mu_big / mu_small <= bound * (1 + 1e-12)


def test_serialization_round_trip():
    sp = grid_nd(2, 3, 0.5, "chebyshev")
    obj = sp.to_json_obj()
    assert obj["distance_matrix"] is None and obj["metric_kind"] == "chebyshev"
    back = FiniteMetricMeasureSpace.from_json_obj(obj)
    assert np.array_equal(back.coords, sp.coords)
    assert np.array_equal(back.mass, sp.mass)

    table = FiniteMetricMeasureSpace([1.0, 2.0], distance_matrix=[[0.0, 1.0], [1.0, 0.0]])
    back2 = FiniteMetricMeasureSpace.from_json_obj(table.to_json_obj())
    assert back2.distance(0, 1) == 1.0


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(min_value=0.01, max_value=100.0), min_size=1, max_size=20),
    st.data(),
)
def test_set_measure_additivity_property(masses, data):
    n = len(masses)
    dist = np.abs(np.subtract.outer(np.arange(n, dtype=float), np.arange(n, dtype=float)))
    sp = FiniteMetricMeasureSpace(masses, distance_matrix=dist)
    subset = data.draw(st.lists(st.integers(min_value=0, max_value=n - 1), unique=True))
    split = data.draw(st.integers(min_value=0, max_value=len(subset)))
    a, b = subset[:split], subset[split:]
    assert sp.set_measure(a) + sp.set_measure(b) == pytest.approx(
        sp.set_measure(subset), rel=1e-12, abs=1e-300
    )
